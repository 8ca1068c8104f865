#include "perifront/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace perifront {

std::string to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::Blocking: return "Blocking";
    case VerdictKind::Persistence: return "Persistence";
    case VerdictKind::Invasion: return "Invasion";
    case VerdictKind::OrientedInvasion: return "OrientedInvasion";
    case VerdictKind::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

std::optional<VerdictKind> verdict_from_string(const std::string& s) {
  if (s == "Blocking") return VerdictKind::Blocking;
  if (s == "Persistence") return VerdictKind::Persistence;
  if (s == "Invasion") return VerdictKind::Invasion;
  if (s == "OrientedInvasion") return VerdictKind::OrientedInvasion;
  if (s == "Inconclusive") return VerdictKind::Inconclusive;
  return std::nullopt;
}

namespace {

struct TailStats {
  double mean = 0.0;
  double drift = 0.0;  // (max-min)/max(|mean|, 0.1)
  bool valid = false;
};

TailStats tail_stats(const std::vector<double>& t, const std::vector<double>& y, double t_from) {
  TailStats out;
  double lo = 1e300, hi = -1e300, acc = 0.0;
  int n = 0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] < t_from || !std::isfinite(y[k])) continue;
    lo = std::min(lo, y[k]);
    hi = std::max(hi, y[k]);
    acc += y[k];
    ++n;
  }
  if (n == 0) return out;
  out.mean = acc / n;
  out.drift = (hi - lo) / std::max(std::abs(out.mean), 0.1);
  out.valid = true;
  return out;
}

}  // namespace

SpeedFit measure_speed(const Trajectory& traj, const std::string& level_probe) {
  const std::vector<double>& pos = traj.probe(level_probe);
  std::vector<double> t, y;
  for (std::size_t k = 0; k < pos.size(); ++k)
    if (std::isfinite(pos[k])) {
      t.push_back(traj.times[k]);
      y.push_back(pos[k]);
    }
  if (t.size() < 4) throw LevelNeverCrossed("probe " + level_probe + " never located the level");
  const std::size_t from = t.size() / 2;  // trailing 50%
  std::vector<double> tt(t.begin() + static_cast<std::ptrdiff_t>(from), t.end());
  std::vector<double> yy(y.begin() + static_cast<std::ptrdiff_t>(from), y.end());
  const LineFit fit = fit_line(tt, yy);
  return {fit.slope, fit.r2};
}

Verdict classify(const Trajectory& traj, const std::vector<std::string>& compact_probes,
                 const ClassifyParams& p) {
  Verdict v;
  const double T = traj.horizon;
  const double tail_from = 0.8 * T;
  const double transient_end = p.transient_frac * T;

  const TailStats sup = tail_stats(traj.times, traj.probe("sup"), tail_from);
  v.sup_tail = sup.mean;

  TailStats compact;
  compact.mean = 1e300;
  compact.valid = false;
  for (const std::string& name : compact_probes) {
    const TailStats s = tail_stats(traj.times, traj.probe(name), tail_from);
    if (!s.valid) continue;
    compact.valid = true;
    compact.mean = std::min(compact.mean, s.mean);
    compact.drift = std::max(compact.drift, s.drift);
  }
  if (compact.valid) v.compact_min_tail = compact.mean;

  // probes guarding non-periodic window edges: activity there voids the run
  for (const std::string& name : p.edge_guard_probes) {
    const auto& series = traj.probe(name);
    for (std::size_t k = 0; k < series.size(); ++k) {
      if (traj.times[k] < transient_end || !std::isfinite(series[k])) continue;
      if (series[k] >= p.delta_blk) {
        v.kind = VerdictKind::Inconclusive;
        v.note = "activity within two periods of a non-periodic edge (" + name + ")";
        return v;
      }
    }
  }

  if (traj.probe_index(p.level_right_probe) >= 0) {
    try {
      const SpeedFit fit = measure_speed(traj, p.level_right_probe);
      v.speed_right = fit.speed;
      v.r2_right = fit.r2;
    } catch (const LevelNeverCrossed&) {
    }
  }
  if (traj.probe_index("level_left") >= 0) {
    try {
      const SpeedFit fit = measure_speed(traj, "level_left");
      v.speed_left = fit.speed;
      v.r2_left = fit.r2;
    } catch (const LevelNeverCrossed&) {
    }
  }

  TailStats pers = compact;
  if (!p.persistence_probes.empty()) {
    pers = TailStats{};
    pers.mean = 1e300;
    for (const std::string& name : p.persistence_probes) {
      const TailStats s = tail_stats(traj.times, traj.probe(name), tail_from);
      if (!s.valid) continue;
      pers.valid = true;
      pers.mean = std::min(pers.mean, s.mean);
      pers.drift = std::max(pers.drift, s.drift);
    }
  }
  v.persistent = pers.valid && pers.mean > p.pers_floor && pers.drift <= 10 * p.drift_tol;

  if (p.oriented && traj.probe_index(p.left_sup_probe) >= 0 && v.speed_right) {
    double left_sup = 0.0;
    const auto& series = traj.probe(p.left_sup_probe);
    for (std::size_t k = 0; k < series.size(); ++k)
      if (traj.times[k] >= transient_end && std::isfinite(series[k]))
        left_sup = std::max(left_sup, series[k]);
    if (*v.speed_right > 0 && v.r2_right > p.r2_min && left_sup < p.delta_blk &&
        compact.valid && compact.mean > 1.0 - p.eps_inv) {
      v.kind = VerdictKind::OrientedInvasion;
      v.drift = compact.drift;
      return v;
    }
  }

  if (compact.valid && compact.mean > 1.0 - p.eps_inv) {
    if (compact.drift > p.drift_tol) {
      v.kind = VerdictKind::Inconclusive;
      v.drift = compact.drift;
      v.note = "invasion statistic still drifting";
      return v;
    }
    v.kind = VerdictKind::Invasion;
    v.drift = compact.drift;
    return v;
  }

  if (sup.valid && sup.mean < 1.0 - p.delta_blk) {
    if (sup.drift > p.drift_tol) {
      v.kind = VerdictKind::Inconclusive;
      v.drift = sup.drift;
      v.note = "blocking statistic still drifting";
      return v;
    }
    v.kind = VerdictKind::Blocking;
    v.drift = sup.drift;
    return v;
  }

  if (v.persistent && pers.drift <= p.drift_tol) {
    v.kind = VerdictKind::Persistence;
    v.drift = pers.drift;
    return v;
  }

  v.kind = VerdictKind::Inconclusive;
  v.drift = std::max(sup.drift, compact.drift);
  v.note = "trailing statistics unstable or in between thresholds";
  return v;
}

WStar w_star(double R_of_f, double lambda, double Lambda, double q_radial_limsup) {
  const double diffusive = lambda / std::sqrt(Lambda) * std::sqrt(std::max(R_of_f, 0.0));
  WStar out;
  out.value = diffusive - q_radial_limsup;
  out.applicable = q_radial_limsup < diffusive;
  return out;
}

WStar w_star(const Reaction& f, double lambda, double Lambda, double q_radial_limsup) {
  return w_star(compute_R(f).value, lambda, Lambda, q_radial_limsup);
}

double SubsolutionProfile::h(double z) const {
  if (z <= 0.0) return H;
  if (z <= z1) return H - 0.5 * gamma * z * z;
  if (z >= z2) return 0.0;
  return std::exp(log_mu + beta * std::log(z2 - z));
}

double SubsolutionProfile::h_prime(double z) const {
  if (z <= 0.0 || z >= z2) return 0.0;
  if (z <= z1) return -gamma * z;
  return -std::exp(log_mu + (beta - 1.0) * std::log(z2 - z) + std::log(beta));
}

double SubsolutionProfile::h_second(double z) const {
  if (z <= 0.0 || z >= z2) return 0.0;
  if (z <= z1) return -gamma;
  return std::exp(log_mu + (beta - 2.0) * std::log(z2 - z) + std::log(beta * (beta - 1.0)));
}

std::array<double, 5> SubsolutionProfile::alg_residuals() const {
  std::array<double, 5> r{};
  r[0] = lambda * (beta - 1.0) - B_bar * delta;
  r[1] = min_f - gamma * (Lambda + B_bar * z1);
  r[2] = 0.5 * gamma * z1 * z1 - (H - K);
  r[3] = std::exp(log_mu + beta * std::log(delta)) - K;
  r[4] = gamma * z1 - K * beta / delta;
  return r;
}

namespace {

SubsolutionProfile make_profile(double K, double H, double min_f, double B_bar, double lambda,
                                double Lambda, double beta) {
  SubsolutionProfile p;
  p.K = K;
  p.H = H;
  p.min_f = min_f;
  p.B_bar = B_bar;
  p.lambda = lambda;
  p.Lambda = Lambda;
  p.beta = beta;
  p.gamma = sq(B_bar * beta * K / (lambda * std::sqrt(2.0 * (H - K)) * (beta - 1.0)));
  p.z1 = std::sqrt(2.0 * (H - K) / p.gamma);
  p.delta = beta * K / std::sqrt(2.0 * p.gamma * (H - K));
  p.z2 = p.z1 + p.delta;
  p.log_mu = std::log(K) - beta * std::log(p.delta);  // mu delta^beta = K exactly
  return p;
}

}  // namespace

SubsolutionProfile build_propdim_profile(const Reaction& f, double lambda, double Lambda,
                                         double beta) {
  const RectResult rect = compute_R(f, 1e-3);
  if (rect.value <= 0.0) throw Error("build_propdim_profile: R(f) must be positive");
  const double K = rect.K, H = rect.H;

  // sampled min of g over [K,H], with a margin covering the sampling gap so
  // that the certificate survives pointwise verification
  const int ns = 4096;
  double min_f = 1e300;
  for (int k = 0; k <= ns; ++k) min_f = std::min(min_f, f.min_over_x(K + (H - K) * k / ns));
  min_f -= f.lipschitz() * (H - K) / ns + 1e-12;
  if (min_f <= 0.0) throw Error("build_propdim_profile: degenerate rectangle");

  const double B_bar = lambda / std::sqrt(Lambda) * std::sqrt(rect.value);

  if (beta > 1.0) return make_profile(K, H, min_f, B_bar, lambda, Lambda, beta);

  for (double b = 4.0; b <= 65536.0; b *= 2.0) {
    SubsolutionProfile p = make_profile(K, H, min_f, B_bar, lambda, Lambda, b);
    if (p.gamma * (Lambda + B_bar * p.z1) <= min_f) return p;
  }
  throw BetaSearchFailed("no beta up to 2^16 satisfies the second relation");
}

double verify_propdim(const SubsolutionProfile& prof, const Reaction& f, double lambda,
                      double Lambda, double B, int n_samples) {
  double worst = 1e300;
  const double L = prof.L();
  for (int k = 0; k <= n_samples; ++k) {
    const double z = L * k / n_samples;
    const double hh = prof.h(z);
    const double hp = prof.h_prime(z);
    const double hpp = prof.h_second(z);
    const double fv = f.min_over_x(hh);
    worst = std::min(worst, lambda * hpp + B * hp + fv);
    worst = std::min(worst, Lambda * hpp + B * hp + fv);
  }
  return worst;
}

double RadialExpandingSubsolution::value(double t, const Vec2& x) const {
  return profile.h(x.norm() - c_bar * t - rho);
}

double RadialExpandingSubsolution::worst_residual(const Reaction& f, int n_samples) const {
  double worst = -1e300;
  const double L = profile.L();
  for (int k = 0; k <= n_samples; ++k) {
    const double zeta = L * k / n_samples;
    const double ray = rho + zeta;  // smallest radius the profile point ever sees
    const double hh = profile.h(zeta);
    const double hp = profile.h_prime(zeta);
    const double hpp = profile.h_second(zeta);
    for (const double a : {profile.lambda, profile.Lambda}) {
      const double B_loc = c_bar + q_radial_limsup + a * (dim - 1) / ray;
      const double res = -(a * hpp + B_loc * hp + f.min_over_x(hh));
      worst = std::max(worst, res);
    }
  }
  return worst;
}

RadialExpandingSubsolution radial_expanding_subsolution(const SubsolutionProfile& prof,
                                                        double c_bar, double rho,
                                                        double q_radial_limsup, int dim) {
  if (!(c_bar < prof.B_bar))
    throw RhoTooSmall("requires c_bar below the certificate bound B_bar");
  if (dim * prof.Lambda / rho + c_bar + q_radial_limsup >= prof.B_bar)
    throw RhoTooSmall("admissibility display fails: increase rho");
  RadialExpandingSubsolution out;
  out.profile = prof;
  out.c_bar = c_bar;
  out.rho = rho;
  out.q_radial_limsup = q_radial_limsup;
  out.dim = dim;
  return out;
}

}  // namespace perifront
