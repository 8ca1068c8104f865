#include "perifront/reaction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "perifront/geometry.hpp"

namespace perifront {

namespace {

double cubic_eval(double s, double a) { return s * (1.0 - s) * (s - a); }

// int_0^s sigma(1-sigma)(sigma-a) dsigma
double cubic_primitive(double s, double a) {
  return -0.25 * s * s * s * s + (1.0 + a) / 3.0 * s * s * s - 0.5 * a * s * s;
}

}  // namespace

Reaction Reaction::cubic(double theta) {
  Reaction r;
  r.impl_ = Impl::HomCubic;
  r.kind_ = ReactionKind::Bistable;
  r.a_mid_ = theta;
  r.theta_param_ = theta;
  // max |f'| on [0,1] for the cubic family stays below 1 + |theta|
  r.lipschitz_ = 1.0 + std::abs(theta);
  return r;
}

Reaction Reaction::cubic_xdep(double a_mid, double a_amp, double period_x, double period_y) {
  Reaction r;
  r.impl_ = Impl::XdepCubic;
  r.kind_ = ReactionKind::Bistable;
  r.x_dependent_ = true;
  r.a_mid_ = a_mid;
  r.a_amp_ = a_amp;
  r.period_x_ = period_x;
  r.period_y_ = period_y;
  r.theta_param_ = a_mid + std::abs(a_amp);
  r.lipschitz_ = 1.0 + std::abs(a_mid) + std::abs(a_amp);
  return r;
}

Reaction Reaction::piecewise_linear(std::vector<double> s_nodes, std::vector<double> values,
                                    ReactionKind kind) {
  if (s_nodes.size() != values.size() || s_nodes.size() < 2)
    throw Error("piecewise_linear: need matching node/value arrays of size >= 2");
  Reaction r;
  r.impl_ = Impl::HomPiecewiseLinear;
  r.kind_ = kind;
  r.pl_s_ = std::move(s_nodes);
  r.pl_v_ = std::move(values);
  r.lower_state_ = r.pl_s_.front();
  r.upper_state_ = r.pl_s_.back();

  double lip = 0.0;
  for (std::size_t i = 0; i + 1 < r.pl_s_.size(); ++i) {
    const double ds = r.pl_s_[i + 1] - r.pl_s_[i];
    if (ds <= 0) throw Error("piecewise_linear: nodes must be strictly ascending");
    lip = std::max(lip, std::abs(r.pl_v_[i + 1] - r.pl_v_[i]) / ds);
  }
  r.lipschitz_ = std::max(lip, 1e-12);

  // cumulative trapezoid, anchored so that the primitive vanishes at s=0
  r.pl_cum_.assign(r.pl_s_.size(), 0.0);
  for (std::size_t i = 0; i + 1 < r.pl_s_.size(); ++i) {
    const double ds = r.pl_s_[i + 1] - r.pl_s_[i];
    r.pl_cum_[i + 1] = r.pl_cum_[i] + 0.5 * (r.pl_v_[i] + r.pl_v_[i + 1]) * ds;
  }
  Reaction tmp = r;  // pl_primitive needs the arrays in place
  const double f0 = tmp.pl_primitive(0.0);
  for (double& c : r.pl_cum_) c -= f0;
  return r;
}

Reaction Reaction::combustion_bump(double ignition, double amplitude) {
  if (ignition <= 0.0 || ignition >= 1.0) throw Error("combustion_bump: ignition in (0,1)");
  std::vector<double> s, v;
  const int n = 96;
  s.push_back(0.0);
  v.push_back(0.0);
  s.push_back(ignition);
  v.push_back(0.0);
  for (int i = 1; i <= n; ++i) {
    const double t = ignition + (1.0 - ignition) * i / n;
    s.push_back(t);
    v.push_back(amplitude * (t - ignition) * (1.0 - t) / sq(0.5 * (1.0 - ignition)));
  }
  Reaction r = piecewise_linear(std::move(s), std::move(v), ReactionKind::Combustion);
  r.theta_param_ = ignition;
  return r;
}

Reaction Reaction::plateau(double m, double a, double b, double ramp) {
  if (!(0.0 < a && a < b && b < 1.0)) throw Error("plateau: need 0 < a < b < 1");
  if (a - ramp <= 0.0) throw Error("plateau: left ramp would cross 0");
  std::vector<double> s = {0.0, a - ramp, a, b, 1.0};
  std::vector<double> v = {0.0, 0.0, m, m, 0.0};
  Reaction r = piecewise_linear(std::move(s), std::move(v), ReactionKind::Combustion);
  r.theta_param_ = a - ramp;
  return r;
}

Reaction Reaction::custom(std::function<double(double)> f, double lipschitz, ReactionKind kind) {
  Reaction r;
  r.impl_ = Impl::Custom;
  r.kind_ = kind;
  r.fn_ = std::move(f);
  r.lipschitz_ = lipschitz;
  return r;
}

double Reaction::extension(double s) const {
  // above the upper state: negative, pulls down; below the lower state the
  // mirrored (restoring) branch pushes back up, so round-off excursions below
  // zero decay instead of feeding on themselves
  if (s > upper_state_) return -lipschitz_ * (s - upper_state_);
  return -lipschitz_ * (s - lower_state_);  // s < lower_state_
}

double Reaction::eval_core(const Vec2& x, double s) const {
  switch (impl_) {
    case Impl::HomCubic:
      return cubic_eval(s, a_mid_);
    case Impl::XdepCubic: {
      const double a = a_mid_ + a_amp_ * std::cos(2.0 * std::numbers::pi * x.x / period_x_) *
                                    std::cos(2.0 * std::numbers::pi * x.y / period_y_);
      return cubic_eval(s, a);
    }
    case Impl::HomPiecewiseLinear:
      return pl_eval(s);
    case Impl::Custom:
      return fn_(s);
  }
  return 0.0;
}

double Reaction::operator()(const Vec2& x, double s) const {
  if (s > upper_state_ || s < lower_state_) return extension(s);
  return eval_core(x, s);
}

double Reaction::pl_eval(double s) const {
  const auto it = std::upper_bound(pl_s_.begin(), pl_s_.end(), s);
  std::size_t i = (it == pl_s_.begin()) ? 0 : (it - pl_s_.begin() - 1);
  i = std::min(i, pl_s_.size() - 2);
  const double t = (s - pl_s_[i]) / (pl_s_[i + 1] - pl_s_[i]);
  return pl_v_[i] + t * (pl_v_[i + 1] - pl_v_[i]);
}

double Reaction::pl_primitive(double s) const {
  const auto it = std::upper_bound(pl_s_.begin(), pl_s_.end(), s);
  std::size_t i = (it == pl_s_.begin()) ? 0 : (it - pl_s_.begin() - 1);
  i = std::min(i, pl_s_.size() - 2);
  const double ds = s - pl_s_[i];
  const double slope = (pl_v_[i + 1] - pl_v_[i]) / (pl_s_[i + 1] - pl_s_[i]);
  return pl_cum_[i] + pl_v_[i] * ds + 0.5 * slope * ds * ds;
}

double Reaction::primitive(const Vec2& x, double s) const {
  if (s > upper_state_) {
    const double d = s - upper_state_;
    return primitive(x, upper_state_) - 0.5 * lipschitz_ * d * d;
  }
  if (s < lower_state_) {
    const double d = s - lower_state_;
    return primitive(x, lower_state_) - 0.5 * lipschitz_ * d * d;
  }
  switch (impl_) {
    case Impl::HomCubic:
      return cubic_primitive(s, a_mid_);
    case Impl::XdepCubic: {
      const double a = a_mid_ + a_amp_ * std::cos(2.0 * std::numbers::pi * x.x / period_x_) *
                                    std::cos(2.0 * std::numbers::pi * x.y / period_y_);
      return cubic_primitive(s, a);
    }
    case Impl::HomPiecewiseLinear:
      return pl_primitive(s);
    case Impl::Custom: {
      // composite Simpson on [0,s]
      const int n = 256;
      const double h = s / n;
      double acc = fn_(0.0) + fn_(s);
      for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * fn_(i * h);
      return acc * h / 3.0;
    }
  }
  return 0.0;
}

double Reaction::min_over_x(double s) const {
  if (s > upper_state_ || s < lower_state_) return extension(s);
  if (!x_dependent_) return eval_core(Vec2{}, s);
  // cubic family: s(1-s) >= 0 on [0,1], so f is monotone in a(x)
  const double a_hi = a_mid_ + std::abs(a_amp_);
  const double a_lo = a_mid_ - std::abs(a_amp_);
  const double prod = s * (1.0 - s);
  return prod >= 0 ? cubic_eval(s, a_hi) : cubic_eval(s, a_lo);
}

double Reaction::max_over_x(double s) const {
  if (s > upper_state_ || s < lower_state_) return extension(s);
  if (!x_dependent_) return eval_core(Vec2{}, s);
  const double a_hi = a_mid_ + std::abs(a_amp_);
  const double a_lo = a_mid_ - std::abs(a_amp_);
  const double prod = s * (1.0 - s);
  return prod >= 0 ? cubic_eval(s, a_lo) : cubic_eval(s, a_hi);
}

std::vector<double> Reaction::make_cell_params(const std::vector<Vec2>& xs) const {
  std::vector<double> out;
  if (impl_ != Impl::XdepCubic) return out;
  out.reserve(xs.size());
  for (const Vec2& x : xs) {
    out.push_back(a_mid_ + a_amp_ * std::cos(2.0 * std::numbers::pi * x.x / period_x_) *
                               std::cos(2.0 * std::numbers::pi * x.y / period_y_));
  }
  return out;
}

void Reaction::accumulate_rates(const std::vector<double>& param, const double* u, double* out,
                                std::size_t n, double scale) const {
  const double lo = lower_state_, hi = upper_state_, lip = lipschitz_;
  switch (impl_) {
    case Impl::HomCubic: {
      const double a = a_mid_;
      for (std::size_t i = 0; i < n; ++i) {
        const double s = u[i];
        double f;
        if (s > hi) f = -lip * (s - hi);
        else if (s < lo) f = -lip * (s - lo);
        else f = s * (1.0 - s) * (s - a);
        out[i] += scale * f;
      }
      break;
    }
    case Impl::XdepCubic: {
      for (std::size_t i = 0; i < n; ++i) {
        const double s = u[i];
        double f;
        if (s > hi) f = -lip * (s - hi);
        else if (s < lo) f = -lip * (s - lo);
        else f = s * (1.0 - s) * (s - param[i]);
        out[i] += scale * f;
      }
      break;
    }
    case Impl::HomPiecewiseLinear: {
      for (std::size_t i = 0; i < n; ++i) {
        const double s = u[i];
        double f;
        if (s > hi) f = -lip * (s - hi);
        else if (s < lo) f = -lip * (s - lo);
        else f = pl_eval(s);
        out[i] += scale * f;
      }
      break;
    }
    case Impl::Custom: {
      for (std::size_t i = 0; i < n; ++i) {
        const double s = u[i];
        double f;
        if (s > hi) f = -lip * (s - hi);
        else if (s < lo) f = -lip * (s - lo);
        else f = fn_(s);
        out[i] += scale * f;
      }
      break;
    }
  }
}

namespace {

// one scan+bisection pass at a fixed grid step
ThetaResult locate_theta(const Reaction& f, double h, double tol) {
  const int n = static_cast<int>(std::ceil(1.0 / h));
  int last_nonpos = -1;
  for (int i = 1; i * h < 1.0 && i <= n; ++i) {
    if (f.min_over_x(i * h) <= 0.0) last_nonpos = i;
  }
  if (last_nonpos < 0) return {0.0, false};

  double lo = last_nonpos * h;
  double hi = std::min((last_nonpos + 1) * h, 1.0 - 1e-12);
  if (f.min_over_x(hi) <= 0.0) return {hi, true};  // zero set touching s=1
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (f.min_over_x(mid) <= 0.0) lo = mid;
    else hi = mid;
  }
  return {0.5 * (lo + hi), true};
}

}  // namespace

ThetaResult compute_theta(const Reaction& f, double grid_step) {
  const double tol = grid_step * 1e-3;
  double h = grid_step;
  ThetaResult prev = locate_theta(f, h, tol);
  for (int pass = 0; pass < 6; ++pass) {
    h *= 0.5;
    ThetaResult next = locate_theta(f, h, tol);
    const double scale = std::max({std::abs(prev.theta), std::abs(next.theta), 0.01});
    if (std::abs(next.theta - prev.theta) <= 0.01 * scale &&
        next.interior_zero_found == prev.interior_zero_found)
      return next;
    prev = next;
  }
  return prev;
}

RectResult compute_R_grid(const Reaction& f, double s_step) {
  const int n = static_cast<int>(std::lround(1.0 / s_step));
  std::vector<double> s(n + 1), g(n + 1);
  for (int i = 0; i <= n; ++i) {
    s[i] = i * s_step;
    g[i] = f.min_over_x(std::min(s[i], 1.0));
  }
  // monotone stack: for each bar, the maximal span on which g >= g[bar]
  RectResult best;
  std::vector<int> stack;
  auto consider = [&](int bar, int left, int right) {
    if (g[bar] <= 0.0) return;
    const double area = (s[right] - s[left]) * g[bar];
    if (area > best.value) {
      best.value = area;
      best.K = s[left];
      best.H = s[right];
    }
  };
  for (int i = 0; i <= n + 1; ++i) {
    const double gi = (i <= n) ? g[i] : -1e300;
    while (!stack.empty() && g[stack.back()] > gi) {
      const int bar = stack.back();
      stack.pop_back();
      const int left = stack.empty() ? 0 : stack.back() + 1;
      consider(bar, left, std::min(i - 1, n));
    }
    if (i <= n) {
      // equal heights: keep only one representative, widest span wins anyway
      if (!stack.empty() && g[stack.back()] == gi) stack.back() = i;
      else stack.push_back(i);
    }
  }
  return best;
}

RectResult compute_R(const Reaction& f, double s_step) {
  double h = s_step;
  RectResult prev = compute_R_grid(f, h);
  for (int pass = 0; pass < 6; ++pass) {
    h *= 0.5;
    RectResult next = compute_R_grid(f, h);
    if (std::abs(next.value - prev.value) <= 0.01 * std::max(next.value, 1e-12)) return next;
    prev = next;
  }
  return prev;
}

double check_mean_positive(const Reaction& f, const DomainMask& mask) {
  const int ns = 200;
  double total = 0.0;
  const double cell_area = mask.cell_area();
  for (int c : mask.inside_cells()) {
    const Vec2 x = mask.cell_center(c);
    double acc = 0.0;
    for (int k = 0; k < ns; ++k) acc += f(x, (k + 0.5) / ns);
    total += acc / ns * cell_area;
  }
  return total;
}

EnvelopeScalars envelope_scalars(const Reaction& f, const DomainMask& mask) {
  EnvelopeScalars out;
  out.theta = compute_theta(f).theta;
  out.mean_F = check_mean_positive(f, mask);
  out.R_of_f = compute_R(f).value;

  out.F_gap_ok = true;
  const auto& cells = mask.inside_cells();
  const std::size_t stride = std::max<std::size_t>(1, cells.size() / 512);
  for (std::size_t ci = 0; ci < cells.size() && out.F_gap_ok; ci += stride) {
    const Vec2 x = mask.cell_center(cells[ci]);
    const double F1 = f.primitive(x, 1.0);
    for (int k = 0; k < 500; ++k) {
      const double s = k / 500.0;
      if (f.primitive(x, s) >= F1) {
        out.F_gap_ok = false;
        break;
      }
    }
  }
  return out;
}

namespace {

double windowed_min(const Reaction& f, double a, double b, int samples) {
  double m = 1e300;
  for (int k = 0; k <= samples; ++k) m = std::min(m, f.min_over_x(a + (b - a) * k / samples));
  return m;
}

}  // namespace

Reaction make_combustion_minorant(const Reaction& f, double eps, double mu) {
  const double th = compute_theta(f).theta;
  if (th + eps >= 1.0 - 1e-6) throw EpsTooLarge("theta + eps >= 1");
  if (eps <= 0.0) throw EpsTooLarge("eps must be positive");

  const double s0 = th + eps;
  const double s_star = 1.0 - std::min(0.05, 0.25 * (1.0 - s0));
  const int m = 96;
  const double hn = (s_star - s0) / m;

  std::vector<double> s = {0.0, s0};
  std::vector<double> v = {0.0, 0.0};
  for (int i = 1; i < m; ++i) {
    const double si = s0 + i * hn;
    const double w = windowed_min(f, si - hn, si + hn, 32) / (1.0 + mu);
    s.push_back(si);
    v.push_back(std::max(0.0, w));
  }
  // linear tail to 0 at s=1, kept under g by the worst sampled ratio g/(1-s)
  double c_tail = 1e300;
  for (int k = 0; k <= 512; ++k) {
    const double sigma = s_star + (1.0 - 1e-6 - s_star) * k / 512.0;
    c_tail = std::min(c_tail, f.min_over_x(sigma) / (1.0 - sigma));
  }
  c_tail = std::max(0.0, c_tail) / (1.0 + mu);
  const double w_star = windowed_min(f, s_star - hn, s_star, 32) / (1.0 + mu);
  s.push_back(s_star);
  v.push_back(std::max(0.0, std::min(w_star, c_tail * (1.0 - s_star))));
  s.push_back(1.0);
  v.push_back(0.0);

  Reaction r = Reaction::piecewise_linear(std::move(s), std::move(v), ReactionKind::Combustion);
  r.theta_param_ = s0;
  return r;
}

Reaction make_shifted_bistable_minorant(const Reaction& f, double mu) {
  const double th = compute_theta(f).theta;
  if (!(mu > 0.0 && mu < 1.0 - th)) throw EpsTooLarge("mu must lie in (0, 1-theta)");

  std::vector<double> s, v;
  const double delta0 = 0.1 * mu;
  const auto dip = [&](double t) {
    return delta0 * std::max(0.0, (t + mu) * (th - t)) * 4.0 / sq(th + mu);
  };
  // negative branch on [-mu, th]; f is read as 0 left of s=0
  const int nn = 48;
  for (int i = 0; i <= nn; ++i) {
    const double t = -mu + (th + mu) * i / nn;
    const double base = (t <= 0.0) ? 0.0 : std::min(0.0, f.min_over_x(t));
    s.push_back(t);
    v.push_back((i == 0 || i == nn) ? 0.0 : base - dip(t));
  }
  // positive cap on (th, 1-mu), windowed min of g/(1+mu)
  const double hi = 1.0 - mu;
  const int np = 96;
  const double hn = (hi - th) / np;
  for (int i = 1; i < np; ++i) {
    const double t = th + i * hn;
    const double w = windowed_min(f, std::max(th, t - hn), std::min(hi, t + hn), 32) / (1.0 + mu);
    s.push_back(t);
    v.push_back(std::max(0.0, w));
  }
  s.push_back(hi);
  v.push_back(0.0);

  Reaction r = Reaction::piecewise_linear(std::move(s), std::move(v), ReactionKind::Bistable);
  r.theta_param_ = th;

  // still positively unbalanced between the shifted states
  const double integral = r.primitive(hi) - r.primitive(-mu);
  if (integral <= 0.0)
    throw Error("make_shifted_bistable_minorant: lost unbalancedness, decrease mu");
  return r;
}

OdeTrajectory ode_envelope(const Reaction& f, double z0, double t_end, EnvelopeSide side,
                           int n_steps) {
  const auto rhs = [&](double z) {
    return side == EnvelopeSide::Min ? f.min_over_x(z) : f.max_over_x(z);
  };
  OdeTrajectory out;
  out.times.reserve(n_steps + 1);
  out.values.reserve(n_steps + 1);
  const double dt = t_end / n_steps;
  double z = z0;
  out.times.push_back(0.0);
  out.values.push_back(z);
  for (int i = 0; i < n_steps; ++i) {
    const double k1 = rhs(z);
    const double k2 = rhs(z + 0.5 * dt * k1);
    const double k3 = rhs(z + 0.5 * dt * k2);
    const double k4 = rhs(z + dt * k3);
    z += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    out.times.push_back((i + 1) * dt);
    out.values.push_back(z);
  }
  return out;
}

}  // namespace perifront
