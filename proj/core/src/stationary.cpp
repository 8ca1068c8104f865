#include "perifront/stationary.hpp"

#include <algorithm>
#include <cmath>

namespace perifront {

namespace {

struct ShootOutcome {
  bool touchdown = false;
  double radius = 0.0;  // touchdown radius when touchdown
};

// integrate u'' + (dim-1)/r u' + f(u) = 0 from u(0)=alpha, u'(0)=0
ShootOutcome shoot(const Reaction& f, double alpha, double R, int dim, double hr,
                   std::vector<double>* store = nullptr) {
  const auto rhs = [&](double r, double u, double w, double& du, double& dw) {
    du = w;
    if (r < 1e-14) dw = -f(u) / dim;
    else dw = -(dim - 1) / r * w - f(u);
  };
  double u = alpha, w = 0.0, r = 0.0;
  if (store) store->push_back(u);
  while (r < R - 0.5 * hr) {
    double k1u, k1w, k2u, k2w, k3u, k3w, k4u, k4w;
    rhs(r, u, w, k1u, k1w);
    rhs(r + 0.5 * hr, u + 0.5 * hr * k1u, w + 0.5 * hr * k1w, k2u, k2w);
    rhs(r + 0.5 * hr, u + 0.5 * hr * k2u, w + 0.5 * hr * k2w, k3u, k3w);
    rhs(r + hr, u + hr * k3u, w + hr * k3w, k4u, k4w);
    const double un = u + hr / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
    const double wn = w + hr / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w);
    r += hr;
    if (un <= 0.0) {
      const double t = u / (u - un);  // linear crossing estimate
      if (store) store->push_back(0.0);
      return {true, r - hr + t * hr};
    }
    if (wn > 1e-12 && un < 0.95 * alpha) return {false, r};  // turned back up
    u = un;
    w = wn;
    if (store) store->push_back(u);
  }
  return {false, R};
}

}  // namespace

double RadialSolution::eval(double radius) const {
  if (radius >= R || u.empty()) return 0.0;
  if (radius <= 0) return u.front();
  const double hr = R / (static_cast<double>(u.size()) - 1);
  const double t = radius / hr;
  const std::size_t k = std::min(static_cast<std::size_t>(t), u.size() - 2);
  const double frac = t - static_cast<double>(k);
  return u[k] * (1.0 - frac) + u[k + 1] * frac;
}

double RadialSolution::ode_residual(const Reaction& f) const {
  // interior nodes only: the last two sit on the zero-padding junction at
  // the rim, where centered differences are meaningless
  const double hr = R / (static_cast<double>(u.size()) - 1);
  double worst = 0.0;
  for (std::size_t k = 1; k + 3 < u.size(); ++k) {
    const double rr = k * hr;
    const double upp = (u[k - 1] - 2 * u[k] + u[k + 1]) / (hr * hr);
    const double up = (u[k + 1] - u[k - 1]) / (2 * hr);
    worst = std::max(worst, std::abs(upp + (dim - 1) / rr * up + f(u[k])));
  }
  return worst;
}

RadialSolution solve_radial_dirichlet(const Reaction& f, double R, int dim, int n_grid) {
  const double theta = compute_theta(f).theta;
  const double hr = R / n_grid;

  // bracket: alpha_hi close to 1 must fail to touch down, alpha_lo must touch.
  // large radii need u(0) exponentially close to 1, so walk the gap down.
  double alpha_hi = 1.0 - 1e-9;
  while (shoot(f, alpha_hi, R, dim, hr).touchdown) {
    const double gap = 1.0 - alpha_hi;
    if (gap <= 4e-16)
      throw NoPositiveSolution("R too large: u(0) would sit within round-off of 1");
    alpha_hi = 1.0 - gap / 16.0;
  }
  double alpha_lo = -1.0;
  const int scan = 96;
  for (int k = scan - 1; k >= 1; --k) {
    const double a = theta + (1.0 - 1e-6 - theta) * k / scan;
    if (shoot(f, a, R, dim, hr).touchdown) {
      alpha_lo = a;
      break;
    }
  }
  if (alpha_lo < 0)
    throw NoPositiveSolution("no touchdown for any u(0) in (theta,1): R below threshold");

  for (int it = 0; it < 90; ++it) {
    const double mid = 0.5 * (alpha_lo + alpha_hi);
    if (mid == alpha_lo || mid == alpha_hi) break;
    if (shoot(f, mid, R, dim, hr).touchdown) alpha_lo = mid;
    else alpha_hi = mid;
  }

  RadialSolution out;
  out.R = R;
  out.dim = dim;
  out.u.reserve(n_grid + 1);
  const ShootOutcome oc = shoot(f, alpha_lo, R, dim, hr, &out.u);
  if (!oc.touchdown || oc.radius < R - std::max(1e-8, 1e-8 * R) * 10)
    throw NoPositiveSolution("shooting did not pin the touchdown at R");
  out.u.resize(n_grid + 1, 0.0);
  out.u.back() = 0.0;
  out.r.resize(n_grid + 1);
  for (int k = 0; k <= n_grid; ++k) out.r[static_cast<std::size_t>(k)] = k * hr;
  out.center_value = out.M_prime = out.u.front();
  out.M = R > 1.0 ? out.eval(1.0) : 0.0;

  for (std::size_t k = 0; k + 1 < out.u.size(); ++k)
    if (out.u[k + 1] > out.u[k] + 1e-12)
      throw NoPositiveSolution("radial profile is not decreasing");
  return out;
}

double find_min_R(const Reaction& f, double eta, double r, int dim, double rel_tol) {
  const auto passes = [&](double R) {
    try {
      const RadialSolution s = solve_radial_dirichlet(f, R, dim, 20000);
      return s.eval(r) > eta;
    } catch (const NoPositiveSolution&) {
      return false;
    }
  };
  double hi = std::max(2.0 * r, 4.0);
  while (!passes(hi)) {
    hi *= 2.0;
    if (hi > 4096.0) throw NoPositiveSolution("find_min_R: no admissible radius up to 4096");
  }
  double lo = 0.5 * hi;
  while (lo > r && passes(lo)) {
    hi = lo;
    lo *= 0.5;
  }
  while (hi - lo > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (passes(mid)) hi = mid;
    else lo = mid;
  }
  return hi;
}

BallEvolution evolve_ball_dirichlet(const RadialSolution& uR, const Reaction& f, double R_prime,
                                    double t_end, int n_grid, int n_records) {
  if (R_prime <= uR.R) throw Error("evolve_ball_dirichlet: requires R' > R");
  const int dim = uR.dim;
  const double hr = R_prime / n_grid;
  const int m = n_grid;  // nodes 0..m, v[m]=0 Dirichlet

  BallEvolution out;
  out.r.resize(m + 1);
  for (int k = 0; k <= m; ++k) out.r[static_cast<std::size_t>(k)] = k * hr;

  std::vector<double> v(m + 1);
  for (int k = 0; k <= m; ++k) v[static_cast<std::size_t>(k)] = uR.eval(k * hr);
  v[static_cast<std::size_t>(m)] = 0.0;

  const double dt = std::min({0.9 / std::max(f.lipschitz(), 1e-12), t_end / 400.0, 0.05});
  const long n_steps = std::max(1L, static_cast<long>(std::ceil(t_end / dt)));
  const long rec_stride = std::max(1L, n_steps / std::max(1, n_records));

  // tridiagonal rows of (I - dt Lrad)
  std::vector<double> dl(m), dd(m), du(m);  // unknowns 0..m-1
  for (int k = 0; k < m; ++k) {
    if (k == 0) {
      const double b = 2.0 * dim / (hr * hr);
      dd[0] = 1.0 + dt * b;
      du[0] = -dt * b;
      dl[0] = 0.0;
    } else {
      const double a = 1.0 / (hr * hr) - (dim - 1) / (2.0 * k * hr * hr);
      const double b = 1.0 / (hr * hr) + (dim - 1) / (2.0 * k * hr * hr);
      dl[static_cast<std::size_t>(k)] = -dt * a;
      dd[static_cast<std::size_t>(k)] = 1.0 + dt * (a + b);
      du[static_cast<std::size_t>(k)] = -dt * b;
    }
  }

  std::vector<double> rhs(m), cp(m), dp(m);
  const auto record = [&](double t) {
    out.times.push_back(t);
    out.profiles.push_back(v);
  };
  record(0.0);
  for (long s = 1; s <= n_steps; ++s) {
    for (int k = 0; k < m; ++k)
      rhs[static_cast<std::size_t>(k)] = v[static_cast<std::size_t>(k)] + dt * f(v[static_cast<std::size_t>(k)]);
    // v[m] = 0 enters the last row implicitly (du term drops)
    cp[0] = du[0] / dd[0];
    dp[0] = rhs[0] / dd[0];
    for (int k = 1; k < m; ++k) {
      const double denom = dd[static_cast<std::size_t>(k)] - dl[static_cast<std::size_t>(k)] * cp[static_cast<std::size_t>(k) - 1];
      cp[static_cast<std::size_t>(k)] = du[static_cast<std::size_t>(k)] / denom;
      dp[static_cast<std::size_t>(k)] = (rhs[static_cast<std::size_t>(k)] - dl[static_cast<std::size_t>(k)] * dp[static_cast<std::size_t>(k) - 1]) / denom;
    }
    v[static_cast<std::size_t>(m) - 1] = dp[static_cast<std::size_t>(m) - 1];
    for (int k = m - 2; k >= 0; --k)
      v[static_cast<std::size_t>(k)] = dp[static_cast<std::size_t>(k)] - cp[static_cast<std::size_t>(k)] * v[static_cast<std::size_t>(k) + 1];
    if (s % rec_stride == 0 || s == n_steps) record(s * dt);
  }

  double inner = 1e300;
  for (int k = 0; k <= m; ++k)
    if (k * hr <= R_prime - uR.R) inner = std::min(inner, v[static_cast<std::size_t>(k)]);
  out.min_inner_final = inner;
  out.exceeded_M_prime = inner > uR.M_prime;
  return out;
}

double energy(const DomainMask& mask, const std::vector<double>& u, const Coefficients& A,
              const Reaction& f) {
  const double area = mask.cell_area();
  const double grad_scale = mask.dim() == 1 ? 1.0 / mask.h() : 1.0;
  double e = 0.0;
  for (int c : mask.inside_cells()) {
    const std::size_t ci = static_cast<std::size_t>(c);
    // +x and +y faces only, so every interior face is counted once
    const int east = mask.neighbor(c, 0);
    if (east >= 0) {
      const double af = 0.5 * (A.a11[ci] + A.a11[static_cast<std::size_t>(east)]);
      e += 0.5 * af * sq(u[static_cast<std::size_t>(east)] - u[ci]) * grad_scale;
    }
    if (mask.dim() == 2) {
      const int north = mask.neighbor(c, 2);
      if (north >= 0) {
        const double af = 0.5 * (A.a22[ci] + A.a22[static_cast<std::size_t>(north)]);
        e += 0.5 * af * sq(u[static_cast<std::size_t>(north)] - u[ci]) * grad_scale;
      }
    }
    e -= f.primitive(mask.cell_center(c), u[ci]) * area;
  }
  return e;
}

Field collar_profile(const DomainMask& mask, double r, Vec2 center) {
  Field out = Field::zeros(mask);
  for (int c : mask.inside_cells()) {
    const double d = (mask.cell_center(c) - center).norm();
    out.u[static_cast<std::size_t>(c)] = std::clamp(r - d, 0.0, 1.0);
  }
  return out;
}

namespace {

struct EnergyProblem {
  const DomainMask& mask;
  const Coefficients& A;
  const Reaction& f;
  std::vector<int> free_cells;  // inside cells within B_r(center)

  double value(const std::vector<double>& u) const { return energy(mask, u, A, f); }

  // dE/du_c = sum faces a_f (u_c - u_n) - f(x_c,u_c) |cell|
  void gradient(const std::vector<double>& u, std::vector<double>& g) const {
    std::fill(g.begin(), g.end(), 0.0);
    const double area = mask.cell_area();
    const double grad_scale = mask.dim() == 1 ? 1.0 / mask.h() : 1.0;
    for (int c : free_cells) {
      const std::size_t ci = static_cast<std::size_t>(c);
      double acc = 0.0;
      for (int d = 0; d < (mask.dim() == 2 ? 4 : 2); ++d) {
        const int n = mask.neighbor(c, d);
        if (n < 0) continue;
        const auto& a = d < 2 ? A.a11 : A.a22;
        acc += 0.5 * (a[ci] + a[static_cast<std::size_t>(n)]) * (u[ci] - u[static_cast<std::size_t>(n)]) * grad_scale;
      }
      g[ci] = acc - f(mask.cell_center(c), u[ci]) * area;
    }
  }
};

struct DescentResult {
  std::vector<double> u;
  double energy = 0.0;
  bool converged = false;
  std::vector<double> history;
};

DescentResult projected_descent(const EnergyProblem& prob, std::vector<double> u, int iters) {
  const std::size_t n = u.size();
  std::vector<double> g(n), u_trial(n), u_prev(n), g_prev(n);
  double e = prob.value(u);
  DescentResult res;
  res.history.push_back(e);

  double step = 1.0;
  {  // initial step from the diagonal scale of the quadratic part
    double dmax = 1e-12;
    for (int c : prob.free_cells) {
      double d = 0.0;
      for (int dd = 0; dd < (prob.mask.dim() == 2 ? 4 : 2); ++dd)
        if (prob.mask.neighbor(c, dd) >= 0) d += prob.A.Lambda;
      dmax = std::max(dmax, d);
    }
    step = 1.0 / dmax;
  }

  prob.gradient(u, g);
  bool have_prev = false;
  for (int it = 0; it < iters; ++it) {
    double t = step;
    double e_new = e;
    for (int bt = 0; bt < 60; ++bt) {
      double decrease = 0.0;
      for (int c : prob.free_cells) {
        const std::size_t ci = static_cast<std::size_t>(c);
        u_trial[ci] = std::clamp(u[ci] - t * g[ci], 0.0, 1.0);
        decrease += g[ci] * (u[ci] - u_trial[ci]);
      }
      e_new = prob.value(u_trial);
      if (e_new <= e - 1e-4 * decrease + 1e-300) break;
      t *= 0.5;
    }
    const double rel_drop = (e - e_new) / std::max(std::abs(e), 1e-14);
    u_prev = u;
    g_prev = g;
    u.swap(u_trial);
    e = e_new;
    res.history.push_back(e);
    prob.gradient(u, g);

    // Barzilai-Borwein step for the next iteration
    double ss = 0.0, sy = 0.0;
    for (int c : prob.free_cells) {
      const std::size_t ci = static_cast<std::size_t>(c);
      const double s = u[ci] - u_prev[ci];
      const double y = g[ci] - g_prev[ci];
      ss += s * s;
      sy += s * y;
    }
    if (have_prev || true) {
      if (sy > 1e-30) step = std::clamp(ss / sy, 1e-10, 1e6);
    }
    have_prev = true;

    (void)rel_drop;
    // sustained-progress test: total relative decrease across a trailing window
    const std::size_t win = 25;
    if (res.history.size() > win) {
      const double before = res.history[res.history.size() - 1 - win];
      const double drop = (before - e) / std::max(std::abs(e), 1e-6);
      if (drop <= 1e-8) {
        res.converged = true;
        break;
      }
    }
  }
  res.u = std::move(u);
  res.energy = e;
  return res;
}

}  // namespace

EnergyReport minimize_energy(const DomainMask& mask, double r, const Coefficients& A,
                             const Reaction& f, int iters, Vec2 center, std::uint64_t seed) {
  EnergyProblem prob{mask, A, f, {}};
  for (int c : mask.inside_cells())
    if ((mask.cell_center(c) - center).norm() < r) prob.free_cells.push_back(c);
  if (prob.free_cells.empty()) throw Error("minimize_energy: ball contains no cells");

  std::vector<std::pair<std::string, std::vector<double>>> starts;
  starts.emplace_back("zero", std::vector<double>(mask.n_cells(), 0.0));
  {
    Field collar = collar_profile(mask, r, center);
    // restrict the collar to the free set
    std::vector<double> u(mask.n_cells(), 0.0);
    for (int c : prob.free_cells) u[static_cast<std::size_t>(c)] = collar.u[static_cast<std::size_t>(c)];
    starts.emplace_back("collar", std::move(u));
  }
  {
    Rng rng(seed);
    std::vector<double> u(mask.n_cells(), 0.0);
    for (int c : prob.free_cells) u[static_cast<std::size_t>(c)] = rng.uniform();
    starts.emplace_back("random", std::move(u));
  }

  EnergyReport report;
  report.r = r;
  bool best_set = false;
  bool all_converged = true;
  for (auto& [label, u0] : starts) {
    DescentResult res = projected_descent(prob, std::move(u0), iters);
    all_converged = all_converged && res.converged;
    report.basins.emplace_back(label, res.energy);
    if (!best_set || res.energy < report.energy_value) {
      best_set = true;
      report.energy_value = res.energy;
      report.minimizer.u = std::move(res.u);
      report.energy_history = std::move(res.history);
      report.converged = res.converged;
    }
  }
  if (!all_converged)
    throw NotConverged("minimize_energy: relative energy decrease above 1e-8 at iteration cap");
  report.max_value = field_max(mask, report.minimizer.u);
  return report;
}

double polish_stationary(const DomainMask& mask, Field& u, const Coefficients& A,
                         const Reaction& f, double r, Vec2 center, int max_sweeps) {
  std::vector<int> free_cells;
  for (int c : mask.inside_cells())
    if ((mask.cell_center(c) - center).norm() < r) free_cells.push_back(c);
  const double inv_h2 = 1.0 / sq(mask.h());
  const std::size_t n = mask.n_cells();

  // stationarity residual F = Lu + f(u) on the free set (zero Dirichlet rim)
  const auto residual = [&](const std::vector<double>& v, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (int c : free_cells) {
      const std::size_t ci = static_cast<std::size_t>(c);
      double acc = 0.0;
      for (int d = 0; d < (mask.dim() == 2 ? 4 : 2); ++d) {
        const int nb = mask.neighbor(c, d);
        if (nb < 0) continue;
        const auto& a = d < 2 ? A.a11 : A.a22;
        acc += 0.5 * (a[ci] + a[static_cast<std::size_t>(nb)]) *
               (v[static_cast<std::size_t>(nb)] - v[ci]) * inv_h2;
      }
      out[ci] = acc + f(mask.cell_center(c), v[ci]);
    }
  };
  const auto max_abs = [&](const std::vector<double>& v) {
    double m = 0.0;
    for (int c : free_cells) m = std::max(m, std::abs(v[static_cast<std::size_t>(c)]));
    return m;
  };

  std::vector<double> F(n), fp(n), diag(n), rhs(n), delta(n), cg_r(n), cg_p(n), cg_Ap(n),
      cg_z(n), trial(n);

  residual(u.u, F);
  double worst = max_abs(F);
  // damped Newton on the energy Hessian M = -L - f'(u), Jacobi-CG inner solves
  for (int newton = 0; newton < 40 && worst > 1e-13; ++newton) {
    for (int c : free_cells) {
      const std::size_t ci = static_cast<std::size_t>(c);
      const Vec2 x = mask.cell_center(c);
      fp[ci] = (f(x, u.u[ci] + 1e-7) - f(x, u.u[ci] - 1e-7)) / 2e-7;
      double d = 0.0;
      for (int dd = 0; dd < (mask.dim() == 2 ? 4 : 2); ++dd) {
        const int nb = mask.neighbor(c, dd);
        if (nb < 0) continue;
        const auto& a = dd < 2 ? A.a11 : A.a22;
        d += 0.5 * (a[ci] + a[static_cast<std::size_t>(nb)]) * inv_h2;
      }
      diag[ci] = std::max(d - fp[ci], 0.05 * d);
    }
    const auto apply_M = [&](const std::vector<double>& v, std::vector<double>& out) {
      std::fill(out.begin(), out.end(), 0.0);
      for (int c : free_cells) {
        const std::size_t ci = static_cast<std::size_t>(c);
        double acc = 0.0;
        for (int dd = 0; dd < (mask.dim() == 2 ? 4 : 2); ++dd) {
          const int nb = mask.neighbor(c, dd);
          if (nb < 0) continue;
          const auto& a = dd < 2 ? A.a11 : A.a22;
          acc += 0.5 * (a[ci] + a[static_cast<std::size_t>(nb)]) *
                 (v[ci] - v[static_cast<std::size_t>(nb)]) * inv_h2;
        }
        out[ci] = acc - fp[ci] * v[ci];
      }
    };
    // solve M delta = F, so u + delta removes the linearized residual
    std::fill(delta.begin(), delta.end(), 0.0);
    cg_r = F;
    double rz = 0.0;
    for (int c : free_cells) {
      const std::size_t ci = static_cast<std::size_t>(c);
      cg_z[ci] = cg_r[ci] / diag[ci];
      rz += cg_r[ci] * cg_z[ci];
    }
    cg_p = cg_z;
    const double f_norm2_0 = [&] {
      double s = 0.0;
      for (int c : free_cells) s += sq(F[static_cast<std::size_t>(c)]);
      return s;
    }();
    for (int it = 0; it < 800; ++it) {
      double rnorm2 = 0.0;
      for (int c : free_cells) rnorm2 += sq(cg_r[static_cast<std::size_t>(c)]);
      if (rnorm2 <= 1e-8 * f_norm2_0) break;
      apply_M(cg_p, cg_Ap);
      double pAp = 0.0;
      for (int c : free_cells) {
        const std::size_t ci = static_cast<std::size_t>(c);
        pAp += cg_p[ci] * cg_Ap[ci];
      }
      if (pAp <= 0.0) break;  // negative curvature: keep the partial step
      const double alpha = rz / pAp;
      for (int c : free_cells) {
        const std::size_t ci = static_cast<std::size_t>(c);
        delta[ci] += alpha * cg_p[ci];
        cg_r[ci] -= alpha * cg_Ap[ci];
      }
      double rz_new = 0.0;
      for (int c : free_cells) {
        const std::size_t ci = static_cast<std::size_t>(c);
        cg_z[ci] = cg_r[ci] / diag[ci];
        rz_new += cg_r[ci] * cg_z[ci];
      }
      const double beta = rz_new / rz;
      rz = rz_new;
      for (int c : free_cells) {
        const std::size_t ci = static_cast<std::size_t>(c);
        cg_p[ci] = cg_z[ci] + beta * cg_p[ci];
      }
    }
    // damping: accept the largest fraction of the step that reduces max|F|
    double t = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 30; ++bt) {
      trial = u.u;
      for (int c : free_cells) {
        const std::size_t ci = static_cast<std::size_t>(c);
        trial[ci] = std::clamp(trial[ci] + t * delta[ci], 0.0, 1.0);
      }
      residual(trial, rhs);
      const double w_new = max_abs(rhs);
      if (w_new < worst) {
        u.u = trial;
        F = rhs;
        worst = w_new;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;  // no descent direction left at this precision
    (void)max_sweeps;
  }
  return worst;
}

double FrontProfile::eval(double zz) const {
  if (phi.empty()) return 0.0;
  if (zz <= z.front()) return phi.front();
  if (zz >= z.back()) return phi.back();
  const double t = (zz - z.front()) / dz;
  const std::size_t k = std::min(static_cast<std::size_t>(t), phi.size() - 2);
  const double frac = t - static_cast<double>(k);
  return phi[k] * (1.0 - frac) + phi[k + 1] * frac;
}

double FrontProfile::eval_dphi(double zz) const {
  if (dphi.empty() || zz <= z.front() || zz >= z.back()) return 0.0;
  const double t = (zz - z.front()) / dz;
  const std::size_t k = std::min(static_cast<std::size_t>(t), dphi.size() - 2);
  const double frac = t - static_cast<double>(k);
  return dphi[k] * (1.0 - frac) + dphi[k + 1] * frac;
}

double FrontProfile::eval_ddphi(double zz) const {
  return -c * eval_dphi(zz) - f_used(eval(zz));
}

namespace {

enum class ShotKind { Overshoot, Undershoot };

ShotKind classify_front_shot(const Reaction& f, double c, double upper, double lower,
                             std::vector<double>* phi_out = nullptr,
                             std::vector<double>* dphi_out = nullptr, double dz = 5e-4) {
  const double span = upper - lower;
  const double delta = 0.5e-6 * span;
  const double fp = -f(upper - 1e-6 * span) / (1e-6 * span);  // f'(upper), negative
  const double lam = 0.5 * (-c + std::sqrt(c * c - 4.0 * std::min(fp, -1e-12)));
  double phi = upper - delta;
  double w = -lam * delta;
  const double z_max = 4000.0;
  const long n_max = static_cast<long>(z_max / dz);
  const auto rhs_w = [&](double p, double v) { return -c * v - f(p); };
  for (long k = 0; k < n_max; ++k) {
    if (phi_out) {
      phi_out->push_back(phi);
      dphi_out->push_back(w);
    }
    const double k1p = w, k1w = rhs_w(phi, w);
    const double k2p = w + 0.5 * dz * k1w, k2w = rhs_w(phi + 0.5 * dz * k1p, w + 0.5 * dz * k1w);
    const double k3p = w + 0.5 * dz * k2w, k3w = rhs_w(phi + 0.5 * dz * k2p, w + 0.5 * dz * k2w);
    const double k4p = w + dz * k3w, k4w = rhs_w(phi + dz * k3p, w + dz * k3w);
    phi += dz / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
    w += dz / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w);
    if (phi < lower - 0.02 * span) return ShotKind::Overshoot;
    if (w > 1e-12 * span && phi < upper - 0.1 * span) return ShotKind::Undershoot;
    if (std::abs(w) < 1e-12 * span && phi < upper - 0.1 * span) {
      // leveled off; the remaining drop for c>0 is w/c
      const double limit = c > 1e-12 ? phi + w / c : phi;
      return limit > lower + 0.02 * span ? ShotKind::Undershoot : ShotKind::Overshoot;
    }
  }
  return phi > lower + 0.5 * span * 0.02 ? ShotKind::Undershoot : ShotKind::Overshoot;
}

}  // namespace

FrontProfile front_profile_1d(const Reaction& f, double tol, double Lambda) {
  const double upper = f.upper_state();
  const double lower = f.lower_state();
  const double bound = 3.0 * std::sqrt(Lambda * std::max(f.lipschitz(), 1e-12));
  double c_lo = -bound, c_hi = bound;
  if (classify_front_shot(f, c_lo, upper, lower) != ShotKind::Overshoot ||
      classify_front_shot(f, c_hi, upper, lower) != ShotKind::Undershoot)
    throw NoFront("front speed bracket [-3 sqrt(Lambda Lip), +3 sqrt(Lambda Lip)] failed");

  while (c_hi - c_lo > tol) {
    const double mid = 0.5 * (c_lo + c_hi);
    if (classify_front_shot(f, mid, upper, lower) == ShotKind::Overshoot) c_lo = mid;
    else c_hi = mid;
  }

  FrontProfile out;
  out.c = 0.5 * (c_lo + c_hi);
  out.upper = upper;
  out.lower = lower;
  out.f_used = f;
  out.dz = 5e-4;
  // the overshoot side reaches the lower state at finite z
  classify_front_shot(f, c_lo, upper, lower, &out.phi, &out.dphi, out.dz);
  // trim past the crossing of the lower state and clamp the endpoint
  std::size_t cut = out.phi.size();
  for (std::size_t k = 0; k < out.phi.size(); ++k)
    if (out.phi[k] <= lower) {
      cut = k + 1;
      break;
    }
  out.phi.resize(cut);
  out.dphi.resize(cut);
  if (!out.phi.empty()) out.phi.back() = std::max(out.phi.back(), lower);

  // center z=0 at the mid-level crossing
  const double mid_level = 0.5 * (upper + lower);
  std::size_t k_mid = 0;
  for (std::size_t k = 0; k + 1 < out.phi.size(); ++k)
    if (out.phi[k] >= mid_level && out.phi[k + 1] < mid_level) {
      k_mid = k;
      break;
    }
  out.z.resize(out.phi.size());
  for (std::size_t k = 0; k < out.z.size(); ++k)
    out.z[k] = (static_cast<double>(k) - static_cast<double>(k_mid)) * out.dz;
  return out;
}

double ParaboloidSubsolution::value(double t, double x1, double x2) const {
  return front.eval(x1 + eta * x2 * x2 - c * t);
}

double ParaboloidSubsolution::worst_interior_residual(const Reaction& target, double x2_max,
                                                      int n_samples, double value_floor) const {
  const int nx2 = 64;
  const int nz = std::max(16, n_samples / nx2);
  double worst = -1e300;
  const double z0 = front.z.front(), z1 = front.z.back();
  for (int iz = 0; iz <= nz; ++iz) {
    const double zeta = z0 + (z1 - z0) * iz / nz;
    const double p = front.eval(zeta);
    if (p < value_floor) continue;
    const double dp = front.eval_dphi(zeta);
    const double fp = front.f_used(p);
    for (int ix = 0; ix <= nx2; ++ix) {
      const double x2 = -x2_max + 2.0 * x2_max * ix / nx2;
      const double fac = 1.0 + 4.0 * sq(eta) * sq(x2);
      // dt psi - Lap psi - target(psi), reduced through the profile equation
      const double res = (front.c * fac - c - 2.0 * eta) * dp + fac * fp - target(p);
      worst = std::max(worst, res);
    }
  }
  return worst;
}

double ParaboloidSubsolution::boundary_margin(double L, double upsilon_at_2) const {
  return 2.0 * eta * upsilon_at_2 - 2.0 / (L - 4.0);
}

ParaboloidSubsolution paraboloid_subsolution(const FrontProfile& front, double c, double eta) {
  if (c >= front.c) throw Error("paraboloid_subsolution: requires c below the front speed");
  ParaboloidSubsolution out;
  out.front = front;
  out.c = c;
  out.eta = eta;
  return out;
}

double paraboloid_eta(double c_front, double c, double mu, int dim) {
  return std::min((c_front - c) / (2.0 * (dim - 1)), std::sqrt(mu) / 4.0);
}

Field inject_radial(const DomainMask& mask, const RadialSolution& uR, Vec2 z) {
  Field out = Field::zeros(mask);
  for (int c : mask.inside_cells()) {
    const double d = (mask.cell_center(c) - z).norm();
    out.u[static_cast<std::size_t>(c)] = uR.eval(d);
  }
  return out;
}

}  // namespace perifront
