#include "perifront/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace perifront {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double cell_or(const std::vector<double>& v, int c, double fallback) {
  return v.empty() ? fallback : v[static_cast<std::size_t>(c)];
}

}  // namespace

Coefficients Coefficients::isotropic(const DomainMask& mask, double a) {
  Coefficients c;
  c.a11.assign(mask.n_cells(), a);
  c.a22.assign(mask.n_cells(), a);
  c.lambda = c.Lambda = a;
  return c;
}

Coefficients Coefficients::diagonal(const DomainMask& mask, std::function<double(Vec2)> a11,
                                    std::function<double(Vec2)> a22) {
  Coefficients c;
  c.a11.resize(mask.n_cells());
  c.a22.resize(mask.n_cells());
  double lo = 1e300, hi = 0.0;
  for (std::size_t i = 0; i < mask.n_cells(); ++i) {
    const Vec2 x = mask.cell_center(static_cast<int>(i));
    c.a11[i] = a11(x);
    c.a22[i] = a22(x);
    lo = std::min({lo, c.a11[i], c.a22[i]});
    hi = std::max({hi, c.a11[i], c.a22[i]});
  }
  c.lambda = lo;
  c.Lambda = hi;
  return c;
}

void Coefficients::set_drift(const DomainMask& mask, std::function<double(Vec2)> q1f,
                             std::function<double(Vec2)> q2f) {
  q1.resize(mask.n_cells());
  q2.resize(mask.n_cells());
  for (std::size_t i = 0; i < mask.n_cells(); ++i) {
    const Vec2 x = mask.cell_center(static_cast<int>(i));
    q1[i] = q1f(x);
    q2[i] = q2f(x);
  }
}

void Coefficients::validate(const DomainMask& mask) const {
  for (int c : mask.inside_cells()) {
    const double m11 = cell_or(a11, c, 1.0);
    const double m22 = cell_or(a22, c, 1.0);
    const double m12 = cell_or(a12, c, 0.0);
    const double mean = 0.5 * (m11 + m22);
    const double rad = std::sqrt(sq(0.5 * (m11 - m22)) + sq(m12));
    if (mean - rad < lambda - 1e-12 || mean + rad > Lambda + 1e-12)
      throw Error("Coefficients: eigenvalues leave [lambda, Lambda]");
  }
}

Coefficients::DriftFlags Coefficients::check_drift_type1(const DomainMask& mask) const {
  DriftFlags flags;
  if (q1.empty()) return flags;
  const double h = mask.h();
  double mean1 = 0.0, mean2 = 0.0;
  int n = 0;
  for (int c : mask.inside_cells()) {
    mean1 += q1[static_cast<std::size_t>(c)];
    mean2 += q2[static_cast<std::size_t>(c)];
    ++n;
    double div = 0.0;
    const int e = mask.neighbor(c, 0), w = mask.neighbor(c, 1);
    const int nn = mask.neighbor(c, 2), ss = mask.neighbor(c, 3);
    if (e >= 0 && w >= 0)
      div += (q1[static_cast<std::size_t>(e)] - q1[static_cast<std::size_t>(w)]) / (2 * h);
    if (nn >= 0 && ss >= 0)
      div += (q2[static_cast<std::size_t>(nn)] - q2[static_cast<std::size_t>(ss)]) / (2 * h);
    if (std::abs(div) > 1e-6 * std::max(1.0, max_drift())) flags.divergence_free = false;
  }
  if (n > 0 && (std::abs(mean1 / n) > 1e-9 || std::abs(mean2 / n) > 1e-9))
    flags.zero_cell_mean = false;
  for (const auto& face : mask.boundary_faces()) {
    if (face.kind != FaceKind::Hole) continue;
    const double qn = q1[static_cast<std::size_t>(face.cell)] * face.normal.x +
                      q2[static_cast<std::size_t>(face.cell)] * face.normal.y;
    if (std::abs(qn) > 1e-9) flags.tangential_on_boundary = false;
  }
  return flags;
}

double Coefficients::max_drift() const {
  double m = 0.0;
  for (std::size_t i = 0; i < q1.size(); ++i)
    m = std::max(m, std::hypot(q1[i], q2.empty() ? 0.0 : q2[i]));
  return m;
}

Field Field::zeros(const DomainMask& mask) {
  Field f;
  f.u.assign(mask.n_cells(), 0.0);
  return f;
}

double explicit_cfl_dt(const DomainMask& mask, const Coefficients& coeff, double cfl_safety) {
  const double h = mask.h();
  const double denom = 2.0 * mask.dim() * coeff.Lambda + coeff.max_drift() * h;
  return cfl_safety * h * h / denom;
}

double auto_dt(const DomainMask& mask, const Coefficients& coeff, const Reaction& f,
               Scheme scheme, double cfl_safety) {
  const double reaction_cap = 0.9 / std::max(f.lipschitz(), 1e-12);
  if (scheme == Scheme::ExplicitEuler)
    return std::min(explicit_cfl_dt(mask, coeff, cfl_safety), reaction_cap);
  const double h = mask.h();
  const double drift_cap =
      coeff.max_drift() > 0 ? cfl_safety * h / coeff.max_drift() : 1e300;
  return std::min(reaction_cap, drift_cap);
}

namespace {

struct StepWorkspace {
  std::vector<double> rate;
  std::vector<double> params;
  std::vector<Vec2> centers;
  std::vector<double> diag;            // IMEX jacobi preconditioner
  std::vector<double> r, p, Ap, zv;    // CG scratch
  const DomainMask* mask = nullptr;
  const Coefficients* coeff = nullptr;
  double dt_cached = -1.0;
};

thread_local StepWorkspace tls_ws;

void ensure_workspace(StepWorkspace& ws, const DomainMask& mask, const Coefficients& coeff,
                      const Reaction& f) {
  if (ws.mask == &mask && ws.coeff == &coeff) return;
  ws.mask = &mask;
  ws.coeff = &coeff;
  ws.dt_cached = -1.0;
  ws.rate.assign(mask.n_cells(), 0.0);
  ws.centers.resize(mask.n_cells());
  for (std::size_t i = 0; i < mask.n_cells(); ++i) ws.centers[i] = mask.cell_center(static_cast<int>(i));
  ws.params = f.make_cell_params(ws.centers);
}

// diffusion part: out[c] = sum over faces of a_face (u_n - u_c) / h^2
void apply_diffusion(const DomainMask& mask, const Coefficients& coeff,
                     const std::vector<double>& u, std::vector<double>& out) {
  const double inv_h2 = 1.0 / sq(mask.h());
  const auto& a11 = coeff.a11;
  const auto& a22 = coeff.a22;
  for (int c : mask.inside_cells()) {
    const std::size_t ci = static_cast<std::size_t>(c);
    const double uc = u[ci];
    double acc = 0.0;
    const int e = mask.neighbor(c, 0), w = mask.neighbor(c, 1);
    if (e >= 0) acc += 0.5 * (a11[ci] + a11[static_cast<std::size_t>(e)]) * (u[static_cast<std::size_t>(e)] - uc);
    if (w >= 0) acc += 0.5 * (a11[ci] + a11[static_cast<std::size_t>(w)]) * (u[static_cast<std::size_t>(w)] - uc);
    if (mask.dim() == 2) {
      const int n = mask.neighbor(c, 2), s = mask.neighbor(c, 3);
      if (n >= 0) acc += 0.5 * (a22[ci] + a22[static_cast<std::size_t>(n)]) * (u[static_cast<std::size_t>(n)] - uc);
      if (s >= 0) acc += 0.5 * (a22[ci] + a22[static_cast<std::size_t>(s)]) * (u[static_cast<std::size_t>(s)] - uc);
    }
    out[ci] = acc * inv_h2;
  }
}

// optional symmetric cross-difference terms for offdiagonal A
void apply_offdiag(const DomainMask& mask, const Coefficients& coeff,
                   const std::vector<double>& u, std::vector<double>& out) {
  if (!coeff.offdiag_enabled || coeff.a12.empty()) return;
  const double inv4h2 = 1.0 / (4.0 * sq(mask.h()));
  for (int c : mask.inside_cells()) {
    const int e = mask.neighbor(c, 0), w = mask.neighbor(c, 1);
    const int n = mask.neighbor(c, 2), s = mask.neighbor(c, 3);
    if (e < 0 || w < 0 || n < 0 || s < 0) continue;  // one-sided near boundary: drop
    const int ne = mask.neighbor(e, 2), se = mask.neighbor(e, 3);
    const int nw = mask.neighbor(w, 2), sw = mask.neighbor(w, 3);
    if (ne < 0 || se < 0 || nw < 0 || sw < 0) continue;
    const double a = coeff.a12[static_cast<std::size_t>(c)];
    const double cross = u[static_cast<std::size_t>(ne)] - u[static_cast<std::size_t>(se)] -
                         u[static_cast<std::size_t>(nw)] + u[static_cast<std::size_t>(sw)];
    out[static_cast<std::size_t>(c)] += 2.0 * a * cross * inv4h2;
  }
}

void apply_drift(const DomainMask& mask, const Coefficients& coeff, const std::vector<double>& u,
                 std::vector<double>& out) {
  if (coeff.q1.empty()) return;
  const double inv_h = 1.0 / mask.h();
  for (int c : mask.inside_cells()) {
    const std::size_t ci = static_cast<std::size_t>(c);
    const double uc = u[ci];
    double acc = 0.0;
    const double qx = coeff.q1[ci];
    if (qx > 0) {  // forward difference keeps the update monotone
      const int e = mask.neighbor(c, 0);
      if (e >= 0) acc += qx * (u[static_cast<std::size_t>(e)] - uc) * inv_h;
    } else if (qx < 0) {
      const int w = mask.neighbor(c, 1);
      if (w >= 0) acc += qx * (uc - u[static_cast<std::size_t>(w)]) * inv_h;
    }
    if (mask.dim() == 2 && !coeff.q2.empty()) {
      const double qy = coeff.q2[ci];
      if (qy > 0) {
        const int n = mask.neighbor(c, 2);
        if (n >= 0) acc += qy * (u[static_cast<std::size_t>(n)] - uc) * inv_h;
      } else if (qy < 0) {
        const int s = mask.neighbor(c, 3);
        if (s >= 0) acc += qy * (uc - u[static_cast<std::size_t>(s)]) * inv_h;
      }
    }
    out[ci] += acc;
  }
}

// CG for (I - dt Ldiff) x = b, SPD for the symmetric face-coefficient stencil
void imex_solve(StepWorkspace& ws, const DomainMask& mask, const Coefficients& coeff, double dt,
                const std::vector<double>& b, std::vector<double>& x) {
  const std::size_t n = mask.n_cells();
  if (ws.diag.size() != n || ws.dt_cached != dt) {
    ws.dt_cached = dt;
    ws.diag.assign(n, 1.0);
    const double inv_h2 = 1.0 / sq(mask.h());
    for (int c : mask.inside_cells()) {
      const std::size_t ci = static_cast<std::size_t>(c);
      double d = 0.0;
      for (int dir = 0; dir < 4; ++dir) {
        const int nb = mask.neighbor(c, dir);
        if (nb < 0) continue;
        const auto& a = dir < 2 ? coeff.a11 : coeff.a22;
        d += 0.5 * (a[ci] + a[static_cast<std::size_t>(nb)]);
      }
      ws.diag[ci] = 1.0 + dt * d * inv_h2;
    }
  }
  ws.r.assign(n, 0.0);
  ws.p.assign(n, 0.0);
  ws.Ap.assign(n, 0.0);
  ws.zv.assign(n, 0.0);

  const auto apply_A = [&](const std::vector<double>& v, std::vector<double>& out) {
    apply_diffusion(mask, coeff, v, out);
    for (int c : mask.inside_cells()) {
      const std::size_t ci = static_cast<std::size_t>(c);
      out[ci] = v[ci] - dt * out[ci];
    }
  };

  // x0 = b is an excellent starting guess for small dt
  x = b;
  apply_A(x, ws.Ap);
  double bnorm2 = 0.0;
  for (int c : mask.inside_cells()) {
    const std::size_t ci = static_cast<std::size_t>(c);
    ws.r[ci] = b[ci] - ws.Ap[ci];
    bnorm2 += sq(b[ci]);
  }
  const double tol2 = sq(1e-10) * std::max(bnorm2, 1e-30);
  double rz = 0.0;
  for (int c : mask.inside_cells()) {
    const std::size_t ci = static_cast<std::size_t>(c);
    ws.zv[ci] = ws.r[ci] / ws.diag[ci];
    rz += ws.r[ci] * ws.zv[ci];
  }
  ws.p = ws.zv;
  for (int it = 0; it < 2000; ++it) {
    double rnorm2 = 0.0;
    for (int c : mask.inside_cells()) rnorm2 += sq(ws.r[static_cast<std::size_t>(c)]);
    if (rnorm2 <= tol2) return;
    apply_A(ws.p, ws.Ap);
    double pAp = 0.0;
    for (int c : mask.inside_cells()) {
      const std::size_t ci = static_cast<std::size_t>(c);
      pAp += ws.p[ci] * ws.Ap[ci];
    }
    const double alpha = rz / pAp;
    for (int c : mask.inside_cells()) {
      const std::size_t ci = static_cast<std::size_t>(c);
      x[ci] += alpha * ws.p[ci];
      ws.r[ci] -= alpha * ws.Ap[ci];
    }
    double rz_new = 0.0;
    for (int c : mask.inside_cells()) {
      const std::size_t ci = static_cast<std::size_t>(c);
      ws.zv[ci] = ws.r[ci] / ws.diag[ci];
      rz_new += ws.r[ci] * ws.zv[ci];
    }
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int c : mask.inside_cells()) {
      const std::size_t ci = static_cast<std::size_t>(c);
      ws.p[ci] = ws.zv[ci] + beta * ws.p[ci];
    }
  }
  throw NotConverged("IMEX diffusion solve: CG did not converge");
}

}  // namespace

void step(Field& field, const DomainMask& mask, const Coefficients& coeff, const Reaction& f,
          double dt, Scheme scheme) {
  StepWorkspace& ws = tls_ws;
  ensure_workspace(ws, mask, coeff, f);

  if (scheme == Scheme::ExplicitEuler) {
    const double cfl = explicit_cfl_dt(mask, coeff, 0.9);
    if (dt > cfl * (1.0 + 1e-9))
      throw CflViolation("explicit step dt exceeds the CFL bound");
    apply_diffusion(mask, coeff, field.u, ws.rate);
    apply_offdiag(mask, coeff, field.u, ws.rate);
    apply_drift(mask, coeff, field.u, ws.rate);
    f.accumulate_rates(ws.params, field.u.data(), ws.rate.data(), field.u.size(), 1.0);
    for (int c : mask.inside_cells()) {
      const std::size_t ci = static_cast<std::size_t>(c);
      field.u[ci] += dt * ws.rate[ci];
      ws.rate[ci] = 0.0;
    }
  } else {
    // b = u + dt (drift(u) + f(u)); then (I - dt Ldiff) u_new = b
    std::fill(ws.rate.begin(), ws.rate.end(), 0.0);
    apply_offdiag(mask, coeff, field.u, ws.rate);
    apply_drift(mask, coeff, field.u, ws.rate);
    f.accumulate_rates(ws.params, field.u.data(), ws.rate.data(), field.u.size(), 1.0);
    std::vector<double> b = field.u;
    for (int c : mask.inside_cells()) {
      const std::size_t ci = static_cast<std::size_t>(c);
      b[ci] += dt * ws.rate[ci];
      ws.rate[ci] = 0.0;
    }
    imex_solve(ws, mask, coeff, dt, b, field.u);
  }
  field.time += dt;
}

int Trajectory::probe_index(const std::string& name) const {
  for (std::size_t i = 0; i < probes.size(); ++i)
    if (probes[i].name == name) return static_cast<int>(i);
  return -1;
}

const std::vector<double>& Trajectory::probe(const std::string& name) const {
  const int i = probe_index(name);
  if (i < 0) throw Error("unknown probe: " + name);
  return series[static_cast<std::size_t>(i)];
}

double field_max(const DomainMask& mask, const std::vector<double>& u) {
  double m = -1e300;
  for (int c : mask.inside_cells()) m = std::max(m, u[static_cast<std::size_t>(c)]);
  return m;
}

double field_min(const DomainMask& mask, const std::vector<double>& u) {
  double m = 1e300;
  for (int c : mask.inside_cells()) m = std::min(m, u[static_cast<std::size_t>(c)]);
  return m;
}

double field_mass(const DomainMask& mask, const std::vector<double>& u) {
  double m = 0.0;
  for (int c : mask.inside_cells()) m += u[static_cast<std::size_t>(c)];
  return m * mask.cell_area();
}

double box_extremum(const DomainMask& mask, const std::vector<double>& u, const Box& box,
                    bool minimum) {
  double m = minimum ? 1e300 : -1e300;
  bool any = false;
  for (int c : mask.inside_cells()) {
    if (!box.contains(mask.cell_center(c))) continue;
    any = true;
    const double v = u[static_cast<std::size_t>(c)];
    m = minimum ? std::min(m, v) : std::max(m, v);
  }
  return any ? m : kNaN;
}

std::optional<double> level_position(const DomainMask& mask, const std::vector<double>& u,
                                     double level, const Vec2& dir) {
  // rightmost cell at or above the level, refined by interpolation toward the
  // first neighbor below it along the dominant axis of `dir`
  double best = -1e300;
  bool any = false;
  const int axis_dir = std::abs(dir.x) >= std::abs(dir.y) ? (dir.x >= 0 ? 0 : 1)
                                                          : (dir.y >= 0 ? 2 : 3);
  const double h = mask.h();
  for (int c : mask.inside_cells()) {
    const std::size_t ci = static_cast<std::size_t>(c);
    if (u[ci] < level) continue;
    any = true;
    double pos = mask.cell_center(c).dot(dir);
    const int nb = mask.neighbor(c, axis_dir);
    if (nb >= 0 && u[static_cast<std::size_t>(nb)] < level) {
      const double t = (u[ci] - level) / (u[ci] - u[static_cast<std::size_t>(nb)]);
      pos += t * h * std::abs(axis_dir < 2 ? dir.x : dir.y);
    }
    best = std::max(best, pos);
  }
  if (!any) return std::nullopt;
  return best;
}

namespace {

double eval_probe(const ProbeSpec& p, const DomainMask& mask, const std::vector<double>& u) {
  switch (p.kind) {
    case ProbeSpec::Kind::GlobalMax: return field_max(mask, u);
    case ProbeSpec::Kind::GlobalMin: return field_min(mask, u);
    case ProbeSpec::Kind::BoxMin: return box_extremum(mask, u, p.box, true);
    case ProbeSpec::Kind::BoxMax: return box_extremum(mask, u, p.box, false);
    case ProbeSpec::Kind::RegionSup: return box_extremum(mask, u, p.box, false);
    case ProbeSpec::Kind::Mass: return field_mass(mask, u);
    case ProbeSpec::Kind::LevelPos: {
      const auto pos = level_position(mask, u, p.level, p.dir);
      return pos ? *pos : kNaN;
    }
  }
  return kNaN;
}

}  // namespace

Trajectory run(Field u0, const DomainMask& mask, const Coefficients& coeff, const Reaction& f,
               const SolverConfig& cfg, const std::vector<ProbeSpec>& probes) {
  Trajectory traj;
  traj.probes = probes;
  traj.series.resize(probes.size());
  traj.horizon = cfg.t_end;

  double dt = cfg.dt > 0 ? cfg.dt : auto_dt(mask, coeff, f, cfg.scheme, cfg.cfl_safety);
  if (cfg.scheme == Scheme::ExplicitEuler) {
    const double cap = explicit_cfl_dt(mask, coeff, cfg.cfl_safety);
    if (dt > cap) throw CflViolation("requested dt exceeds the explicit CFL bound");
  }
  const long n_steps = std::max(1L, static_cast<long>(std::ceil(cfg.t_end / dt - 1e-9)));
  dt = cfg.t_end / static_cast<double>(n_steps);

  const long record_stride =
      std::max(1L, static_cast<long>(std::llround(cfg.record_every / dt)));
  const long snapshot_stride =
      cfg.snapshot_every > 0 ? std::max(1L, static_cast<long>(std::llround(cfg.snapshot_every / dt)))
                             : 0;

  const auto record = [&](const Field& fld) {
    traj.times.push_back(fld.time);
    for (std::size_t p = 0; p < probes.size(); ++p)
      traj.series[p].push_back(eval_probe(probes[p], mask, fld.u));
  };

  record(u0);
  if (snapshot_stride > 0) {
    traj.snapshot_times.push_back(u0.time);
    traj.snapshots.push_back(u0.u);
  }

  for (long k = 1; k <= n_steps; ++k) {
    step(u0, mask, coeff, f, dt, cfg.scheme);
    if (k % record_stride == 0 || k == n_steps) {
      for (int c : mask.inside_cells())
        if (!std::isfinite(u0.u[static_cast<std::size_t>(c)]))
          throw NonFiniteValue("solution lost finiteness at t=" + std::to_string(u0.time));
      record(u0);
    }
    if (snapshot_stride > 0 && (k % snapshot_stride == 0 || k == n_steps)) {
      traj.snapshot_times.push_back(u0.time);
      traj.snapshots.push_back(u0.u);
    }
  }
  return traj;
}

Field make_front_like(const DomainMask& mask, const Vec2& e, double shift, double width) {
  Field f = Field::zeros(mask);
  constexpr double pi = 3.14159265358979323846;
  for (int c : mask.inside_cells()) {
    const double s = mask.cell_center(c).dot(e) - shift;
    double v;
    if (width <= mask.h() * 1e-9) {
      v = s <= 0 ? 1.0 : 0.0;
    } else if (s <= -0.5 * width) {
      v = 1.0;
    } else if (s >= 0.5 * width) {
      v = 0.0;
    } else {
      v = 0.5 * (1.0 - std::sin(pi * s / width));
    }
    f.u[static_cast<std::size_t>(c)] = v;
  }
  return f;
}

Field make_bump(const DomainMask& mask, const Vec2& center, double radius, double height) {
  Field f = Field::zeros(mask);
  const double h = mask.h();
  for (int c : mask.inside_cells()) {
    const double d = (mask.cell_center(c) - center).norm();
    f.u[static_cast<std::size_t>(c)] = height * std::clamp((radius - d) / h, 0.0, 1.0);
  }
  return f;
}

}  // namespace perifront
