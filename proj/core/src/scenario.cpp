#include "perifront/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "perifront/io.hpp"

namespace perifront {

namespace {

using nlohmann::json;

int scaled_resolution(int base, double mult) {
  return std::max(8, static_cast<int>(std::lround(base * mult)));
}

double snap_up(double v, int res) { return std::ceil(v * res - 1e-9) / res; }

ProbeSpec box_min_probe(const std::string& name, Vec2 center, double half_x, double half_y) {
  ProbeSpec p;
  p.kind = ProbeSpec::Kind::BoxMin;
  p.box = {center.x - half_x, center.x + half_x, center.y - half_y, center.y + half_y};
  p.name = name;
  return p;
}

ProbeSpec region_sup_probe(const std::string& name, const Box& box) {
  ProbeSpec p;
  p.kind = ProbeSpec::Kind::RegionSup;
  p.box = box;
  p.name = name;
  return p;
}

ProbeSpec level_probe(const std::string& name, double level, Vec2 dir) {
  ProbeSpec p;
  p.kind = ProbeSpec::Kind::LevelPos;
  p.level = level;
  p.dir = dir;
  p.name = name;
  return p;
}

ProbeSpec sup_probe() {
  ProbeSpec p;
  p.kind = ProbeSpec::Kind::GlobalMax;
  p.name = "sup";
  return p;
}

void apply_solver_opts(Scenario& s, const ScenarioOptions& opts, double default_horizon,
                       double default_dt, Scheme default_scheme) {
  s.solver.t_end = opts.horizon > 0 ? opts.horizon : default_horizon;
  s.solver.dt = opts.dt > 0 ? opts.dt : default_dt;
  s.solver.scheme = opts.scheme.value_or(default_scheme);
  s.solver.record_every =
      opts.record_every > 0 ? opts.record_every : s.solver.t_end / 200.0;
  s.solver.snapshot_every = opts.snapshot_every;
  s.seed = opts.seed;
}

double estimate_front_speed(const Reaction& f) {
  try {
    const double c = front_profile_1d(f, 1e-4).c;
    return std::max(c, 0.02);
  } catch (const NoFront&) {
    return 0.05;
  }
}

}  // namespace

ScenarioResult run_scenario(const Scenario& s) {
  ScenarioResult out;
  out.trajectory = run(s.u0, s.mask, s.coeff, s.reaction, s.solver, s.probes);
  out.verdict = classify(out.trajectory, s.compact_probes, s.classify_params);
  return out;
}

bool verdict_matches(VerdictKind expected, const Verdict& got) {
  if (expected == VerdictKind::Persistence)
    return got.persistent &&
           (got.kind == VerdictKind::Persistence || got.kind == VerdictKind::Invasion ||
            got.kind == VerdictKind::OrientedInvasion);
  return got.kind == expected;
}

Scenario scenario_omega1(const StarHole& star, double L, const Reaction& f,
                         const ScenarioOptions& opts) {
  Scenario s;
  s.name = "omega1";
  s.reaction = f;
  const int res = scaled_resolution(8, opts.resolution_mult);

  const double theta = compute_theta(f).theta;
  const double eta = theta + 0.5 * (1.0 - theta);
  const double R_b = find_min_R(f, eta, 1.0);
  if (L <= 0) L = 2.0 * star.diameter() + 2.0 * R_b + 1.0;
  L = snap_up(L, res);

  StarHole local = star;
  for (Vec2& v : local.vertices) v = v - star.center + Vec2{0.5 * L, 0.5 * L};
  local.center = {0.5 * L, 0.5 * L};

  PeriodSpec spec;
  spec.dim = 2;
  spec.L1 = spec.L2 = L;
  spec.resolution = res;
  const int w1 = 7, w2 = 3;
  s.mask = build_lattice_domain(local, spec, w1, w2);
  s.coeff = Coefficients::identity(s.mask);

  const RadialSolution uR = solve_radial_dirichlet(f, R_b, 2, 20000);
  const Vec2 z{3.0 * L, 1.0 * L};  // a lattice corner, far from all holes
  s.u0 = inject_radial(s.mask, uR, z);

  s.probes = {sup_probe(), box_min_probe("c0", z, 1.0, 1.0),
              box_min_probe("c1", z + Vec2{L, 0}, 1.0, 1.0),
              box_min_probe("c2", z + Vec2{2.0 * L, L}, 1.0, 1.0),
              level_probe("level_right", 0.5, {1, 0})};
  s.compact_probes = {"c0", "c1", "c2"};
  s.expected = VerdictKind::Invasion;

  const double c0 = estimate_front_speed(f);
  apply_solver_opts(s, opts, 2.5 * L / c0 * 1.3 + 40.0, 0.05, Scheme::IMEXDiffusion);
  std::ostringstream d;
  d << "star lattice, L=" << L << ", R=" << R_b << ", eta=" << eta;
  s.description = d.str();
  return s;
}

Scenario scenario_blocking(double aperture, const Reaction& f, const ScenarioOptions& opts,
                           double wall, double chamber) {
  Scenario s;
  s.name = "blocking";
  s.reaction = f;
  const int res = scaled_resolution(16, opts.resolution_mult);
  const double L = snap_up(chamber, res);

  PeriodSpec spec;
  spec.dim = 2;
  spec.L1 = spec.L2 = L;
  spec.resolution = res;
  s.mask = build_lattice_domain(NarrowNeckSpec{wall, aperture}, spec, 4, 1);
  s.coeff = Coefficients::identity(s.mask);

  // fill the second chamber to height 1; walls sit at x = kL + L/2
  const double lo = 1.5 * L + 0.5 * wall, hi = 2.5 * L - 0.5 * wall;
  s.u0 = Field::zeros(s.mask);
  const double h = s.mask.h();
  for (int c : s.mask.inside_cells()) {
    const Vec2 x = s.mask.cell_center(c);
    if (x.x > lo && x.x < hi)
      s.u0.u[static_cast<std::size_t>(c)] =
          std::clamp(std::min(x.x - lo, hi - x.x) / h, 0.0, 1.0);
  }

  const Vec2 src{2.0 * L, 0.5 * L};
  const Vec2 right{3.0 * L, 0.5 * L};
  s.probes = {sup_probe(), box_min_probe("c_src", src, 1.0, 1.0),
              box_min_probe("c_right", right, 1.0, 1.0),
              level_probe("level_right", 0.5, {1, 0})};
  s.compact_probes = {"c_src", "c_right"};
  s.classify_params.eps_inv = 0.01;
  s.classify_params.delta_blk = 0.02;
  s.classify_params.persistence_probes = {"c_src"};

  apply_solver_opts(s, opts, 400.0, 0.05, Scheme::IMEXDiffusion);
  std::ostringstream d;
  d << "narrow-neck lattice, chamber=" << L << ", wall=" << wall << ", aperture=" << aperture;
  s.description = d.str();
  return s;
}

Scenario scenario_cylinder(double neck_eps, double L, const Reaction& f,
                           const ScenarioOptions& opts, bool mirrored) {
  Scenario s;
  s.name = "cylinder";
  s.reaction = f;
  const int res = scaled_resolution(12, opts.resolution_mult);
  L = snap_up(L, res);

  SawtoothSpec saw;
  saw.neck = neck_eps;
  saw.L = L;
  saw.mirrored = mirrored;
  const int periods = 10;
  s.mask = build_sawtooth_cylinder(saw, res, periods, {-2, 0}, EdgeMode::Reflecting);
  s.coeff = Coefficients::identity(s.mask);

  const double inv_sign = mirrored ? -1.0 : 1.0;
  const double theta = compute_theta(f).theta;
  const double eta = std::max(0.9, theta + 0.5 * (1.0 - theta));
  const double R_b = find_min_R(f, eta, 2.0);
  const RadialSolution uR = solve_radial_dirichlet(f, R_b, 2, 20000);
  const Vec2 z{0.5 * L, 0.0};
  s.u0 = inject_radial(s.mask, uR, z);

  // mirrored runs swap the invasion and blocking sides
  const double x_left = -2.0 * L, x_right = (periods - 2) * L;
  Box blocked_region, guard_inv, guard_blk;
  Vec2 dir{inv_sign, 0};
  if (!mirrored) {
    blocked_region = {x_left, -1.0, -3.0, 3.0};
    guard_inv = {x_right - 2.0 * L, x_right, -3.0, 3.0};
    guard_blk = {x_left, x_left + 1.5 * L, -3.0, 3.0};
  } else {
    blocked_region = {L + 1.0, x_right, -3.0, 3.0};
    guard_inv = {x_left, x_left + 2.0 * L, -3.0, 3.0};
    guard_blk = {x_right - 1.5 * L, x_right, -3.0, 3.0};
  }
  s.probes = {sup_probe(),
              box_min_probe("c0", z, 1.0, 0.5),
              box_min_probe("c1", z + Vec2{inv_sign * 2.0 * L, 0}, 1.0, 0.5),
              box_min_probe("c2", z + Vec2{inv_sign * 4.0 * L, 0}, 1.0, 0.5),
              level_probe("level_right", 0.5, dir),
              region_sup_probe("left_sup", blocked_region),
              region_sup_probe("guard_inv", guard_inv)};
  s.compact_probes = {"c0", "c1", "c2"};
  s.classify_params.oriented = true;
  s.classify_params.delta_blk = 0.1;
  s.classify_params.edge_guard_probes = {"guard_inv"};
  s.expected = VerdictKind::OrientedInvasion;

  const double c0 = estimate_front_speed(f);
  apply_solver_opts(s, opts, 6.0 * L / (0.4 * c0), 0.05, Scheme::IMEXDiffusion);
  std::ostringstream d;
  d << "sawtooth cylinder, L=" << L << ", neck=" << neck_eps << (mirrored ? ", mirrored" : "");
  s.description = d.str();
  return s;
}

Scenario scenario_omega3(const Omega3Spec& spec3, const Reaction& f,
                         const ScenarioOptions& opts) {
  spec3.validate();
  Scenario s;
  s.name = "omega3";
  s.reaction = f;
  const int res = scaled_resolution(8, opts.resolution_mult);

  // snap kappa to the half-cell lattice so both periods are grid-aligned
  Omega3Spec g = spec3;
  g.kappa = std::ceil(spec3.kappa * 2.0 * res) / (2.0 * res);
  const double L1 = g.L1(), L2 = g.L2();

  const int w1 = 8;
  s.mask = build_omega3(g, res, w1, 2, {-1, -1});
  s.coeff = Coefficients::identity(s.mask);

  const double theta = compute_theta(f).theta;
  const double eta = theta + 0.6 * (1.0 - theta);
  const double R_d = find_min_R(f, eta, 1.0);
  const RadialSolution uR = solve_radial_dirichlet(f, R_d, 2, 20000);
  const Vec2 z{2.0 * R_d, 0.0};
  s.u0 = inject_radial(s.mask, uR, z);

  const double x_left = -L1, x_right = (w1 - 1) * L1;
  s.probes = {sup_probe(),
              box_min_probe("c0", z, 1.0, 0.4),
              box_min_probe("c1", z + Vec2{L1, 0}, 1.0, 0.4),
              box_min_probe("c2", z + Vec2{2.0 * L1, 0}, 1.0, 0.4),
              box_min_probe("c_up", z + Vec2{L1, L2}, 1.0, 0.4),
              box_min_probe("cmin", {z.x + 0.5 * L1, 0.0}, 0.5 * L1, 0.5 * L2),
              level_probe("level_right", 0.5, {1, 0}),
              region_sup_probe("left_sup", {x_left, -1.0, -L2, L2}),
              region_sup_probe("guard_inv", {x_right - 2.0 * L1, x_right, -L2, L2})};
  s.compact_probes = {"c0", "c1", "c2"};
  s.classify_params.oriented = true;
  s.classify_params.delta_blk = 0.1;
  s.classify_params.edge_guard_probes = {"guard_inv"};
  s.expected = VerdictKind::OrientedInvasion;

  const double c0 = estimate_front_speed(f);
  apply_solver_opts(s, opts, 4.0 * L1 / (0.3 * c0), 0.05, Scheme::IMEXDiffusion);
  std::ostringstream d;
  d << "pennant lattice, eps=" << g.eps << ", kappa=" << g.kappa << ", R=" << g.R
    << ", L1=" << L1 << ", L2=" << L2 << ", datum radius=" << R_d;
  s.description = d.str();
  return s;
}

Scenario scenario_speed_bound(const Reaction& f, const SpeedBoundSetup& setup,
                              const ScenarioOptions& opts) {
  Scenario s;
  s.name = "speed_bound";
  s.reaction = f;
  const int res = scaled_resolution(8, opts.resolution_mult);

  PeriodSpec spec;
  spec.dim = 2;
  spec.L1 = spec.L2 = 1.0;
  spec.resolution = res;
  const int W = static_cast<int>(std::lround(setup.extent));
  s.mask = build_lattice_domain(NoHole{}, spec, W, W);

  if (setup.lambda == setup.Lambda) {
    s.coeff = Coefficients::isotropic(s.mask, setup.lambda);
  } else {
    s.coeff = Coefficients::diagonal(
        s.mask, [&](Vec2) { return setup.Lambda; }, [&](Vec2) { return setup.lambda; });
  }
  const Vec2 center{0.5 * W, 0.5 * W};
  if (setup.q_inward != 0.0) {
    const double q0 = setup.q_inward;
    s.coeff.set_drift(
        s.mask,
        [&](Vec2 x) {
          const Vec2 d = x - center;
          const double r = d.norm();
          if (r < 0.5) return 0.0;
          const double ramp = std::min(1.0, 2.0 * (r - 0.5));
          return -q0 * ramp * d.x / r;
        },
        [&](Vec2 x) {
          const Vec2 d = x - center;
          const double r = d.norm();
          if (r < 0.5) return 0.0;
          const double ramp = std::min(1.0, 2.0 * (r - 0.5));
          return -q0 * ramp * d.y / r;
        });
  }

  s.u0 = make_bump(s.mask, center, 4.0, 0.9);

  s.probes = {sup_probe(), box_min_probe("c0", center, 1.0, 1.0)};
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  const Vec2 dirs[8] = {{1, 0}, {inv_sqrt2, inv_sqrt2}, {0, 1}, {-inv_sqrt2, inv_sqrt2},
                        {-1, 0}, {-inv_sqrt2, -inv_sqrt2}, {0, -1}, {inv_sqrt2, -inv_sqrt2}};
  for (int k = 0; k < 8; ++k)
    s.probes.push_back(level_probe("dir" + std::to_string(k), 0.5, dirs[k]));
  s.compact_probes = {"c0"};
  s.expected = VerdictKind::Invasion;

  const WStar w = w_star(f, setup.lambda, setup.Lambda, -setup.q_inward);
  const double w_est = std::max(w.value, 0.08);
  const double radius_max = 0.5 * W - 3.0;
  apply_solver_opts(s, opts, (radius_max - 5.0) / w_est, 0.0, Scheme::ExplicitEuler);
  std::ostringstream d;
  d << "free-space spreading, extent=" << W << ", lambda=" << setup.lambda
    << ", Lambda=" << setup.Lambda << ", q_inward=" << setup.q_inward
    << ", w_star=" << w.value;
  s.description = d.str();
  return s;
}

Scenario scenario_persistence(const Reaction& f, const HoleSpec& hole, double period,
                              const ScenarioOptions& opts) {
  Scenario s;
  s.name = "persistence";
  s.reaction = f;
  const int res = scaled_resolution(16, opts.resolution_mult);
  period = snap_up(period, res);

  const double theta = compute_theta(f).theta;
  const double eta = theta + 0.5 * (1.0 - theta);
  const double R_b = find_min_R(f, eta, 1.0);
  const int W = std::max(3, static_cast<int>(std::ceil((2.0 * R_b + 6.0) / period)));

  PeriodSpec spec;
  spec.dim = 2;
  spec.L1 = spec.L2 = period;
  spec.resolution = res;
  s.mask = build_lattice_domain(hole, spec, W, W);
  s.coeff = Coefficients::identity(s.mask);

  const RadialSolution uR = solve_radial_dirichlet(f, R_b, 2, 20000);
  const Vec2 center{0.5 * W * period, 0.5 * W * period};
  s.u0 = inject_radial(s.mask, uR, center);

  s.probes = {sup_probe(), box_min_probe("c0", center, 1.0, 1.0),
              box_min_probe("c1", center + Vec2{period, period}, 0.4 * period, 0.4 * period)};
  s.compact_probes = {"c0", "c1"};
  s.expected = VerdictKind::Persistence;

  apply_solver_opts(s, opts, 250.0, 0.05, Scheme::IMEXDiffusion);
  std::ostringstream d;
  d << "perforated persistence, period=" << period << ", window=" << W << ", R=" << R_b;
  s.description = d.str();
  return s;
}

Scenario scenario_front1d(const Reaction& f, double length, double dx,
                          const ScenarioOptions& opts) {
  Scenario s;
  s.name = "front1d";
  s.reaction = f;
  const int res = std::max(8, static_cast<int>(std::lround(opts.resolution_mult / dx)));
  const int periods = static_cast<int>(std::lround(length));
  s.mask = build_line_domain(1.0, res, periods, EdgeMode::Reflecting);
  s.coeff = Coefficients::identity(s.mask);
  s.u0 = make_front_like(s.mask, {1, 0}, 10.0, 4.0);

  s.probes = {sup_probe(), box_min_probe("c0", {2.0, 0.0}, 1.5, 1.0),
              level_probe("level_right", 0.5, {1, 0}),
              region_sup_probe("guard_right", {length - 2.0, length, -1.0, 1.0})};
  s.compact_probes = {"c0"};
  s.classify_params.edge_guard_probes = {"guard_right"};
  s.expected = VerdictKind::Invasion;

  apply_solver_opts(s, opts, 200.0, 0.02, Scheme::IMEXDiffusion);
  std::ostringstream d;
  d << "1d front, length=" << length << ", dx=" << dx;
  s.description = d.str();
  return s;
}

void write_run_artifacts(const Scenario& s, const ScenarioResult& r, const std::string& out_dir,
                         const std::string& config_text) {
  ensure_directory(out_dir);
  const std::string hash = content_hash_hex(config_text);

  json verdict;
  verdict["kind"] = to_string(r.verdict.kind);
  verdict["persistent"] = r.verdict.persistent;
  verdict["sup_tail"] = r.verdict.sup_tail;
  verdict["compact_min_tail"] = r.verdict.compact_min_tail;
  if (r.verdict.speed_right) {
    verdict["speed_right"] = *r.verdict.speed_right;
    verdict["r2_right"] = r.verdict.r2_right;
  }
  if (r.verdict.speed_left) {
    verdict["speed_left"] = *r.verdict.speed_left;
    verdict["r2_left"] = r.verdict.r2_left;
  }
  verdict["drift"] = r.verdict.drift;
  verdict["note"] = r.verdict.note;
  verdict["thresholds"] = {{"eps_inv", s.classify_params.eps_inv},
                           {"delta_blk", s.classify_params.delta_blk},
                           {"pers_floor", s.classify_params.pers_floor},
                           {"drift_tol", s.classify_params.drift_tol}};
  write_text_file(out_dir + "/verdict.json", verdict.dump(2) + "\n");

  write_trajectory_csv(out_dir + "/probes.csv", r.trajectory);

  json snaps = json::array();
  if (!r.trajectory.snapshots.empty()) {
    ensure_directory(out_dir + "/snapshots");
    for (std::size_t k = 0; k < r.trajectory.snapshots.size(); ++k) {
      char name[32];
      std::snprintf(name, sizeof name, "%03zu.pgm", k);
      write_snapshot_pgm(out_dir + "/snapshots/" + name, s.mask, r.trajectory.snapshots[k]);
      snaps.push_back({{"file", std::string("snapshots/") + name},
                       {"time", r.trajectory.snapshot_times[k]}});
    }
    write_text_file(out_dir + "/snapshots/index.json", snaps.dump(2) + "\n");
  }

  json manifest;
  manifest["config_hash"] = hash;
  manifest["version"] = kVersion;
  manifest["scenario"] = s.name;
  manifest["description"] = s.description;
  manifest["seed"] = s.seed;
  manifest["verdict"] = to_string(r.verdict.kind);
  manifest["outputs"] = {"verdict.json", "probes.csv"};
  if (!r.trajectory.snapshots.empty()) manifest["outputs"].push_back("snapshots/");
  write_text_file(out_dir + "/manifest.json", manifest.dump(2) + "\n");
}

}  // namespace perifront
