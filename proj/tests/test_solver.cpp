#include <doctest.h>

#include <cmath>
#include <numbers>

#include "perifront/geometry.hpp"
#include "perifront/reaction.hpp"
#include "perifront/solver.hpp"

using namespace perifront;

namespace {

Reaction zero_reaction() {
  return Reaction::custom([](double) { return 0.0; }, 1e-12, ReactionKind::Custom);
}

// discrete Fourier amplitude of the k=1 cosine mode on a 1D mask
double mode_amplitude(const DomainMask& mask, const std::vector<double>& u, double L) {
  double acc_c = 0.0, acc_s = 0.0;
  for (int c : mask.inside_cells()) {
    const double x = mask.cell_center(c).x;
    acc_c += u[static_cast<std::size_t>(c)] * std::cos(2.0 * std::numbers::pi * x / L);
    acc_s += u[static_cast<std::size_t>(c)] * std::sin(2.0 * std::numbers::pi * x / L);
  }
  const double n = static_cast<double>(mask.inside_cells().size());
  return 2.0 * std::hypot(acc_c, acc_s) / n;
}

double heat_mode_error(int res) {
  const double L = 1.0;
  const DomainMask mask = build_line_domain(L, res, 1);
  const Coefficients coeff = Coefficients::identity(mask);
  const Reaction f = zero_reaction();
  Field u = Field::zeros(mask);
  for (int c : mask.inside_cells())
    u.u[static_cast<std::size_t>(c)] =
        0.5 + 0.1 * std::cos(2.0 * std::numbers::pi * mask.cell_center(c).x / L);
  const double t_end = 0.1 * L * L;
  const double dt = explicit_cfl_dt(mask, coeff, 0.9);
  const long n = static_cast<long>(std::ceil(t_end / dt));
  const double dt_adj = t_end / static_cast<double>(n);
  for (long k = 0; k < n; ++k) step(u, mask, coeff, f, dt_adj);
  const double expected = 0.1 * std::exp(-sq(2.0 * std::numbers::pi / L) * t_end);
  return std::abs(mode_amplitude(mask, u.u, L) - expected);
}

DomainMask star_mask(int res = 8) {
  PeriodSpec spec;
  spec.dim = 2;
  spec.L1 = spec.L2 = 4.0;
  spec.resolution = res;
  return build_lattice_domain(StarHole::regular(5, 0.8, 0.4, {2.0, 2.0}), spec, 2, 2);
}

}  // namespace

TEST_CASE("constant states are exact steady states without reaction") {
  const DomainMask mask = star_mask();
  const Coefficients coeff = Coefficients::identity(mask);
  const Reaction f = zero_reaction();
  Field u = Field::zeros(mask);
  for (int c : mask.inside_cells()) u.u[static_cast<std::size_t>(c)] = 0.37;
  const Field before = u;
  for (int k = 0; k < 25; ++k) step(u, mask, coeff, f, explicit_cfl_dt(mask, coeff));
  for (int c : mask.inside_cells())
    CHECK(u.u[static_cast<std::size_t>(c)] == before.u[static_cast<std::size_t>(c)]);
}

TEST_CASE("heat mode decays at the exact Fourier rate within 1% at L/256") {
  const double expected = 0.1 * std::exp(-sq(2.0 * std::numbers::pi) * 0.1);
  CHECK(heat_mode_error(256) < 0.01 * expected);
}

TEST_CASE("heat mode error drops fourfold under mesh halving") {
  const double e1 = heat_mode_error(128);
  const double e2 = heat_mode_error(256);
  const double ratio = e1 / e2;
  CHECK(ratio > 3.5);
  CHECK(ratio < 4.5);
}

TEST_CASE("zero-flux scheme conserves mass on a perforated domain") {
  const DomainMask mask = star_mask();
  const Coefficients coeff = Coefficients::identity(mask);
  const Reaction f = zero_reaction();
  Rng rng(42);
  Field u = Field::zeros(mask);
  for (int c : mask.inside_cells()) u.u[static_cast<std::size_t>(c)] = rng.uniform();
  double mass = field_mass(mask, u.u);
  const double dt = explicit_cfl_dt(mask, coeff);
  for (int k = 0; k < 50; ++k) {
    step(u, mask, coeff, f, dt);
    const double next = field_mass(mask, u.u);
    CHECK(std::abs(next - mass) < 1e-10);
    mass = next;
  }
}

TEST_CASE("uniform equilibrium at theta stays put under the bistable flow") {
  const DomainMask mask = star_mask();
  const Coefficients coeff = Coefficients::identity(mask);
  const Reaction f = Reaction::cubic(0.3);
  Field u = Field::zeros(mask);
  for (int c : mask.inside_cells()) u.u[static_cast<std::size_t>(c)] = 0.3;
  SolverConfig cfg;
  cfg.t_end = 5.0;
  cfg.record_every = 1.0;
  ProbeSpec mx;
  mx.kind = ProbeSpec::Kind::GlobalMax;
  mx.name = "sup";
  ProbeSpec mn;
  mn.kind = ProbeSpec::Kind::GlobalMin;
  mn.name = "inf";
  const Trajectory tr = run(u, mask, coeff, f, cfg, {mx, mn});
  for (const double v : tr.probe("sup")) CHECK(v == doctest::Approx(0.3).epsilon(1e-9));
  for (const double v : tr.probe("inf")) CHECK(v == doctest::Approx(0.3).epsilon(1e-9));
}

TEST_CASE("front-like datum advances rightward in an unbalanced bistable medium") {
  const DomainMask mask = build_line_domain(1.0, 64, 60, EdgeMode::Reflecting);
  const Coefficients coeff = Coefficients::identity(mask);
  const Reaction f = Reaction::cubic(0.25);
  Field u0 = make_front_like(mask, {1, 0}, 10.0, 4.0);
  SolverConfig cfg;
  cfg.t_end = 40.0;
  cfg.dt = 0.02;
  cfg.scheme = Scheme::IMEXDiffusion;
  cfg.record_every = 5.0;
  ProbeSpec lv;
  lv.kind = ProbeSpec::Kind::LevelPos;
  lv.level = 0.5;
  lv.dir = {1, 0};
  lv.name = "level_right";
  const Trajectory tr = run(u0, mask, coeff, f, cfg, {lv});
  const auto& pos = tr.probe("level_right");
  for (std::size_t k = 1; k < pos.size(); ++k) CHECK(pos[k] > pos[k - 1] - 1e-9);
  CHECK(pos.back() > pos.front() + 8.0);
}

TEST_CASE("comparison principle holds for random ordered pairs, both schemes") {
  const DomainMask mask = star_mask();
  const Coefficients coeff = Coefficients::identity(mask);
  const Reaction f = Reaction::cubic(0.3);
  Rng rng(7);
  for (const Scheme scheme : {Scheme::ExplicitEuler, Scheme::IMEXDiffusion}) {
    for (int trial = 0; trial < 20; ++trial) {
      Field u = Field::zeros(mask), v = Field::zeros(mask);
      for (int c : mask.inside_cells()) {
        const double a = rng.uniform();
        u.u[static_cast<std::size_t>(c)] = a;
        v.u[static_cast<std::size_t>(c)] = std::min(1.0, a + 0.4 * rng.uniform());
      }
      const double dt =
          scheme == Scheme::ExplicitEuler ? explicit_cfl_dt(mask, coeff) : 0.05;
      for (int k = 0; k < 30; ++k) {
        step(u, mask, coeff, f, dt, scheme);
        step(v, mask, coeff, f, dt, scheme);
        for (int c : mask.inside_cells())
          CHECK(u.u[static_cast<std::size_t>(c)] <=
                v.u[static_cast<std::size_t>(c)] + 1e-12);
      }
    }
  }
}

TEST_CASE("solutions started in [0,1] stay in [-1e-12, 1+1e-12]") {
  const DomainMask mask = star_mask();
  const Coefficients coeff = Coefficients::identity(mask);
  const Reaction f = Reaction::cubic(0.25);
  Rng rng(11);
  Field u = Field::zeros(mask);
  for (int c : mask.inside_cells()) u.u[static_cast<std::size_t>(c)] = rng.uniform();
  const double dt = explicit_cfl_dt(mask, coeff);
  for (int k = 0; k < 400; ++k) {
    step(u, mask, coeff, f, dt);
    CHECK(field_min(mask, u.u) >= -1e-12);
    CHECK(field_max(mask, u.u) <= 1.0 + 1e-12);
  }
}

TEST_CASE("periodic data stay periodic under periodic coefficients") {
  const DomainMask mask = star_mask();
  const Coefficients coeff = Coefficients::identity(mask);
  const Reaction f = Reaction::cubic(0.3);
  Rng rng(13);
  // tile one random period across the window
  const int c1 = mask.cells_per_period(0), c2 = mask.cells_per_period(1);
  std::vector<double> tile(static_cast<std::size_t>(c1) * c2);
  for (double& v : tile) v = rng.uniform();
  Field u = Field::zeros(mask);
  for (int c : mask.inside_cells()) {
    const int j = c / mask.nx(), i = c - j * mask.nx();
    u.u[static_cast<std::size_t>(c)] = tile[static_cast<std::size_t>(j % c2) * c1 + i % c1];
  }
  const double dt = explicit_cfl_dt(mask, coeff);
  for (int k = 0; k < 200; ++k) step(u, mask, coeff, f, dt);
  for (int j = 0; j < mask.ny(); ++j)
    for (int i = 0; i < mask.nx(); ++i) {
      const int a = mask.cell_index(i, j);
      const int b = mask.cell_index((i + c1) % mask.nx(), (j + c2) % mask.ny());
      if (mask.inside(a))
        CHECK(std::abs(u.u[static_cast<std::size_t>(a)] - u.u[static_cast<std::size_t>(b)]) <=
              1e-12);
    }
}

TEST_CASE("explicit steps past the CFL bound are rejected") {
  const DomainMask mask = star_mask();
  const Coefficients coeff = Coefficients::identity(mask);
  const Reaction f = zero_reaction();
  Field u = Field::zeros(mask);
  CHECK_THROWS_AS(step(u, mask, coeff, f, 10.0 * explicit_cfl_dt(mask, coeff)), CflViolation);
}

TEST_CASE("IMEX agrees with the explicit scheme on a smooth run") {
  const DomainMask mask = build_line_domain(1.0, 128, 20);
  const Coefficients coeff = Coefficients::identity(mask);
  const Reaction f = Reaction::cubic(0.25);
  Field a = make_front_like(mask, {1, 0}, 8.0, 4.0);
  Field b = a;
  const double t_end = 4.0;
  {
    const double dt = explicit_cfl_dt(mask, coeff);
    const long n = static_cast<long>(std::ceil(t_end / dt));
    for (long k = 0; k < n; ++k) step(a, mask, coeff, f, t_end / static_cast<double>(n));
  }
  {
    const double dt = 0.005;
    const long n = static_cast<long>(std::llround(t_end / dt));
    for (long k = 0; k < n; ++k) step(b, mask, coeff, f, dt, Scheme::IMEXDiffusion);
  }
  for (int c : mask.inside_cells())
    CHECK(a.u[static_cast<std::size_t>(c)] ==
          doctest::Approx(b.u[static_cast<std::size_t>(c)]).epsilon(0.02).scale(1.0));
}

TEST_CASE("upwind drift boosts a rightward front by the drift magnitude") {
  const DomainMask mask = build_line_domain(1.0, 64, 80, EdgeMode::Reflecting);
  Coefficients coeff = Coefficients::identity(mask);
  coeff.set_drift(mask, [](Vec2) { return -0.2; }, [](Vec2) { return 0.0; });
  const Reaction f = Reaction::cubic(0.25);
  Field u0 = make_front_like(mask, {1, 0}, 12.0, 4.0);
  SolverConfig cfg;
  cfg.t_end = 60.0;
  cfg.dt = 0.02;
  cfg.scheme = Scheme::IMEXDiffusion;
  cfg.record_every = 2.0;
  ProbeSpec lv;
  lv.kind = ProbeSpec::Kind::LevelPos;
  lv.level = 0.5;
  lv.dir = {1, 0};
  lv.name = "level_right";
  const Trajectory tr = run(u0, mask, coeff, f, cfg, {lv});
  const auto& pos = tr.probe("level_right");
  const std::size_t mid = pos.size() / 2;
  const double speed = (pos.back() - pos[mid]) / (tr.times.back() - tr.times[mid]);
  const double c0 = (1.0 - 2.0 * 0.25) / std::sqrt(2.0);
  CHECK(speed == doctest::Approx(c0 + 0.2).epsilon(0.08));
}

TEST_CASE("drift type-1 flags read a shear field correctly") {
  // on a hole-free cell the shear is divergence free with zero mean
  PeriodSpec spec;
  spec.dim = 2;
  spec.L1 = spec.L2 = 4.0;
  spec.resolution = 8;
  const DomainMask free_mask = build_lattice_domain(NoHole{}, spec, 2, 2);
  Coefficients coeff = Coefficients::identity(free_mask);
  coeff.set_drift(
      free_mask, [](Vec2 x) { return std::sin(2.0 * std::numbers::pi * x.y / 4.0); },
      [](Vec2) { return 0.0; });
  auto flags = coeff.check_drift_type1(free_mask);
  CHECK(flags.divergence_free);
  CHECK(flags.zero_cell_mean);
  CHECK(flags.tangential_on_boundary);

  // the same field crosses hole boundaries of a perforated cell
  const DomainMask holed = star_mask();
  Coefficients coeff2 = Coefficients::identity(holed);
  coeff2.set_drift(
      holed, [](Vec2 x) { return 0.5 + std::sin(2.0 * std::numbers::pi * x.y / 4.0); },
      [](Vec2) { return 0.0; });
  flags = coeff2.check_drift_type1(holed);
  CHECK_FALSE(flags.tangential_on_boundary);
  CHECK_FALSE(flags.zero_cell_mean);
}

TEST_CASE("coefficient validation rejects out-of-window eigenvalues") {
  const DomainMask mask = star_mask();
  Coefficients coeff = Coefficients::identity(mask);
  coeff.a12.assign(mask.n_cells(), 0.8);  // eigenvalues 0.2 and 1.8 leave [1,1]
  CHECK_THROWS_AS(coeff.validate(mask), Error);
}

TEST_CASE("front-like data: tails, monotonicity, sharp limit") {
  const DomainMask mask = build_line_domain(1.0, 32, 30);
  const Field u = make_front_like(mask, {1, 0}, 15.0, 3.0);
  double prev = 2.0;
  for (int c : mask.inside_cells()) {
    const double x = mask.cell_center(c).x;
    const double v = u.u[static_cast<std::size_t>(c)];
    CHECK(v <= prev + 1e-15);
    prev = v;
    if (x < 13.0) CHECK(v == 1.0);
    if (x > 17.0) CHECK(v == 0.0);
  }
  const Field sharp = make_front_like(mask, {1, 0}, 15.0, 0.0);
  for (int c : mask.inside_cells()) {
    const double v = sharp.u[static_cast<std::size_t>(c)];
    CHECK((v == 0.0 || v == 1.0));
  }
}

TEST_CASE("bump data: plateau, support, range") {
  const DomainMask mask = star_mask();
  const Field u = make_bump(mask, {4.0, 4.0}, 1.5, 0.8);
  for (int c : mask.inside_cells()) {
    const double d = (mask.cell_center(c) - Vec2{4.0, 4.0}).norm();
    const double v = u.u[static_cast<std::size_t>(c)];
    CHECK(v >= 0.0);
    CHECK(v <= 0.8 + 1e-15);
    if (d < 1.5 - mask.h()) CHECK(v == doctest::Approx(0.8));
    if (d > 1.5) CHECK(v == 0.0);
  }
}
