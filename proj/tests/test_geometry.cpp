#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "perifront/geometry.hpp"

using namespace perifront;

namespace {

PeriodSpec unit_cell(int res, double L = 1.0) {
  PeriodSpec s;
  s.dim = 2;
  s.L1 = s.L2 = L;
  s.resolution = res;
  return s;
}

double inside_fraction(const DomainMask& m) {
  return static_cast<double>(m.inside_cells().size()) / static_cast<double>(m.n_cells());
}

bool periodicity_bit_test(const DomainMask& m) {
  const int c1 = m.cells_per_period(0), c2 = m.cells_per_period(1);
  for (int j = 0; j < m.ny(); ++j)
    for (int i = 0; i < m.nx(); ++i) {
      const int ii = (i + c1) % m.nx();
      const int jj = (j + c2) % m.ny();
      if (m.inside(m.cell_index(i, j)) != m.inside(m.cell_index(ii, jj))) return false;
    }
  return true;
}

}  // namespace

TEST_CASE("lattice: empty obstacle fills the window with no interior faces") {
  const DomainMask m = build_lattice_domain(NoHole{}, unit_cell(8), 3, 3);
  CHECK(m.inside_cells().size() == m.n_cells());
  for (const auto& f : m.boundary_faces()) CHECK(f.kind != FaceKind::Hole);
}

TEST_CASE("lattice: square hole area matches within one cell layer") {
  RectHole hole;
  hole.center = {0.5, 0.5};
  hole.wx = hole.wy = 0.5;
  const DomainMask m = build_lattice_domain(hole, unit_cell(32), 1, 1);
  const double frac = inside_fraction(m);
  const double layer = 4 * 0.5 * m.h();  // perimeter times one cell
  CHECK(frac == doctest::Approx(0.75).epsilon(layer / 0.75));
}

TEST_CASE("lattice: star hole mask is bit-exactly periodic") {
  const StarHole star = StarHole::regular(5, 0.7, 0.35, {2.0, 2.0});
  PeriodSpec spec = unit_cell(8, 4.0);
  const DomainMask m = build_lattice_domain(star, spec, 3, 2);
  CHECK(periodicity_bit_test(m));
}

TEST_CASE("star shape check accepts stars and rejects a C-shaped polygon") {
  CHECK(StarHole::regular(5, 0.7, 0.3, {0, 0}).is_star_shaped());
  StarHole c_shape;
  c_shape.vertices = {{0, 0}, {3, 0}, {3, 1}, {1, 1}, {1, 2}, {3, 2}, {3, 3}, {0, 3}};
  c_shape.center = {2.0, 1.5};  // sits in the mouth of the C
  CHECK_FALSE(c_shape.is_star_shaped());
}

TEST_CASE("feature resolution guard fires") {
  RectHole tiny;
  tiny.center = {0.5, 0.5};
  tiny.wx = tiny.wy = 0.2;  // 1.6 cells at resolution 8
  CHECK_THROWS_AS(build_lattice_domain(tiny, unit_cell(8), 1, 1), FeatureUnresolved);
}

TEST_CASE("an all-hole tile reports a disconnected (empty) domain") {
  RectHole big;
  big.center = {0.5, 0.5};
  big.wx = big.wy = 0.9999;
  CHECK_THROWS_AS(build_lattice_domain(big, unit_cell(8), 1, 1), DisconnectedDomain);
}

TEST_CASE("sawtooth: neck resolved, profile clauses hold on the grid") {
  SawtoothSpec saw;
  saw.neck = 0.1;
  saw.L = 40.0;
  const int res = 40;
  const DomainMask m = build_sawtooth_cylinder(saw, res, 1);

  // neck passage spans at least 4 cells
  int neck_cells = 0;
  for (int j = 0; j < m.ny(); ++j) {
    const int c = m.cell_index(static_cast<int>(1.6 * res), j);
    if (m.inside(c)) ++neck_cells;
  }
  CHECK(neck_cells >= 4);

  // upsilon(L/2) = 1 within one cell height: count the column height
  int mid_cells = 0;
  for (int j = 0; j < m.ny(); ++j)
    if (m.inside(m.cell_index(static_cast<int>(20.0 * res), j))) ++mid_cells;
  CHECK(std::abs(0.5 * mid_cells * m.h() - 1.0) <= m.h());

  // discrete slope scan of the rasterized profile on [2,L]
  const double cap = 2.0 / (saw.L - 4.0);
  auto column_half_height = [&](int i) {
    int cnt = 0;
    for (int j = 0; j < m.ny(); ++j)
      if (m.inside(m.cell_index(i, j))) ++cnt;
    return 0.5 * cnt * m.h();
  };
  for (int i = 2 * res; i + res <= 40 * res; i += res) {
    const double slope = column_half_height(i + res) - column_half_height(i);
    CHECK(slope >= -2.0 * m.h());
    CHECK(slope <= cap + 2.0 * m.h());
  }
}

TEST_CASE("sawtooth: rasterized neck area matches the closed form within two cells") {
  SawtoothSpec saw;
  saw.neck = 0.25;
  saw.L = 16.0;
  const int res = 16;
  const DomainMask m = build_sawtooth_cylinder(saw, res, 1);
  double area = 0.0;
  for (int c : m.inside_cells()) {
    const Vec2 x = m.cell_center(c);
    if (x.x >= 1.0 && x.x <= 2.0) area += m.cell_area();
  }
  CHECK(std::abs(area - saw.neck_area()) <= 2.0 * 1.0 * m.h());
}

TEST_CASE("sawtooth: aperture budget precondition") {
  SawtoothSpec saw;
  saw.neck = 0.25;
  saw.L = 16.0;
  CHECK_THROWS_AS(build_sawtooth_cylinder(saw, 16, 1, {0, 0}, EdgeMode::Periodic, 0.1),
                  ProfileViolation);
}

TEST_CASE("omega3: boundary profile hits the pinned values") {
  Omega3Spec o;
  o.eps = 0.5;
  o.kappa = 4.0;
  o.R = 1.0;
  o.validate();
  const double e2 = 1.0 / (o.eps * o.eps);
  CHECK(o.h(0.0) == doctest::Approx(2.0 * o.eps).epsilon(1e-14));
  for (double s = 1.0; s <= e2; s += 0.25)
    CHECK(o.h(s) == doctest::Approx(o.eps).epsilon(1e-14));
  // chi(1) = 1 forces the ramp to close the half-height
  CHECK(o.h(3.0 * e2 + o.kappa) == doctest::Approx(1.0 + o.kappa).epsilon(1e-12));
  CHECK(o.h(3.0 * e2 + o.kappa) == doctest::Approx(0.5 * o.L2()).epsilon(1e-12));
}

TEST_CASE("omega3: cutoff chi is monotone with the pinned endpoints") {
  CHECK(Omega3Spec::chi(0.0) == 0.0);
  CHECK(Omega3Spec::chi(1.0) == 1.0);
  double prev = 0.0;
  for (int k = 1; k <= 10000; ++k) {
    const double v = Omega3Spec::chi(k / 10000.0);
    CHECK(v >= prev - 1e-15);
    prev = v;
  }
  // derivative blows up approaching 1, flattens completely at 0
  CHECK(Omega3Spec::chi_prime(1.0 - 1e-10) > 1e3);
  CHECK(Omega3Spec::chi_prime(1e-3) < 1e-300);
}

TEST_CASE("omega3: constraint validation") {
  Omega3Spec bad1{0.5, 2.0, 1.0};  // kappa < 4R
  CHECK_THROWS_AS(bad1.validate(), Error);
  Omega3Spec bad2{0.5, 8.0, 1.5};  // R > 1/(2 eps)
  CHECK_THROWS_AS(bad2.validate(), Error);
}

TEST_CASE("omega3: mask periodic bit-exactly, faces have unit normals, fluxes close") {
  Omega3Spec o{0.5, 4.0, 1.0};
  const DomainMask m = build_omega3(o, 8, 2, 2, {0, 0});
  CHECK(periodicity_bit_test(m));

  Vec2 total{0, 0};
  for (const auto& f : m.boundary_faces()) {
    CHECK(std::abs(f.normal.norm() - 1.0) < 1e-12);
    if (f.kind == FaceKind::Hole) total = total + f.normal * m.h();
  }
  CHECK(std::abs(total.x) < 1e-9);
  CHECK(std::abs(total.y) < 1e-9);
}

TEST_CASE("exterior ball: straight wall passes, star tip fails") {
  RectHole hole;
  hole.center = {4.0, 4.0};
  hole.wx = hole.wy = 4.0;
  PeriodSpec spec = unit_cell(16, 8.0);
  const DomainMask m = build_lattice_domain(hole, spec, 1, 1);
  // mid-edge of the flat face: locally a half-plane, tangent discs of any
  // radius up to the hole depth fit
  CHECK(check_exterior_ball(m, {2.0, 4.0}, 0.5));
  CHECK(check_exterior_ball(m, {2.0, 4.0}, 1.9));

  const StarHole star = StarHole::regular(5, 1.4, 0.7, {4.0, 4.0});
  const DomainMask ms = build_lattice_domain(star, unit_cell(16, 8.0), 1, 1);
  const Vec2 tip{4.0, 4.0 - 1.4};  // outward spike, hole-side wedge under pi
  CHECK_FALSE(check_exterior_ball(ms, tip, 0.5));
}

TEST_CASE("exterior ball: omega3 ramp region admits the R^2 disc") {
  Omega3Spec o{0.5, 4.0, 1.0};
  const DomainMask m = build_omega3(o, 16, 2, 2, {0, 0});
  const double e2 = 1.0 / (o.eps * o.eps);
  int checked = 0;
  for (double s = 2.0 * e2; s <= 0.5 * o.L1() - 1e-6; s += 0.05) {
    const Vec2 x{s, o.h(s)};
    CAPTURE(s);
    CHECK(check_exterior_ball(m, x, o.R * o.R));
    ++checked;
  }
  CHECK(checked > 100);
}

TEST_CASE("sliding condition: interior ball is vacuously admissible") {
  const StarHole star = StarHole::regular(5, 0.7, 0.35, {3.0, 3.0});
  const DomainMask m = build_lattice_domain(star, unit_cell(8, 6.0), 2, 2);
  CHECK(check_sliding_condition(m, {0.1, 0.1}, 1.5));  // far from every hole
}

TEST_CASE("sliding condition: omega3 axis segment (paper lemma) and monotone vacuity") {
  Omega3Spec o{0.5, 4.0, 1.0};
  const DomainMask m = build_omega3(o, 8, 4, 2, {-1, -1});
  const double e2 = 1.0 / (o.eps * o.eps);
  const double R = o.R;
  for (double lam = 2.0 * R; lam <= 3.0 * e2 - R; lam += 0.2) {
    CAPTURE(lam);
    CHECK(check_sliding_condition(m, {lam, 0.0}, R));
  }

  // shrinking R never flips true -> false when the small ball sees no boundary
  Rng rng(3);
  for (int k = 0; k < 50; ++k) {
    const Vec2 z{rng.uniform(0.0, o.L1()), rng.uniform(-0.4, 0.4)};
    const double r_small = 0.2;
    const Box box{z.x - r_small, z.x + r_small, z.y - r_small, z.y + r_small};
    bool empty = true;
    for (const auto& s : m.boundary_samples_in(box, 0.5 * m.h()))
      if ((s.point - z).norm() <= r_small) empty = false;
    if (empty) CHECK(check_sliding_condition(m, z, r_small));
  }
}

TEST_CASE("sliding condition: abrupt opening of the mirrored cylinder fails") {
  SawtoothSpec saw;
  saw.neck = 0.25;
  saw.L = 16.0;
  saw.mirrored = true;
  const DomainMask m = build_sawtooth_cylinder(saw, 16, 2);
  // in the mirrored profile the sudden widening sits at x = L - 1 - drop
  const Vec2 z{saw.L - 1.0 - saw.drop - 0.5, 0.0};
  CHECK_FALSE(check_sliding_condition(m, z, 1.5));
}

TEST_CASE("slidable set: axis segment included, members verified, wrap keeps it connected") {
  Omega3Spec o{0.5, 4.0, 1.0};
  const DomainMask m = build_omega3(o, 8, 4, 2, {-1, -1});
  const std::vector<int> S = slidable_set(m, o.R);
  REQUIRE(!S.empty());
  std::set<int> set(S.begin(), S.end());

  // the axis segment [2R, L1] x {0} belongs to S
  const double h = m.h();
  for (double x = 2.0 * o.R + h; x <= o.L1() - h; x += 2.0 * h) {
    const int c = m.locate({x, 0.5 * h});
    REQUIRE(c >= 0);
    CAPTURE(x);
    CHECK(set.count(c) == 1);
  }
  // spot-check membership against the underlying condition
  Rng rng(17);
  for (int k = 0; k < 25; ++k) {
    const int c = S[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(S.size()) - 1))];
    CHECK(check_sliding_condition(m, m.cell_center(c), o.R));
  }
  CHECK(cells_path_connected(m, S));

  // S together with its vertical period translates stays path-connected
  std::vector<int> tripled = S;
  const int shift = m.cells_per_period(1) * m.nx();
  const int n = static_cast<int>(m.n_cells());
  for (int c : S) {
    tripled.push_back((c + shift) % n);
    tripled.push_back(((c - shift) % n + n) % n);
  }
  CHECK(cells_path_connected(m, tripled, true));
}

TEST_CASE("pgm export writes a readable header") {
  const DomainMask m = build_lattice_domain(NoHole{}, unit_cell(8), 2, 2);
  const std::string path = "mask_test.pgm";
  m.export_pgm(path);
  std::ifstream f(path, std::ios::binary);
  std::string magic;
  int w = 0, hh = 0, maxv = 0;
  f >> magic >> w >> hh >> maxv;
  CHECK(magic == "P5");
  CHECK(w == 16);
  CHECK(hh == 16);
  CHECK(maxv == 255);
  std::filesystem::remove(path);
}
