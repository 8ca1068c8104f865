#include "perifront/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <numbers>
#include <unordered_set>

namespace perifront {

namespace {

constexpr double kPi = std::numbers::pi;

double reduce_mod(double x, double L) {
  double r = std::fmod(x, L);
  if (r < 0) r += L;
  return r;
}

bool point_in_polygon_strict(const std::vector<Vec2>& poly, const Vec2& p) {
  // crossing number; points on an edge count as outside (domain tie-break)
  bool in = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[j];
    const Vec2& b = poly[i];
    // on-segment check
    const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    const double d2 = sq(b.x - a.x) + sq(b.y - a.y);
    if (std::abs(cross) < 1e-12 * std::max(1.0, d2)) {
      const double t = ((p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y)) / d2;
      if (t >= -1e-12 && t <= 1.0 + 1e-12) return false;
    }
    if ((a.y > p.y) != (b.y > p.y)) {
      const double xint = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
      if (p.x < xint) in = !in;
    }
  }
  return in;
}

double polygon_signed_area(const std::vector<Vec2>& poly) {
  double s = 0.0;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++)
    s += poly[j].x * poly[i].y - poly[i].x * poly[j].y;
  return 0.5 * s;
}

double dist_point_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const double d2 = sq(b.x - a.x) + sq(b.y - a.y);
  if (d2 <= 0) return (p - a).norm();
  double t = ((p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y)) / d2;
  t = std::clamp(t, 0.0, 1.0);
  return (p - Vec2{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)}).norm();
}

}  // namespace

void PeriodSpec::validate() const {
  if (dim != 1 && dim != 2) throw Error("PeriodSpec: dim must be 1 or 2");
  if (L1 <= 0 || (dim == 2 && L2 <= 0)) throw Error("PeriodSpec: lengths must be positive");
  if (resolution < 8) throw Error("PeriodSpec: resolution must be >= 8 cells per unit");
}

StarHole StarHole::regular(int points, double r_outer, double r_inner, Vec2 center) {
  if (points < 3 || r_inner <= 0 || r_outer <= r_inner)
    throw Error("StarHole::regular: need points>=3 and 0 < r_inner < r_outer");
  StarHole s;
  s.center = center;
  for (int k = 0; k < 2 * points; ++k) {
    const double ang = -kPi / 2 + k * kPi / points;
    const double r = (k % 2 == 0) ? r_outer : r_inner;
    s.vertices.push_back({center.x + r * std::cos(ang), center.y + r * std::sin(ang)});
  }
  return s;
}

double StarHole::diameter() const {
  double d = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i)
    for (std::size_t j = i + 1; j < vertices.size(); ++j)
      d = std::max(d, (vertices[i] - vertices[j]).norm());
  return d;
}

bool StarHole::is_star_shaped(int samples_per_edge) const {
  for (std::size_t i = 0, j = vertices.size() - 1; i < vertices.size(); j = i++) {
    for (int k = 0; k <= samples_per_edge; ++k) {
      const double t = static_cast<double>(k) / samples_per_edge;
      const Vec2 p{vertices[j].x + t * (vertices[i].x - vertices[j].x),
                   vertices[j].y + t * (vertices[i].y - vertices[j].y)};
      // the open segment center -> p must stay inside the polygon
      for (int m = 1; m < 48; ++m) {
        const double s = m / 48.0;
        const Vec2 q{center.x + s * (p.x - center.x) * (1.0 - 1e-9),
                     center.y + s * (p.y - center.y) * (1.0 - 1e-9)};
        bool near_boundary = false;
        for (std::size_t a = 0, b = vertices.size() - 1; a < vertices.size(); b = a++)
          if (dist_point_segment(q, vertices[b], vertices[a]) < 1e-9) near_boundary = true;
        if (!near_boundary && !point_in_polygon_strict(vertices, q)) return false;
      }
    }
  }
  return true;
}

double SawtoothSpec::upsilon(double x1) const {
  double x = reduce_mod(x1, L);
  if (mirrored) x = L - x;
  if (x <= 1.0) return 2.0;
  if (x <= 1.0 + drop) return 2.0 + (neck - 2.0) * (x - 1.0) / drop;
  if (x <= 2.0) return neck;
  if (x <= 0.5 * L) return neck + (1.0 - neck) * (x - 2.0) / (0.5 * L - 2.0);
  return 1.0 + (x - 0.5 * L) / (0.5 * L);
}

double SawtoothSpec::neck_area() const {
  return (2.0 + neck) * drop + 2.0 * neck * (1.0 - drop);
}

void Omega3Spec::validate() const {
  if (!(eps > 0 && eps < 1)) throw Error("Omega3Spec: eps in (0,1)");
  if (kappa <= 0) throw Error("Omega3Spec: kappa > 0");
  if (kappa < 4.0 * R - 1e-12) throw Error("Omega3Spec: requires kappa >= 4R");
  if (R > 0.5 / eps + 1e-12) throw Error("Omega3Spec: requires R <= 1/(2 eps)");
}

double Omega3Spec::chi(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return (1.0 - std::sqrt(1.0 - s)) * std::exp(1.0 - 1.0 / s);
}

double Omega3Spec::chi_prime(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1e300;
  const double e = std::exp(1.0 - 1.0 / s);
  return e * (0.5 / std::sqrt(1.0 - s) + (1.0 - std::sqrt(1.0 - s)) / (s * s));
}

double Omega3Spec::h(double s) const {
  const double e2 = 1.0 / (eps * eps);
  if (s <= 0.0) return 2.0 * eps;
  if (s <= 1.0) return eps + eps * 0.5 * (1.0 + std::cos(kPi * s));
  if (s <= e2) return eps;
  if (s <= 2.0 * e2) return eps + (1.0 - eps) * (s - e2) / e2;
  if (s <= 3.0 * e2) return 1.0;
  return 1.0 + kappa * chi((s - 3.0 * e2) / kappa);
}

double Omega3Spec::h_prime(double s) const {
  const double e2 = 1.0 / (eps * eps);
  if (s <= 0.0) return 0.0;
  if (s <= 1.0) return -eps * 0.5 * kPi * std::sin(kPi * s);
  if (s <= e2) return 0.0;
  if (s <= 2.0 * e2) return (1.0 - eps) * eps * eps;
  if (s <= 3.0 * e2) return 0.0;
  return chi_prime((s - 3.0 * e2) / kappa);
}

namespace {

// continuous hole description in local period-cell coordinates
struct Descriptor {
  const HoleSpec* hole;
  const PeriodSpec* spec;

  bool in_hole(const Vec2& p) const {
    return std::visit(
        [&](const auto& g) -> bool { return in_hole_impl(g, p); }, *hole);
  }

  bool in_hole_impl(const NoHole&, const Vec2&) const { return false; }

  bool in_hole_impl(const RectHole& r, const Vec2& p) const {
    return std::abs(p.x - r.center.x) < 0.5 * r.wx && std::abs(p.y - r.center.y) < 0.5 * r.wy;
  }

  bool in_hole_impl(const StarHole& s, const Vec2& p) const {
    return point_in_polygon_strict(s.vertices, p);
  }

  bool in_hole_impl(const NarrowNeckSpec& nn, const Vec2& p) const {
    return in_hole_impl(neck_rect(nn), p);
  }

  bool in_hole_impl(const SawtoothSpec& sw, const Vec2& p) const {
    // local frame: axis at y = L2/2, tile height L2
    if (p.y < 0.0 || p.y >= spec->L2) return true;
    return std::abs(p.y - 0.5 * spec->L2) > sw.upsilon(p.x);
  }

  bool in_hole_impl(const Omega3Spec& o, const Vec2& p) const {
    if (p.x > 0.5 * o.L1()) return false;
    const double hh = o.h(p.x);
    return p.y > hh && p.y < o.L2() - hh;
  }

  RectHole neck_rect(const NarrowNeckSpec& nn) const {
    return RectHole{{0.5 * spec->L1, 0.5 * spec->L2}, nn.wall, spec->L2 - nn.aperture};
  }

  double min_feature() const {
    return std::visit([&](const auto& g) -> double { return feat_impl(g); }, *hole);
  }
  double feat_impl(const NoHole&) const { return 1e300; }
  double feat_impl(const RectHole& r) const { return std::min(r.wx, r.wy); }
  double feat_impl(const StarHole& s) const {
    double d = 1e300;
    for (std::size_t i = 0, j = s.vertices.size() - 1; i < s.vertices.size(); j = i++)
      d = std::min(d, dist_point_segment(s.center, s.vertices[j], s.vertices[i]));
    return 2.0 * d;
  }
  double feat_impl(const NarrowNeckSpec& nn) const { return std::min(nn.wall, nn.aperture); }
  double feat_impl(const SawtoothSpec& sw) const { return 2.0 * sw.neck; }
  double feat_impl(const Omega3Spec& o) const { return 2.0 * o.eps; }

  void check_fits() const {
    std::visit([&](const auto& g) { fits_impl(g); }, *hole);
  }
  void fits_impl(const NoHole&) const {}
  void fits_impl(const RectHole& r) const {
    if (r.center.x - 0.5 * r.wx <= 0 || r.center.x + 0.5 * r.wx >= spec->L1 ||
        r.center.y - 0.5 * r.wy <= 0 || r.center.y + 0.5 * r.wy >= spec->L2)
      throw Error("hole does not fit strictly inside one period cell");
  }
  void fits_impl(const StarHole& s) const {
    for (const Vec2& v : s.vertices)
      if (v.x <= 0 || v.x >= spec->L1 || v.y <= 0 || v.y >= spec->L2)
        throw Error("hole does not fit strictly inside one period cell");
    if (!s.is_star_shaped()) throw Error("StarHole: polygon is not star-shaped about its center");
  }
  void fits_impl(const NarrowNeckSpec& nn) const {
    if (nn.aperture <= 0 || nn.aperture >= spec->L2 || nn.wall <= 0 || nn.wall >= spec->L1)
      throw Error("NarrowNeck: wall/aperture do not fit the period cell");
  }
  void fits_impl(const SawtoothSpec& sw) const {
    if (sw.L <= 4.0) throw Error("SawtoothSpec: requires L > 4");
    if (!(sw.neck > 0 && sw.neck < 1)) throw Error("SawtoothSpec: neck in (0,1)");
  }
  void fits_impl(const Omega3Spec& o) const { o.validate(); }

  // boundary samples with exterior (domain -> hole) normals, local coordinates
  std::vector<BoundarySample> samples(double spacing) const {
    std::vector<BoundarySample> out;
    std::visit([&](const auto& g) { samples_impl(g, spacing, out); }, *hole);
    return out;
  }

  void samples_impl(const NoHole&, double, std::vector<BoundarySample>&) const {}

  static void sample_segment(const Vec2& a, const Vec2& b, const Vec2& normal, double spacing,
                             std::vector<BoundarySample>& out) {
    const double len = (b - a).norm();
    const int n = std::max(1, static_cast<int>(std::ceil(len / spacing)));
    for (int k = 0; k <= n; ++k) {
      const double t = static_cast<double>(k) / n;
      out.push_back({{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)}, normal});
    }
  }

  void samples_impl(const RectHole& r, double spacing, std::vector<BoundarySample>& out) const {
    const double x0 = r.center.x - 0.5 * r.wx, x1 = r.center.x + 0.5 * r.wx;
    const double y0 = r.center.y - 0.5 * r.wy, y1 = r.center.y + 0.5 * r.wy;
    sample_segment({x0, y0}, {x0, y1}, {1, 0}, spacing, out);    // left face, hole to the right
    sample_segment({x1, y0}, {x1, y1}, {-1, 0}, spacing, out);
    sample_segment({x0, y0}, {x1, y0}, {0, 1}, spacing, out);    // bottom face, hole above
    sample_segment({x0, y1}, {x1, y1}, {0, -1}, spacing, out);
  }

  void samples_impl(const StarHole& s, double spacing, std::vector<BoundarySample>& out) const {
    std::vector<Vec2> poly = s.vertices;
    if (polygon_signed_area(poly) < 0) std::reverse(poly.begin(), poly.end());
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
      const Vec2 e = poly[i] - poly[j];
      const double len = e.norm();
      const Vec2 inward{-e.y / len, e.x / len};  // CCW polygon: rotate +90 to point into the hole
      sample_segment(poly[j], poly[i], inward, spacing, out);
    }
  }

  void samples_impl(const NarrowNeckSpec& nn, double spacing,
                    std::vector<BoundarySample>& out) const {
    samples_impl(neck_rect(nn), spacing, out);
  }

  void samples_impl(const SawtoothSpec& sw, double spacing,
                    std::vector<BoundarySample>& out) const {
    const double mid = 0.5 * spec->L2;
    const int n = static_cast<int>(std::ceil(sw.L / spacing));
    for (int k = 0; k <= n; ++k) {
      const double x = sw.L * k / n;
      const double u = sw.upsilon(x);
      const double du = (sw.upsilon(x + 1e-7) - sw.upsilon(x - 1e-7)) / 2e-7;
      const double nn = std::sqrt(1.0 + du * du);
      out.push_back({{x, mid + u}, {-du / nn, 1.0 / nn}});
      out.push_back({{x, mid - u}, {-du / nn, -1.0 / nn}});
    }
  }

  void samples_impl(const Omega3Spec& o, double spacing, std::vector<BoundarySample>& out) const {
    const double half = 0.5 * o.L1();
    const double L2 = o.L2();
    // flat left face at s=0, domain on the left
    sample_segment({0, 2.0 * o.eps}, {0, L2 - 2.0 * o.eps}, {1, 0}, spacing, out);
    // graph of h and its mirror; arclength-adaptive stepping through the ramp
    double s = 0.0;
    while (s < half) {
      const double hp = o.h_prime(std::min(s, half - 1e-12));
      const double step = std::max(spacing / std::sqrt(1.0 + hp * hp), spacing * 1e-3);
      const double hh = o.h(s);
      const double nn = std::sqrt(1.0 + hp * hp);
      out.push_back({{s, hh}, {-hp / nn, 1.0 / nn}});
      out.push_back({{s, L2 - hh}, {-hp / nn, -1.0 / nn}});
      s += step;
    }
    out.push_back({{half, 0.5 * L2}, {-1.0, 0.0}});  // tip: boundary turns vertical
  }
};

}  // namespace

Box DomainMask::world_box() const {
  return {origin_.x, origin_.x + nx_ * h_, origin_.y, origin_.y + ny_ * h_};
}

bool DomainMask::point_inside(const Vec2& world) const {
  if (spec_.dim == 1) return true;
  Descriptor d{&hole_, &spec_};
  Vec2 local{reduce_mod(world.x - origin_.x, spec_.L1) , 0.0};
  // descriptor tiles live in [0,L1)x[0,L2); axis 2 wraps only when periodic
  if (std::holds_alternative<SawtoothSpec>(hole_)) {
    const double y = world.y - origin_.y;
    if (y < 0.0 || y >= spec_.L2) return false;
    local.y = y;
  } else {
    local.y = reduce_mod(world.y - origin_.y, spec_.L2);
  }
  return !d.in_hole(local);
}

std::vector<BoundarySample> DomainMask::boundary_samples_local(double spacing) const {
  Descriptor d{&hole_, &spec_};
  return d.samples(spacing);
}

std::vector<BoundarySample> DomainMask::boundary_samples_in(const Box& box,
                                                            double spacing) const {
  std::vector<BoundarySample> out;
  if (spec_.dim == 1) return out;
  const auto local = boundary_samples_local(spacing);
  if (local.empty()) return out;

  const bool y_periodic = !std::holds_alternative<SawtoothSpec>(hole_);
  const int k1_lo = static_cast<int>(std::floor((box.x0 - origin_.x) / spec_.L1)) - 1;
  const int k1_hi = static_cast<int>(std::ceil((box.x1 - origin_.x) / spec_.L1)) + 1;
  int k2_lo = 0, k2_hi = 0;
  if (y_periodic) {
    k2_lo = static_cast<int>(std::floor((box.y0 - origin_.y) / spec_.L2)) - 1;
    k2_hi = static_cast<int>(std::ceil((box.y1 - origin_.y) / spec_.L2)) + 1;
  }
  for (int k1 = k1_lo; k1 <= k1_hi; ++k1) {
    for (int k2 = k2_lo; k2 <= k2_hi; ++k2) {
      for (const auto& s : local) {
        const Vec2 p{origin_.x + k1 * spec_.L1 + s.point.x, origin_.y + k2 * spec_.L2 + s.point.y};
        if (box.contains(p)) out.push_back({p, s.normal});
      }
    }
  }
  return out;
}

std::optional<BoundarySample> DomainMask::nearest_boundary(const Vec2& world,
                                                           double search_radius) const {
  const Box box{world.x - search_radius, world.x + search_radius, world.y - search_radius,
                world.y + search_radius};
  const auto samples = boundary_samples_in(box, 0.5 * h_);
  std::optional<BoundarySample> best;
  double best_d = 1e300;
  for (const auto& s : samples) {
    const double d = (s.point - world).norm();
    if (d < best_d) {
      best_d = d;
      best = s;
    }
  }
  return best;
}

double DomainMask::boundary_distance(const Vec2& world, double search_radius) const {
  const auto nb = nearest_boundary(world, search_radius);
  return nb ? (nb->point - world).norm() : 1e300;
}

int DomainMask::locate(const Vec2& world) const {
  const int i = static_cast<int>(std::floor((world.x - origin_.x) / h_));
  const int j = static_cast<int>(std::floor((world.y - origin_.y) / h_));
  if (i < 0 || i >= nx_ || j < 0 || j >= ny_) return -1;
  return cell_index(i, j);
}

void DomainMask::export_pgm(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path);
  f << "P5\n" << nx_ << " " << ny_ << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(nx_));
  for (int j = ny_ - 1; j >= 0; --j) {
    for (int i = 0; i < nx_; ++i) row[static_cast<std::size_t>(i)] = inside(cell_index(i, j)) ? 255 : 0;
    f.write(reinterpret_cast<const char*>(row.data()), nx_);
  }
}

DomainMask build_mask(const HoleSpec& hole, const PeriodSpec& spec, int window1, int window2,
                      Vec2 origin_periods, EdgeMode edge1, EdgeMode edge2) {
  spec.validate();
  Descriptor desc{&hole, &spec};
  desc.check_fits();

  DomainMask m;
  m.spec_ = spec;
  m.hole_ = hole;
  m.window1_ = window1;
  m.window2_ = spec.dim == 2 ? window2 : 1;
  m.edge1_ = edge1;
  m.edge2_ = edge2;
  m.h_ = 1.0 / spec.resolution;

  const double c1 = spec.L1 * spec.resolution;
  m.cpp1_ = static_cast<int>(std::lround(c1));
  if (std::abs(c1 - m.cpp1_) > 1e-6 * std::max(1.0, c1))
    throw Error("period L1 is not grid-aligned at this resolution");
  if (spec.dim == 2) {
    const double c2 = spec.L2 * spec.resolution;
    m.cpp2_ = static_cast<int>(std::lround(c2));
    if (std::abs(c2 - m.cpp2_) > 1e-6 * std::max(1.0, c2))
      throw Error("period L2 is not grid-aligned at this resolution");
  } else {
    m.cpp2_ = 1;
  }
  m.nx_ = m.cpp1_ * m.window1_;
  m.ny_ = spec.dim == 2 ? m.cpp2_ * m.window2_ : 1;
  m.origin_ = {origin_periods.x * spec.L1, spec.dim == 2 ? origin_periods.y * spec.L2 : -0.5 * m.h_};

  const double feat = desc.min_feature();
  if (feat < 4.0 * m.h_)
    throw FeatureUnresolved("narrowest hole feature spans fewer than 4 cells");

  // rasterize one period tile, then replicate bit-exactly
  std::vector<std::uint8_t> tile(static_cast<std::size_t>(m.cpp1_) * m.cpp2_, 1);
  if (spec.dim == 2) {
    for (int jl = 0; jl < m.cpp2_; ++jl)
      for (int il = 0; il < m.cpp1_; ++il) {
        const Vec2 p{(il + 0.5) * m.h_, (jl + 0.5) * m.h_};
        tile[static_cast<std::size_t>(jl) * m.cpp1_ + il] = desc.in_hole(p) ? 0 : 1;
      }
  }
  m.inside_.resize(static_cast<std::size_t>(m.nx_) * m.ny_);
  for (int j = 0; j < m.ny_; ++j) {
    const int jl = j % m.cpp2_;
    for (int i = 0; i < m.nx_; ++i) {
      const int il = i % m.cpp1_;
      m.inside_[static_cast<std::size_t>(j) * m.nx_ + i] =
          tile[static_cast<std::size_t>(jl) * m.cpp1_ + il];
    }
  }
  for (int c = 0; c < m.nx_ * m.ny_; ++c)
    if (m.inside_[static_cast<std::size_t>(c)]) m.inside_cells_.push_back(c);
  if (m.inside_cells_.empty()) throw DisconnectedDomain("empty inside set");

  // neighbor table with wrap on periodic window edges; -1 encodes zero flux
  m.neighbors_.assign(static_cast<std::size_t>(m.nx_) * m.ny_, {-1, -1, -1, -1});
  const auto wrap = [](int v, int n, EdgeMode mode, bool& ok) {
    if (v >= 0 && v < n) return v;
    if (mode == EdgeMode::Periodic) return (v + n) % n;
    ok = false;
    return 0;
  };
  for (int j = 0; j < m.ny_; ++j)
    for (int i = 0; i < m.nx_; ++i) {
      const int c = m.cell_index(i, j);
      if (!m.inside_[static_cast<std::size_t>(c)]) continue;
      const int di[4] = {1, -1, 0, 0};
      const int dj[4] = {0, 0, 1, -1};
      for (int d = 0; d < 4; ++d) {
        if (spec.dim == 1 && d >= 2) continue;
        bool ok = true;
        const int ii = wrap(i + di[d], m.nx_, m.edge1_, ok);
        const int jj = spec.dim == 2 ? wrap(j + dj[d], m.ny_, m.edge2_, ok) : j;
        if (!ok) continue;
        const int n = m.cell_index(ii, jj);
        if (m.inside_[static_cast<std::size_t>(n)]) m.neighbors_[static_cast<std::size_t>(c)][static_cast<std::size_t>(d)] = n;
      }
    }

  // edge-connectivity of the inside set
  {
    std::vector<std::uint8_t> seen(m.inside_.size(), 0);
    std::deque<int> q{m.inside_cells_.front()};
    seen[static_cast<std::size_t>(q.front())] = 1;
    std::size_t count = 0;
    while (!q.empty()) {
      const int c = q.front();
      q.pop_front();
      ++count;
      for (int d = 0; d < 4; ++d) {
        const int n = m.neighbors_[static_cast<std::size_t>(c)][static_cast<std::size_t>(d)];
        if (n >= 0 && !seen[static_cast<std::size_t>(n)]) {
          seen[static_cast<std::size_t>(n)] = 1;
          q.push_back(n);
        }
      }
    }
    if (count != m.inside_cells_.size())
      throw DisconnectedDomain("inside set is not edge-connected");
  }

  // boundary faces: hole interfaces plus tagged window edges
  const Vec2 axis_normal[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  for (int c : m.inside_cells_) {
    const int j = c / m.nx_, i = c - j * m.nx_;
    const int di[4] = {1, -1, 0, 0};
    const int dj[4] = {0, 0, 1, -1};
    for (int d = 0; d < 4; ++d) {
      if (spec.dim == 1 && d >= 2) continue;
      const Vec2 fc{m.origin_.x + (i + 0.5 + 0.5 * di[d]) * m.h_,
                    m.origin_.y + (j + 0.5 + 0.5 * dj[d]) * m.h_};
      const int ii = i + di[d], jj = j + dj[d];
      const bool off1 = ii < 0 || ii >= m.nx_;
      const bool off2 = jj < 0 || jj >= m.ny_;
      if (off1 || off2) {
        const EdgeMode mode = off1 ? m.edge1_ : m.edge2_;
        if (mode == EdgeMode::Periodic) {
          const int n = m.neighbors_[static_cast<std::size_t>(c)][static_cast<std::size_t>(d)];
          if (n < 0)
            m.faces_.push_back({c, d, fc, axis_normal[d], FaceKind::Hole});
          else
            m.faces_.push_back({c, d, fc, axis_normal[d], FaceKind::PeriodicEdge});
        } else {
          m.faces_.push_back({c, d, fc, axis_normal[d], FaceKind::ReflectingEdge});
        }
      } else if (!m.inside_[static_cast<std::size_t>(m.cell_index(ii, jj))]) {
        m.faces_.push_back({c, d, fc, axis_normal[d], FaceKind::Hole});
      }
    }
  }
  return m;
}

DomainMask build_lattice_domain(const HoleSpec& hole, const PeriodSpec& spec, int window1,
                                int window2, Vec2 origin_periods, EdgeMode edge1, EdgeMode edge2) {
  if (std::holds_alternative<SawtoothSpec>(hole) || std::holds_alternative<Omega3Spec>(hole))
    throw Error("build_lattice_domain: use the dedicated sawtooth/omega3 builders");
  return build_mask(hole, spec, window1, window2, origin_periods, edge1, edge2);
}

DomainMask build_sawtooth_cylinder(const SawtoothSpec& saw, int resolution, int window1,
                                   Vec2 origin_periods, EdgeMode edge1, double max_neck_area) {
  if (saw.L <= 4.0) throw Error("build_sawtooth_cylinder: requires L > 4");
  if (saw.neck_area() > max_neck_area)
    throw ProfileViolation("neck cross-section area exceeds the aperture budget");

  PeriodSpec spec;
  spec.dim = 2;
  spec.L1 = saw.L;
  // tile height: full cylinder plus a small mask margin, grid-aligned
  const double hh = 1.0 / resolution;
  spec.L2 = std::ceil((4.0 + 2.0 * saw.height_pad) / hh) * hh;
  spec.resolution = resolution;

  DomainMask m = build_mask(saw, spec, window1, 1, {origin_periods.x, -0.5}, edge1,
                            EdgeMode::Reflecting);

  // discrete profile scan against the (def omega) clauses
  const double slope_cap = 2.0 / (saw.L - 4.0);
  const double tol = 2.0 * hh;
  auto ups = [&](double x) { return saw.upsilon(saw.mirrored ? saw.L - x : x); };
  for (double x = 2.0; x + hh <= saw.L; x += hh) {
    const double slope = (ups(x + hh) - ups(x)) / hh;
    if (slope < -tol || slope > slope_cap + tol)
      throw ProfileViolation("upsilon slope outside [0, 2/(L-4)] on [2,L]");
  }
  for (double x = 1.0; x + hh <= 2.0; x += hh)
    if (ups(x + hh) - ups(x) > tol) throw ProfileViolation("upsilon not nonincreasing on [1,2]");
  if (std::abs(ups(0.5 * saw.L) - 1.0) > tol) throw ProfileViolation("upsilon(L/2) != 1");
  return m;
}

DomainMask build_omega3(const Omega3Spec& spec3, int resolution, int window1, int window2,
                        Vec2 origin_periods) {
  spec3.validate();
  PeriodSpec spec;
  spec.dim = 2;
  spec.L1 = spec3.L1();
  spec.L2 = spec3.L2();
  spec.resolution = resolution;
  return build_mask(spec3, spec, window1, window2, origin_periods, EdgeMode::Periodic,
                    EdgeMode::Periodic);
}

DomainMask build_line_domain(double L, int resolution, int periods, EdgeMode edge) {
  PeriodSpec spec;
  spec.dim = 1;
  spec.L1 = L;
  spec.resolution = resolution;
  return build_mask(NoHole{}, spec, periods, 1, {0, 0}, edge, EdgeMode::Periodic);
}

bool check_sliding_condition(const DomainMask& mask, const Vec2& z, double R, double tol) {
  const Box box{z.x - R, z.x + R, z.y - R, z.y + R};
  const auto samples = mask.boundary_samples_in(box, 0.5 * mask.h());
  for (const auto& s : samples) {
    if ((s.point - z).norm() > R) continue;
    if ((z - s.point).dot(s.normal) > tol) return false;
  }
  return true;
}

bool check_exterior_ball(const DomainMask& mask, const Vec2& x, double radius) {
  const auto nb = mask.nearest_boundary(x, 4.0 * mask.h());
  if (!nb) throw Error("check_exterior_ball: point is not near the boundary");
  const Vec2 y = x + nb->normal * radius;
  const double h = mask.h();
  const double reach = radius - h;
  if (reach <= 0) return true;
  for (double px = y.x - reach; px <= y.x + reach; px += h)
    for (double py = y.y - reach; py <= y.y + reach; py += h) {
      const Vec2 p{px, py};
      if ((p - y).norm() > reach) continue;
      if (mask.point_inside(p)) return false;
    }
  return true;
}

bool cells_path_connected(const DomainMask& mask, const std::vector<int>& cells,
                          bool wrap_axis2) {
  if (cells.empty()) return true;
  std::unordered_set<int> set(cells.begin(), cells.end());
  std::unordered_set<int> seen;
  std::deque<int> q{cells.front()};
  seen.insert(cells.front());
  const int nx = mask.nx(), ny = mask.ny();
  while (!q.empty()) {
    const int c = q.front();
    q.pop_front();
    const int j = c / nx, i = c - j * nx;
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        if (di == 0 && dj == 0) continue;
        int ii = i + di, jj = j + dj;
        if (mask.edge_mode(0) == EdgeMode::Periodic) ii = (ii + nx) % nx;
        if (wrap_axis2 || mask.edge_mode(1) == EdgeMode::Periodic) jj = (jj + ny) % ny;
        if (ii < 0 || ii >= nx || jj < 0 || jj >= ny) continue;
        const int n = jj * nx + ii;
        if (set.count(n) && !seen.count(n)) {
          seen.insert(n);
          q.push_back(n);
        }
      }
  }
  return seen.size() == set.size();
}

std::vector<int> slidable_set(const DomainMask& mask, double R) {
  const auto* o = std::get_if<Omega3Spec>(&mask.hole());
  if (!o) throw Error("slidable_set: mask is not an Omega3 domain");
  const double L1 = o->L1(), L2 = o->L2();
  const double e2 = 1.0 / (o->eps * o->eps);
  const Vec2 tip{L1, 0.0};

  std::vector<int> out;
  for (int c : mask.inside_cells()) {
    const Vec2 p = mask.cell_center(c);
    if (p.y < -0.5 * L2 - 1e-9 || p.y > 0.5 * L2 + 1e-9) continue;
    const bool in_axis_segment =
        std::abs(p.y) <= 0.51 * mask.h() && p.x >= 2.0 * R && p.x <= L1 + 1e-9;
    const bool in_deep_region = p.x >= 3.0 * e2 - R && p.x <= L1 - 2.0 * R &&
                                mask.boundary_distance(p, 1.5) >= 1.0;
    const bool in_right_region =
        p.x >= L1 - 2.0 * R && p.x <= L1 + 1e-9 && (p - tip).norm() >= 3.0 * R;
    if (!(in_axis_segment || in_deep_region || in_right_region)) continue;
    if (check_sliding_condition(mask, p, R)) out.push_back(c);
  }
  if (!cells_path_connected(mask, out))
    throw NotConnected("slidable set splits; adjust (eps,kappa,R)");
  return out;
}

}  // namespace perifront
