#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "perifront/common.hpp"

namespace perifront {

// Cells per unit length; lengths are the periods (L1, L2).
struct PeriodSpec {
  int dim = 2;
  double L1 = 1.0;
  double L2 = 1.0;
  int resolution = 8;

  void validate() const;
};

struct NoHole {};

// Axis-aligned rectangular hole, local period-cell coordinates.
struct RectHole {
  Vec2 center{0.5, 0.5};
  double wx = 0.5, wy = 0.5;
};

// Polygonal hole, star-shaped with respect to `center`.
struct StarHole {
  std::vector<Vec2> vertices;  // local period-cell coordinates
  Vec2 center;

  static StarHole regular(int points, double r_outer, double r_inner, Vec2 center);
  double diameter() const;
  bool is_star_shaped(int samples_per_edge = 24) const;
};

// Vertical wall of the given thickness with a centred slit; the slit sits on
// the period line x2 = 0, so chambers repeat with abrupt widening both ways.
struct NarrowNeckSpec {
  double wall = 0.5;
  double aperture = 1.0;  // full slit height
};

// Periodic sawtooth cylinder profile: upsilon = 2 on [0,1], plunges to `neck`
// over [1,1+drop], then climbs gently back through upsilon(L/2)=1 to 2 at L.
struct SawtoothSpec {
  double neck = 0.25;
  double L = 40.0;
  double drop = 0.25;
  double height_pad = 0.25;  // grid margin above |x2| = 2
  bool mirrored = false;     // reflect the profile, swapping the two directions

  double upsilon(double x1) const;  // period-reduced
  double neck_area() const;         // integral of 2*upsilon over x1 in [1,2]
};

// Pennant-shaped hole parametrized by the boundary profile h on [0, L1/2]:
// h(0)=2eps, h=eps on [1,1/eps^2], linear rise to 1 by 2/eps^2, then the
// smooth ramp 1 + kappa*chi((s-3/eps^2)/kappa) up to L2/2 at the tip.
struct Omega3Spec {
  double eps = 0.5;
  double kappa = 4.0;
  double R = 1.0;  // subsolution radius entering the constraints below

  double L1() const { return 2.0 * (3.0 / (eps * eps) + kappa); }
  double L2() const { return 2.0 * (1.0 + kappa); }

  // kappa >= 4R and R <= 1/(2 eps)
  void validate() const;

  double h(double s) const;        // boundary profile on [0, L1()/2]
  double h_prime(double s) const;  // one-sided where kinked

  static double chi(double s);        // cutoff: all derivatives 0 at 0, unbounded at 1-
  static double chi_prime(double s);
};

using HoleSpec = std::variant<NoHole, RectHole, StarHole, NarrowNeckSpec, SawtoothSpec, Omega3Spec>;

enum class EdgeMode { Periodic, Reflecting };

enum class FaceKind { Hole, PeriodicEdge, ReflectingEdge };

struct BoundaryFace {
  int cell = 0;       // inside cell owning the face
  int dir = 0;        // 0:+x 1:-x 2:+y 3:-y
  Vec2 center;        // world coordinates of the face midpoint
  Vec2 normal;        // unit, from inside to outside
  FaceKind kind = FaceKind::Hole;
};

struct BoundarySample {
  Vec2 point;   // local period-cell coordinates
  Vec2 normal;  // unit exterior normal of the domain (into the hole)
};

// Discretized periodic perforated domain. Immutable after construction.
class DomainMask {
 public:
  int dim() const { return spec_.dim; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double h() const { return h_; }
  double cell_area() const { return spec_.dim == 1 ? h_ : h_ * h_; }
  double period(int axis) const { return axis == 0 ? spec_.L1 : spec_.L2; }
  int cells_per_period(int axis) const { return axis == 0 ? cpp1_ : cpp2_; }
  int window(int axis) const { return axis == 0 ? window1_ : window2_; }
  EdgeMode edge_mode(int axis) const { return axis == 0 ? edge1_ : edge2_; }
  Vec2 origin() const { return origin_; }
  Box world_box() const;
  const PeriodSpec& period_spec() const { return spec_; }
  const HoleSpec& hole() const { return hole_; }

  int cell_index(int i, int j) const { return j * nx_ + i; }
  Vec2 cell_center(int idx) const {
    const int j = idx / nx_, i = idx - j * nx_;
    return {origin_.x + (i + 0.5) * h_, origin_.y + (j + 0.5) * h_};
  }
  bool inside(int idx) const { return inside_[static_cast<std::size_t>(idx)] != 0; }
  const std::vector<std::uint8_t>& inside_raw() const { return inside_; }
  const std::vector<int>& inside_cells() const { return inside_cells_; }
  std::size_t n_cells() const { return inside_.size(); }

  // Neighbor cell in the given direction, -1 for a zero-flux face
  // (hole boundary or reflecting window edge). Periodic edges wrap.
  int neighbor(int idx, int dir) const { return neighbors_[static_cast<std::size_t>(idx)][static_cast<std::size_t>(dir)]; }

  const std::vector<BoundaryFace>& boundary_faces() const { return faces_; }

  // Continuous-descriptor queries (period-replicated world coordinates).
  bool point_inside(const Vec2& world) const;  // in the closure of the domain
  std::vector<BoundarySample> boundary_samples_local(double spacing) const;
  // samples of the hole boundary inside the given world box
  std::vector<BoundarySample> boundary_samples_in(const Box& box, double spacing) const;
  std::optional<BoundarySample> nearest_boundary(const Vec2& world, double search_radius) const;
  double boundary_distance(const Vec2& world, double search_radius) const;

  // nearest cell containing the world point, -1 if out of the window
  int locate(const Vec2& world) const;

  void export_pgm(const std::string& path) const;

 private:
  friend DomainMask build_mask(const HoleSpec&, const PeriodSpec&, int, int, Vec2, EdgeMode,
                               EdgeMode);

  PeriodSpec spec_;
  HoleSpec hole_;
  int cpp1_ = 0, cpp2_ = 0;      // cells per period
  int window1_ = 1, window2_ = 1;
  int nx_ = 0, ny_ = 0;
  double h_ = 0.0;
  Vec2 origin_;                  // world coordinates of the grid corner
  EdgeMode edge1_ = EdgeMode::Periodic, edge2_ = EdgeMode::Periodic;
  std::vector<std::uint8_t> inside_;
  std::vector<int> inside_cells_;
  std::vector<std::array<int, 4>> neighbors_;
  std::vector<BoundaryFace> faces_;
};

// Shared builder. `origin_periods` places the window corner on the period
// lattice; `window1/2` count period cells along each axis.
DomainMask build_mask(const HoleSpec& hole, const PeriodSpec& spec, int window1, int window2,
                      Vec2 origin_periods = {0, 0}, EdgeMode edge1 = EdgeMode::Periodic,
                      EdgeMode edge2 = EdgeMode::Periodic);

// Rectangular lattice of holes (None | Rect | Star | NarrowNeck).
DomainMask build_lattice_domain(const HoleSpec& hole, const PeriodSpec& spec, int window1,
                                int window2 = 1, Vec2 origin_periods = {0, 0},
                                EdgeMode edge1 = EdgeMode::Periodic,
                                EdgeMode edge2 = EdgeMode::Periodic);

// Sawtooth cylinder {|x2| <= upsilon(x1)}, periodic in x1 with period L.
// `max_neck_area` is the caller's aperture budget for |{x1 in [1,2]}|.
DomainMask build_sawtooth_cylinder(const SawtoothSpec& saw, int resolution, int window1,
                                   Vec2 origin_periods = {0, 0},
                                   EdgeMode edge1 = EdgeMode::Periodic,
                                   double max_neck_area = 1e9);

DomainMask build_omega3(const Omega3Spec& spec, int resolution, int window1, int window2 = 1,
                        Vec2 origin_periods = {0, 0});

// 1D interval mask of `periods` unit cells (no holes).
DomainMask build_line_domain(double L, int resolution, int periods,
                             EdgeMode edge = EdgeMode::Periodic);

// (z-x).nu(x) <= tol for every boundary point x in the closed ball B_R(z);
// evaluated on the continuous descriptor.
bool check_sliding_condition(const DomainMask& mask, const Vec2& z, double R, double tol = 1e-9);

// Exterior tangent disc test at the boundary point x: some disc of the given
// radius, tangent at x, lies in the complement of the domain (sampled at cell
// resolution).
bool check_exterior_ball(const DomainMask& mask, const Vec2& x, double radius);

// The slidable region of an Omega3 mask: cells of the paper template where
// check_sliding_condition holds. Throws NotConnected on a bad (eps,kappa,R).
std::vector<int> slidable_set(const DomainMask& mask, double R);

bool cells_path_connected(const DomainMask& mask, const std::vector<int>& cells,
                          bool wrap_axis2 = false);

}  // namespace perifront
