#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "perifront/geometry.hpp"
#include "perifront/reaction.hpp"

namespace perifront {

// Periodic diffusion matrix A and drift q sampled at cell centers, with the
// ellipticity window [lambda, Lambda] they are certified against.
struct Coefficients {
  std::vector<double> a11, a22, a12;  // a12 empty => diagonal A
  std::vector<double> q1, q2;        // empty => no drift
  double lambda = 1.0;
  double Lambda = 1.0;
  bool offdiag_enabled = false;  // cross-difference terms participate only when set

  static Coefficients identity(const DomainMask& mask) { return isotropic(mask, 1.0); }
  static Coefficients isotropic(const DomainMask& mask, double a);
  static Coefficients diagonal(const DomainMask& mask, std::function<double(Vec2)> a11,
                               std::function<double(Vec2)> a22);

  void set_drift(const DomainMask& mask, std::function<double(Vec2)> q1f,
                 std::function<double(Vec2)> q2f);

  // lambda I <= A(x) <= Lambda I at every cell (eigenvalue check)
  void validate(const DomainMask& mask) const;

  struct DriftFlags {
    bool divergence_free = true;
    bool zero_cell_mean = true;
    bool tangential_on_boundary = true;
  };
  DriftFlags check_drift_type1(const DomainMask& mask) const;

  double max_drift() const;
};

struct Field {
  std::vector<double> u;  // full grid, zero on outside cells
  double time = 0.0;

  static Field zeros(const DomainMask& mask);
};

enum class Scheme { ExplicitEuler, IMEXDiffusion };

struct SolverConfig {
  double dt = 0.0;  // <= 0 selects the automatic step for the scheme
  double t_end = 1.0;
  Scheme scheme = Scheme::ExplicitEuler;
  double record_every = 0.1;
  double snapshot_every = 0.0;  // <= 0 disables snapshots
  double cfl_safety = 0.9;
};

double explicit_cfl_dt(const DomainMask& mask, const Coefficients& coeff, double cfl_safety = 0.9);
double auto_dt(const DomainMask& mask, const Coefficients& coeff, const Reaction& f,
               Scheme scheme, double cfl_safety = 0.9);

// One conservative update. Zero flux across masked faces, periodic wrap across
// periodic window edges, first-order upwind drift.
void step(Field& field, const DomainMask& mask, const Coefficients& coeff, const Reaction& f,
          double dt, Scheme scheme = Scheme::ExplicitEuler);

struct ProbeSpec {
  enum class Kind { GlobalMax, GlobalMin, BoxMin, BoxMax, LevelPos, RegionSup, Mass };
  Kind kind = Kind::GlobalMax;
  Box box;            // BoxMin/BoxMax/RegionSup
  double level = 0.5; // LevelPos
  Vec2 dir{1, 0};     // LevelPos
  std::string name;
};

struct Trajectory {
  std::vector<ProbeSpec> probes;
  std::vector<double> times;
  std::vector<std::vector<double>> series;  // series[p][k], NaN when undefined
  std::vector<double> snapshot_times;
  std::vector<std::vector<double>> snapshots;
  double horizon = 0.0;

  int probe_index(const std::string& name) const;
  const std::vector<double>& probe(const std::string& name) const;
};

Trajectory run(Field u0, const DomainMask& mask, const Coefficients& coeff, const Reaction& f,
               const SolverConfig& cfg, const std::vector<ProbeSpec>& probes);

// probe primitives, usable standalone
double field_max(const DomainMask& mask, const std::vector<double>& u);
double field_min(const DomainMask& mask, const std::vector<double>& u);
double field_mass(const DomainMask& mask, const std::vector<double>& u);
double box_extremum(const DomainMask& mask, const std::vector<double>& u, const Box& box,
                    bool minimum);
// Rightmost crossing of u=level along the direction, linearly interpolated;
// nullopt when the level is never attained.
std::optional<double> level_position(const DomainMask& mask, const std::vector<double>& u,
                                     double level, const Vec2& dir);

// Smooth monotone ramp from 1 to 0 in x.e across the given width.
Field make_front_like(const DomainMask& mask, const Vec2& e, double shift, double width);

// height on Omega intersect B_radius(center), zero outside, one-cell taper.
Field make_bump(const DomainMask& mask, const Vec2& center, double radius, double height);

}  // namespace perifront
