#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "perifront/analysis.hpp"
#include "perifront/geometry.hpp"
#include "perifront/reaction.hpp"
#include "perifront/solver.hpp"
#include "perifront/stationary.hpp"

namespace perifront {

struct ScenarioOptions {
  double resolution_mult = 1.0;  // CI robustness runs double this
  double horizon = 0.0;          // 0: builder default
  double dt = 0.0;               // 0: builder default
  std::optional<Scheme> scheme;
  double record_every = 0.0;
  double snapshot_every = 0.0;
  std::uint64_t seed = 1;
};

// A fully bound experiment: domain, medium, datum, probes and thresholds.
struct Scenario {
  std::string name;
  DomainMask mask;
  Coefficients coeff;
  Reaction reaction;
  Field u0;
  SolverConfig solver;
  std::vector<ProbeSpec> probes;
  std::vector<std::string> compact_probes;
  ClassifyParams classify_params;
  std::optional<VerdictKind> expected;
  std::uint64_t seed = 1;
  std::string description;
};

struct ScenarioResult {
  Verdict verdict;
  Trajectory trajectory;
};

ScenarioResult run_scenario(const Scenario& s);

// expected Persistence accepts any persistent outcome; other kinds match exactly
bool verdict_matches(VerdictKind expected, const Verdict& got);

// Star-hole lattice: invasion for L = 2 diam(K) + 2R + 1 (L <= 0 derives it).
Scenario scenario_omega1(const StarHole& star, double L, const Reaction& f,
                         const ScenarioOptions& opts = {});

// Periodic narrow-neck walls; small apertures block yet persist, large invade.
Scenario scenario_blocking(double aperture, const Reaction& f, const ScenarioOptions& opts = {},
                           double wall = 0.5, double chamber = 4.0);

// Sawtooth cylinder: oriented invasion rightward, blocking leftward.
Scenario scenario_cylinder(double neck_eps, double L, const Reaction& f,
                           const ScenarioOptions& opts = {}, bool mirrored = false);

// The pennant lattice: oriented invasion with staircase spreading.
Scenario scenario_omega3(const Omega3Spec& spec, const Reaction& f,
                         const ScenarioOptions& opts = {});

// Free-space spreading from a ball datum, radial speed vs the explicit bound.
struct SpeedBoundSetup {
  double lambda = 1.0;
  double Lambda = 1.0;
  double q_inward = 0.0;  // magnitude of an inward radial drift beyond a unit core
  double extent = 32.0;   // window side in units
};
Scenario scenario_speed_bound(const Reaction& f, const SpeedBoundSetup& setup,
                              const ScenarioOptions& opts = {});

// Mean-positive medium on a perforated cell, bump sized by find_min_R.
Scenario scenario_persistence(const Reaction& f, const HoleSpec& hole, double period,
                              const ScenarioOptions& opts = {});

// 1D front-speed run used by the speed oracle comparisons.
Scenario scenario_front1d(const Reaction& f, double length, double dx,
                          const ScenarioOptions& opts = {});

// run directory: verdict.json, probes.csv, snapshots/*.pgm (+ index), manifest.json
void write_run_artifacts(const Scenario& s, const ScenarioResult& r, const std::string& out_dir,
                         const std::string& config_text);

}  // namespace perifront
