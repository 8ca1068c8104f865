#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "perifront/reaction.hpp"
#include "perifront/solver.hpp"

namespace perifront {

enum class VerdictKind { Blocking, Persistence, Invasion, OrientedInvasion, Inconclusive };

std::string to_string(VerdictKind k);
std::optional<VerdictKind> verdict_from_string(const std::string& s);

struct ClassifyParams {
  double eps_inv = 0.05;    // invasion: compact minima above 1 - eps_inv
  double delta_blk = 0.2;   // blocking: global sup below 1 - delta_blk
  double pers_floor = 0.01; // persistence: compact minima above this
  double drift_tol = 0.02;  // trailing-window relative drift allowed
  double r2_min = 0.99;
  double transient_frac = 0.05;
  bool oriented = false;
  std::string level_right_probe = "level_right";
  std::string left_sup_probe = "left_sup";
  std::vector<std::string> edge_guard_probes;
  // persistence is judged on these probes when set; otherwise on the compacts
  std::vector<std::string> persistence_probes;
};

struct Verdict {
  VerdictKind kind = VerdictKind::Inconclusive;
  bool persistent = false;      // compact minima stay away from 0
  double sup_tail = 0.0;        // trailing mean of the global sup
  double compact_min_tail = 0.0;
  std::optional<double> speed_right;
  std::optional<double> speed_left;
  double r2_right = 0.0;
  double r2_left = 0.0;
  double drift = 0.0;           // drift of the deciding statistic
  std::string note;
};

// Long-time classification from trailing-window statistics (last 20% of the
// horizon). `compact_probes` name BoxMin probes acting as the compact sets.
Verdict classify(const Trajectory& traj, const std::vector<std::string>& compact_probes,
                 const ClassifyParams& params);

struct SpeedFit {
  double speed = 0.0;
  double r2 = 0.0;
};

// Least-squares slope of a level-position probe over the trailing 50% of its
// valid samples. Throws LevelNeverCrossed when the probe never fired.
SpeedFit measure_speed(const Trajectory& traj, const std::string& level_probe);

struct WStar {
  double value = 0.0;
  bool applicable = true;  // false when the drift hypothesis fails
};

WStar w_star(double R_of_f, double lambda, double Lambda, double q_radial_limsup);
WStar w_star(const Reaction& f, double lambda, double Lambda, double q_radial_limsup);

// The certificate data behind the explicit speed bound: a nonincreasing bump
// profile h with h=H left of 0, a parabolic cap on [0,z1], the power tail
// mu (z2-z)^beta on [z1,z2], and zero beyond.
struct SubsolutionProfile {
  double H = 0.0, K = 0.0;
  double gamma = 0.0, z1 = 0.0, z2 = 0.0, delta = 0.0, beta = 0.0;
  double log_mu = 0.0;  // mu can under/overflow for large beta; keep the log
  double B_bar = 0.0;   // (lambda/sqrt(Lambda)) sqrt(R(f))
  double min_f = 0.0;   // sampled min of g over [K,H]
  double lambda = 1.0, Lambda = 1.0;

  double L() const { return z2; }
  double mu() const { return std::exp(log_mu); }
  double h(double z) const;
  double h_prime(double z) const;
  double h_second(double z) const;

  // residuals/slacks of the five defining relations:
  // [0] lambda(beta-1) - B delta  (slack, >= 0)
  // [1] min_f - gamma(Lambda + B z1)  (slack, >= 0 after the beta search)
  // [2] gamma/2 z1^2 - (H-K)
  // [3] mu delta^beta - K   (evaluated in log space)
  // [4] gamma z1 - K beta / delta
  std::array<double, 5> alg_residuals() const;
};

// Closed-form construction; beta <= 0 requests the automatic search doubling
// from 4 until the second relation holds (BetaSearchFailed beyond 2^16).
SubsolutionProfile build_propdim_profile(const Reaction& f, double lambda, double Lambda,
                                         double beta = 0.0);

// min over sampled z in [0,L] and A in {lambda, Lambda} of A h'' + B h' + f(h);
// closed-form derivatives, caller inspects the sign.
double verify_propdim(const SubsolutionProfile& prof, const Reaction& f, double lambda,
                      double Lambda, double B, int n_samples);

// v(t,x) = h(|x| - c_bar t - rho), the moving lower barrier behind the bound.
struct RadialExpandingSubsolution {
  SubsolutionProfile profile;
  double c_bar = 0.0;
  double rho = 0.0;
  double q_radial_limsup = 0.0;
  int dim = 2;

  double value(double t, const Vec2& x) const;
  // max over samples of dt v - a Lap v - q_r dr v - f(v), a in {lambda, Lambda}
  double worst_residual(const Reaction& f, int n_samples) const;
};

// Throws RhoTooSmall unless dim*Lambda/rho + c_bar + q_limsup < B_bar.
RadialExpandingSubsolution radial_expanding_subsolution(const SubsolutionProfile& prof,
                                                        double c_bar, double rho,
                                                        double q_radial_limsup = 0.0,
                                                        int dim = 2);

}  // namespace perifront
