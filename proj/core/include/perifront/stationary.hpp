#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "perifront/geometry.hpp"
#include "perifront/reaction.hpp"
#include "perifront/solver.hpp"

namespace perifront {

// Positive radially decreasing solution of -Delta u = f(u) on B_R, u=0 on the
// sphere, obtained by shooting on u(0).
struct RadialSolution {
  double R = 0.0;
  int dim = 2;
  std::vector<double> r, u;  // uniform radial grid on [0,R]
  double center_value = 0.0;  // u(0), the paper's M'
  double M = 0.0;             // min over the closed unit ball, u(1)
  double M_prime = 0.0;

  double eval(double radius) const;  // 0 beyond R
  // max |u'' + (dim-1)/r u' + f(u)| by finite differences on the stored grid
  double ode_residual(const Reaction& f) const;
};

RadialSolution solve_radial_dirichlet(const Reaction& f, double R, int dim = 2,
                                      int n_grid = 40000);

// Smallest R (doubling then bisection) with min over B_r of u_R above eta.
double find_min_R(const Reaction& f, double eta, double r, int dim = 2, double rel_tol = 0.02);

struct BallEvolution {
  std::vector<double> r;
  std::vector<double> times;
  std::vector<std::vector<double>> profiles;
  double min_inner_final = 0.0;  // min over B_{R'-R} at the final time
  bool exceeded_M_prime = false;
};

// Dirichlet heat flow on B_{R'} started from u_R; radial IMEX scheme.
BallEvolution evolve_ball_dirichlet(const RadialSolution& uR, const Reaction& f, double R_prime,
                                    double t_end, int n_grid = 2048, int n_records = 16);

// E_r(u) = sum faces 1/2 a_f (du)^2 - sum cells F(x,u) |cell|, for u supported
// on Omega intersect B_r(center).
double energy(const DomainMask& mask, const std::vector<double>& u, const Coefficients& A,
              const Reaction& f);

Field collar_profile(const DomainMask& mask, double r, Vec2 center = {0, 0});

struct EnergyReport {
  double r = 0.0;
  Field minimizer;
  double energy_value = 0.0;
  double max_value = 0.0;
  bool converged = false;
  std::vector<std::pair<std::string, double>> basins;  // start label -> final energy
  std::vector<double> energy_history;                  // winning run, per accepted iteration
};

// Projected gradient descent (BB steps, Armijo safeguard) on the discrete E_r
// over [0,1] box constraints, multi-start from {0, collar, random}.
EnergyReport minimize_energy(const DomainMask& mask, double r, const Coefficients& A,
                             const Reaction& f, int iters, Vec2 center = {0, 0},
                             std::uint64_t seed = 1);

// Pointwise Newton sweeps pushing the discrete stationarity residual of the
// free cells to round-off; returns the final max residual. The polished field
// is a verified discrete subsolution when extended by zero.
double polish_stationary(const DomainMask& mask, Field& u, const Coefficients& A,
                         const Reaction& f, double r, Vec2 center = {0, 0}, int max_sweeps = 600);

struct FrontProfile {
  std::vector<double> z, phi, dphi;
  double dz = 0.0;
  double c = 0.0;
  double upper = 1.0, lower = 0.0;
  Reaction f_used = Reaction::cubic(0.25);

  double eval(double zz) const;
  double eval_dphi(double zz) const;
  double eval_ddphi(double zz) const;  // through the profile ODE
};

// Traveling front of phi'' + c phi' + f(phi) = 0 connecting the upper state to
// the lower one; speed by overshoot/undershoot bisection from the saddle.
FrontProfile front_profile_1d(const Reaction& f, double tol = 1e-6, double Lambda = 1.0);

// psi(t,x1,x2) = phi(x1 + eta |x2|^2 - c t), a rightward-moving subsolution
// once c < front speed and eta is small enough.
struct ParaboloidSubsolution {
  FrontProfile front;
  double c = 0.0;
  double eta = 0.0;

  double value(double t, double x1, double x2) const;
  // max over samples of dt psi - Lap psi - target(psi), restricted to psi
  // values >= value_floor (contact with nonnegative solutions).
  double worst_interior_residual(const Reaction& target, double x2_max, int n_samples,
                                 double value_floor = 0.0) const;
  // 2 eta upsilon(2) - 2/(L-4); nonnegative makes the conormal slope test pass
  double boundary_margin(double L, double upsilon_at_2) const;
};

ParaboloidSubsolution paraboloid_subsolution(const FrontProfile& front, double c, double eta);

// eta = min((c_front - c)/(2(N-1)), sqrt(mu)/4)
double paraboloid_eta(double c_front, double c, double mu, int dim = 2);

// radial interpolation of u_R placed at z, restricted to the mask
Field inject_radial(const DomainMask& mask, const RadialSolution& uR, Vec2 z);

}  // namespace perifront
