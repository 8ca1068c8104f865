#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "perifront/common.hpp"

namespace perifront {

class DomainMask;

enum class ReactionKind { Monostable, Combustion, Bistable, Custom };

// Nonlinearity f(x,s) with f(x,0)=f(x,1)=0 and f>0 near s=1.
// Outside [lower_state, upper_state] the function continues with the Lipschitz
// extension -lipschitz*(s-upper) above and its mirror -lipschitz*(s-lower)
// below; both branches restore excursions into [lower, upper], which keeps the
// discrete range stable against round-off.
class Reaction {
 public:
  // f(s) = s(1-s)(s-theta), homogeneous.
  static Reaction cubic(double theta);

  // f(x,s) = s(1-s)(s-a(x)), a(x) = a_mid + a_amp cos(2 pi x/L1) cos(2 pi y/L2).
  static Reaction cubic_xdep(double a_mid, double a_amp, double period_x, double period_y);

  // f = 0 on [0, ignition], scaled (s-ignition)(1-s) bump above; homogeneous.
  static Reaction combustion_bump(double ignition, double amplitude = 1.0);

  // Piecewise-linear homogeneous nonlinearity through the given nodes
  // (s ascending, first node at lower state, last at upper state, both values 0).
  static Reaction piecewise_linear(std::vector<double> s_nodes, std::vector<double> values,
                                   ReactionKind kind);

  // Plateau combustion profile: 0 on [0,a-ramp], m on [a,b], linear back to 0 at 1.
  static Reaction plateau(double m, double a, double b, double ramp = 0.02);

  // Arbitrary homogeneous nonlinearity; primitive by quadrature.
  static Reaction custom(std::function<double(double)> f, double lipschitz, ReactionKind kind);

  double operator()(const Vec2& x, double s) const;
  double operator()(double s) const { return (*this)(Vec2{}, s); }

  double lipschitz() const { return lipschitz_; }
  ReactionKind kind() const { return kind_; }
  bool x_dependent() const { return x_dependent_; }
  double lower_state() const { return lower_state_; }
  double upper_state() const { return upper_state_; }
  std::optional<double> theta_param() const { return theta_param_; }

  // F(x,s) = int_0^s f(x,.)
  double primitive(const Vec2& x, double s) const;
  double primitive(double s) const { return primitive(Vec2{}, s); }

  // g(s) = min_x f(x,s) over one period (closed form for the cubic family,
  // sampled otherwise). For homogeneous reactions this is f itself.
  double min_over_x(double s) const;
  double max_over_x(double s) const;

  // Batched evaluation for the solver hot loop: out[i] += scale*f(x_i, u[i]).
  // `param` comes from make_cell_params (empty for homogeneous reactions).
  std::vector<double> make_cell_params(const std::vector<Vec2>& xs) const;
  void accumulate_rates(const std::vector<double>& param, const double* u, double* out,
                        std::size_t n, double scale) const;

 private:
  enum class Impl { HomCubic, XdepCubic, HomPiecewiseLinear, Custom };

  double eval_core(const Vec2& x, double s) const;  // no extension, s in [lower,upper]
  double extension(double s) const;                 // signed overshoot handling
  double pl_eval(double s) const;
  double pl_primitive(double s) const;

  Impl impl_ = Impl::HomCubic;
  ReactionKind kind_ = ReactionKind::Bistable;
  bool x_dependent_ = false;
  double lipschitz_ = 1.0;
  double lower_state_ = 0.0;
  double upper_state_ = 1.0;
  std::optional<double> theta_param_;

  // cubic family
  double a_mid_ = 0.25, a_amp_ = 0.0, period_x_ = 1.0, period_y_ = 1.0;

  // piecewise linear
  std::vector<double> pl_s_, pl_v_, pl_cum_;  // cum = primitive at nodes

  // custom
  std::function<double(double)> fn_;

  friend Reaction make_combustion_minorant(const Reaction&, double, double);
  friend Reaction make_shifted_bistable_minorant(const Reaction&, double);
};

struct ThetaResult {
  double theta = 0.0;
  bool interior_zero_found = true;  // false: f > 0 on all of (0,1) sampled
};

// Largest zero of min_x f(x,.) in [0,1), located by sign scan plus bisection
// to tolerance grid_step*1e-3, with a Richardson step-halving check.
ThetaResult compute_theta(const Reaction& f, double grid_step = 1e-3);

struct RectResult {
  double value = 0.0;  // R(f)
  double K = 0.0, H = 0.0;  // argmax rectangle [K,H]
};

// Area of the largest rectangle under the graph of g(s)=min_x f(x,s), i.e.
// sup over 0<K<H<1 of (H-K) min_{[K,H]} g. Monotone-stack scan over the
// s-grid; the O(n^2) oracle lives in the tests.
RectResult compute_R_grid(const Reaction& f, double s_step);  // single grid pass
RectResult compute_R(const Reaction& f, double s_step = 1e-3);  // with step-halving check

// int_C int_0^1 f(x,s) ds dx by midpoint quadrature (200 s-samples per cell).
double check_mean_positive(const Reaction& f, const DomainMask& mask);

struct EnvelopeScalars {
  double theta = 0.0;
  double mean_F = 0.0;   // int_C int_0^1 f
  double R_of_f = 0.0;
  bool F_gap_ok = false;  // F(x,s) < F(x,1) for sampled (x,s), s<1
};

EnvelopeScalars envelope_scalars(const Reaction& f, const DomainMask& mask);

// x-independent combustion minorant: 0 on [0,theta+eps], 0 < tilde f <= g/(1+mu)
// on (theta+eps,1), continuous piecewise-linear cap.
Reaction make_combustion_minorant(const Reaction& f, double eps, double mu = 0.05);

// Shifted bistable minorant with states -mu and 1-mu: strictly below f on
// (-mu,theta) (f read as 0 for s<0), 0 < tilde f <= g/(1+mu) on (theta,1-mu),
// still positively unbalanced. Used to build the bent-front subsolution.
Reaction make_shifted_bistable_minorant(const Reaction& f, double mu);

enum class EnvelopeSide { Min, Max };

struct OdeTrajectory {
  std::vector<double> times;
  std::vector<double> values;
  double final_value() const { return values.empty() ? 0.0 : values.back(); }
};

// RK4 trajectory of zdot = min_x f(x,z) (or max); the scalar sub/supersolution
// envelope used by the classifier.
OdeTrajectory ode_envelope(const Reaction& f, double z0, double t_end,
                           EnvelopeSide side = EnvelopeSide::Min, int n_steps = 4000);

}  // namespace perifront
