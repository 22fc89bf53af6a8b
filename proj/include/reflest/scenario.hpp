#pragma once

#include <functional>
#include <string>
#include <vector>

namespace reflest {

using RealFn = std::function<double(double)>;

/// Sup-norm / Lipschitz metadata for the coefficient functions, used for CFL
/// estimates, dissipation coefficients and the a-priori bound checks. Values
/// are bounds over the region a solver may ever evaluate (the plateau support
/// for truncated coefficients, the computational window otherwise).
struct CoefficientBounds {
  double f_sup = 0.0;     // sup |f|
  double f_lip = 0.0;     // sup |f'|
  double h_sup = 0.0;     // sup |h|
  double h1_sup = 0.0;    // sup |h'|
  double h2_sup = 0.0;    // sup |h''|
  double y_sup = 0.0;     // sup_t |y|
  double ydot_sup = 0.0;  // sup_t |ydot|
};

/// One estimation scenario: drift f, observation function h, observation
/// primitive y with analytic derivative ydot, prior psi, and the initial HJ
/// datum w0. Derivatives are supplied analytically because the Hamiltonians
/// consume f', h', h''. S0 is always w0 + y(0) h by definition.
///
/// Requirements checked by validate():
///   f(0) = 0; declared derivatives match centered differences; psi = w0 when
///   a preset declares them equal (presets always do).
struct ProblemSpec {
  std::string name;

  RealFn f, fprime;
  RealFn h, hprime, hsecond;
  RealFn y, ydot;
  RealFn psi;
  RealFn w0;

  CoefficientBounds bounds;

  // Nominal disturbance for path experiments: x(0) = x0 and, when set,
  // omega / Omega with Omega(t) = integral of omega on [0, t].
  double x0 = 0.0;
  RealFn omega;      // may be null
  RealFn Omega;      // may be null

  double S0(double x) const { return w0(x) + y(0.0) * h(x); }

  /// Checks structural requirements on a sample window [0, xspan] x [0, tspan].
  /// Throws std::invalid_argument naming the failing requirement.
  void validate(double xspan = 4.0, double tspan = 2.0) const;
};

/// Penalty strength for the relaxation of the constraint x >= 0. The penalty
/// term vanishes for x >= 0, equals -kappa x for x <= -1/kappa, and bridges
/// the two with the cubic b(u) = 2u^2 - u^3, u = -kappa x, which matches
/// values (0, 1) and slopes (0, -kappa) at the ends. The bridge slope peaks
/// at 4/3 kappa, inside the admissible band [0, 2 kappa].
struct PenaltySpec {
  double kappa = 1.0;

  void validate() const;

  double penalty(double x) const;        // the term added to f
  double penalty_slope(double x) const;  // its derivative, in [-2 kappa, 0]
};

/// f^kappa(x) = f(x) + penalty(x).
double eval_penalized_drift(const ProblemSpec& spec, const PenaltySpec& pen, double x);

/// d/dx f^kappa(x).
double eval_penalized_drift_slope(const ProblemSpec& spec, const PenaltySpec& pen, double x);

/// Named preset scenarios:
///   "zero"             everything identically zero
///   "figure1"          f = 0, x0 = 5, Omega(t) = t cos(sqrt(5) t) + sqrt(2) t sin(t),
///                      bounded smooth h and y for the estimation experiments
///   "constant-obs"     h = 1, f = 0, y = 0
///   "linear-quadratic" f = a x, h = c x (plateau-truncated), quadratic prior
///   "boundary-probe"   prior away from 0, observations dragging the state into
///                      the constraint
/// Throws std::invalid_argument listing the valid names otherwise.
ProblemSpec builtin_scenario(const std::string& name);

std::vector<std::string> builtin_scenario_names();

/// Direct constructor for the linear-Gaussian family: f = a x, h = c x, both
/// multiplied by a smooth plateau equal to 1 on [-plateau_at, plateau_at],
/// prior psi(x) = (x - m)^2 / (2 sigma0^2), observation primitive
/// y(t) = c x0 (1 - exp(a t)) / (-a) for a != 0 (the noise-free observation of
/// the drift-only trajectory from x0), y = c x0 t for a = 0.
/// a = c = 0 gives the pure quadratic-prior scenario.
ProblemSpec linear_quadratic_scenario(double a, double c, double m, double sigma0,
                                      double x0, double plateau_at = 8.0);

}  // namespace reflest
