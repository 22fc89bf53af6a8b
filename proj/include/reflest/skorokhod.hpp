#pragma once

#include <Eigen/Dense>

#include <vector>

#include "reflest/grid.hpp"
#include "reflest/scenario.hpp"

namespace reflest::skorokhod {

/// Piecewise-constant control on a uniform time grid: omega[n] acts on
/// [ts[n], ts[n+1]). `source` keeps the analytic signal when one exists so the
/// control can be resampled on refined grids without quadrature drift.
struct ControlSignal {
  Eigen::VectorXd ts;     // size steps + 1
  Eigen::VectorXd omega;  // size steps
  RealFn source;          // may be null

  int steps() const { return static_cast<int>(omega.size()); }
  double dt() const { return ts[1] - ts[0]; }

  /// Midpoint sampling of an analytic signal.
  static ControlSignal sampled(const RealFn& fn, double T, int nt);

  static ControlSignal constant(double value, double T, int nt);

  /// Same signal on a grid with `factor` times more steps. Analytic sources
  /// are resampled at midpoints; sampled-only signals split each step.
  ControlSignal refined(int factor) const;
};

/// Constrained trajectory together with its reflection term.
/// Invariants (exact for the discrete solvers):
///   x >= 0; delta(0) = 0; delta nonincreasing; delta moves only when x = 0;
///   x + delta = x0 + integral of (f(x) + omega).
struct SkorokhodSolution {
  Eigen::VectorXd ts;
  Eigen::VectorXd x;
  Eigen::VectorXd delta;
  Eigen::VectorXd unconstrained;  // x0 + Omega when f = 0, else empty
};

/// Trajectory without a reflection term (penalized dynamics).
struct StatePath {
  Eigen::VectorXd ts;
  Eigen::VectorXd x;
};

/// Driftless reflection via the explicit running-minimum formula
///   delta(t) = min(0, min_{s <= t} (x0 + Omega(s))),  x = x0 + Omega - delta,
/// with Omega accumulated from the piecewise-constant control.
SkorokhodSolution solve_explicit(double x0, const ControlSignal& control);

/// Projected explicit Euler for the constrained dynamics with drift f:
///   x_{n+1} = max(0, x_n + dt (f(x_n) + omega_n)),
/// delta accumulating the clipped amounts.
SkorokhodSolution solve_vi(const ProblemSpec& spec, double x0, const ControlSignal& control);

/// Explicit Euler for the penalized dynamics xdot = f^kappa(x) + omega,
/// sub-stepping each control step so that dt_sub (2 kappa + Lip f) <= 1/2.
StatePath solve_penalized(const ProblemSpec& spec, const PenaltySpec& pen, double x0,
                          const ControlSignal& control);

/// Integrates the reversed penalized dynamics -xdot_rev = f^kappa(x_rev) + omega
/// from the terminal value at control.ts.tail down to time 0, with the same
/// sub-stepping rule. Returned path is indexed in forward time.
StatePath solve_penalized_reverse(const ProblemSpec& spec, const PenaltySpec& pen,
                                  double terminal_x, const ControlSignal& control);

/// Sup-norm gaps sup_t |x^kappa(t) - x_ref(t)| for each kappa. The reference
/// is the explicit solution when f vanishes, otherwise the projected solver on
/// a 4x refined grid, both restricted to the control's time nodes.
std::vector<double> penalization_gap(const ProblemSpec& spec, double x0,
                                     const ControlSignal& control,
                                     const std::vector<double>& kappas);

}  // namespace reflest::skorokhod
