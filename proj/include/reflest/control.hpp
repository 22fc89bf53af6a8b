#pragma once

#include <vector>

#include "reflest/grid.hpp"
#include "reflest/scenario.hpp"

namespace reflest::control {

/// Value function W of the backward control problem over reflected driftless
/// trajectories: z(t) = x, dz/ds = omega away from 0, reflection keeping
/// z >= 0, cost psi(z(0)) + integral of the reduced rate
///   l(z, omega, s) = omega^2/2 + h(z)^2/2 - ydot(s) h(z).
/// Computed by time-marching dynamic programming:
///   W(x, t + dt) = min_omega [ W(max(0, x - dt omega), t) + dt l(x, omega, t + dt) ]
/// with linear interpolation and a uniform omega grid of n_omega cells on
/// [-omega_bar, omega_bar]. The problem is stated for driftless dynamics;
/// scenarios with f != 0 are rejected.
ScalarField backward_value_dp(const ProblemSpec& spec, const GridSpec& grid,
                              double omega_bar, int n_omega);

/// Sup-norm gap between the DP value W and the marching solution w of the
/// limit equation over `window`. Throws on mismatched grids.
double identify_with_limit(const ScalarField& W, const ScalarField& w,
                           const Window& window);

/// Cumulative observation energy E(t_n) = integral of ydot^2 / 2 on [0, t_n],
/// the term dropped when passing to the reduced cost rate. Adding it back
/// makes W comparable with the full-cost values.
Eigen::VectorXd observation_energy(const ProblemSpec& spec, const GridSpec& grid);

/// One row of the lost-equivalence experiment: full-cost constrained value
/// (forward shooting), W plus the observation energy, and the penalized
/// cost-to-come, all at the same node. gap = |V_constrained - W|.
struct BoundaryRow {
  double x = 0.0;
  double t = 0.0;
  double v_constrained = 0.0;
  double w_value = 0.0;
  double v_penalized = 0.0;
  double gap = 0.0;
};

struct BoundaryTable {
  std::vector<BoundaryRow> rows;
};

/// Evaluates the three fields at the requested points (snapped to grid nodes)
/// and reports the discrepancy per row. The table quantifies the boundary
/// behavior; it makes no equality claim there.
BoundaryTable boundary_discrepancy_table(const ProblemSpec& spec,
                                         const PenaltySpec& pen,
                                         const GridSpec& grid, double omega_bar,
                                         int n_omega,
                                         const std::vector<double>& xs,
                                         const std::vector<double>& ts);

}  // namespace reflest::control
