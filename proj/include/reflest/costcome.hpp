#pragma once

#include <cstdint>
#include <vector>

#include "reflest/grid.hpp"
#include "reflest/scenario.hpp"

namespace reflest::costcome {

/// Penalized cost-to-come V^kappa on [0, xmax] x [0, T] via the forward HJB
/// marching (whole-line problem solved on the symmetric interval).
ScalarField cost_to_come_hjb(const ProblemSpec& spec, const PenaltySpec& pen,
                             const GridSpec& grid);

/// Default disturbance-search radius for the dynamic-programming routines:
/// large enough to cross the domain within T against the drift and to absorb
/// the observation residual.
double default_omega_bar(const ProblemSpec& spec, const GridSpec& grid);

/// Independent semi-Lagrangian oracle for the same value function:
///   U(z, s + dt) = min_w [ U(z - dt (f^k(z) + w), s)
///                          + dt (w^2/2 + (ydot(s+dt) - h(z))^2 / 2) ]
/// with linear interpolation in z and a uniform disturbance grid of n_omega
/// cells on [-omega_bar, omega_bar]. Returns the restriction to [0, xmax].
ScalarField cost_to_come_dp_oracle(const ProblemSpec& spec, const PenaltySpec& pen,
                                   const GridSpec& grid, double omega_bar,
                                   int n_omega);

/// Mortensen estimate: per time level, the argmin of the value over [0, xmax]
/// with one parabolic sub-grid refinement. Ties (a second minimum within
/// tie_rel of the smallest, at least two cells away) are resolved toward the
/// smaller x and flagged.
struct TraceResult {
  Eigen::VectorXd ts;
  Eigen::VectorXd xhat;
  std::vector<std::uint8_t> tie;
};

TraceResult mortensen_trace(const ScalarField& value, double tie_rel = 1e-9);

/// Forward shooting over the constrained (projected Euler) dynamics. Each
/// cell of [0, xmax] keeps one incumbent: the cheapest path found so far whose
/// exact (off-grid) position lands in the cell. Values are therefore costs of
/// genuine admissible paths: upper bounds on the true constrained cost.
/// Empty cells hold +infinity.
struct ShootingResult {
  ScalarField cost;      // incumbent cost per (cell, time level)
  ScalarField position;  // exact landing position of the incumbent
};

ShootingResult constrained_cost_forward_shooting(const ProblemSpec& spec,
                                                 const GridSpec& grid,
                                                 double omega_bar, int n_omega);

/// Cheapest incumbent whose position lies within `window` of x at time column
/// tcol. If none, the window widens once (to 2x); if still empty, throws.
double shooting_value_near(const ShootingResult& res, double x, Eigen::Index tcol,
                           double window);

}  // namespace reflest::costcome
