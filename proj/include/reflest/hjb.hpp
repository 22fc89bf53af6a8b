#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "reflest/grid.hpp"
#include "reflest/scenario.hpp"

namespace reflest::hjb {

/// The Hamiltonians that appear across the estimation problems.
///   PenalizedCostToCome   1/2 l^2 + l f^k(x) - 1/2 (ydot - h)^2
///   S_eps                 1/2 l^2 + l (f - y h') - [h^2/2 + y((e/2)h'' + f h')
///                             - y^2 h'^2 / 2 + e (f' - y h'')]
///   S_limit               1/2 l^2 + l (f - y h') - h^2/2 - y f h' + y^2 h'^2 / 2
///   W_eps                 1/2 l^2 + l f - h^2/2 - e f' + (e/2) y h'' + ydot h
///   W_limit               1/2 l^2 + l f - h^2/2 + ydot h
///   W_eps_symmetrized     W_eps evaluated at (|x|, sgn(x) l); even in x
enum class HamiltonianKind {
  PenalizedCostToCome,
  S_eps,
  S_limit,
  W_eps,
  W_limit,
  W_eps_symmetrized,
};

struct Hamiltonian {
  HamiltonianKind kind = HamiltonianKind::W_limit;
  double eps = 0.0;  // consumed by the *_eps kinds
  std::optional<PenaltySpec> penalty;  // required by PenalizedCostToCome
};

/// Pointwise evaluation of the named Hamiltonian.
double eval_hamiltonian(const Hamiltonian& ham, const ProblemSpec& spec, double x,
                        double t, double lambda);

/// Raised when the explicit step violates the stability conditions
///   dt <= 0.9 dx^2 / (2 eps)   and   dt <= dx / max|dH/dlambda|.
struct CflError : std::runtime_error {
  double required_dt;
  CflError(const std::string& what, double req) : std::runtime_error(what), required_dt(req) {}
};

/// Result of a PDE solve. `field` is the restriction to [0, xmax]; for the
/// S-gauge kinds it already contains w + y(t) h(x). `extended` (kept on
/// request) is the raw working field on [-xmax, xmax] in the w gauge.
struct Solution {
  ScalarField field;
  ScalarField extended;
  bool has_extended = false;
  double max_alpha = 0.0;  // largest dissipation coefficient encountered
  int substeps = 1;
};

/// Explicit monotone marching for
///   dw/dt + H(x, t, dw/dx) = (eps/2) d2w/dx2
/// on the symmetric interval [-xmax, xmax]:
///   - W_eps / S_eps kinds use the symmetrized Hamiltonian with even initial
///     data w0(|x|); the constraint boundary at x = 0 is carried by the even
///     extension itself and the far ends use linear-extrapolation ghosts.
///   - S_eps output adds y(t) h(x) to the w-gauge solve; the second-order
///     boundary term is never discretized directly.
/// Gradients are discretized with Lax-Friedrichs dissipation, alpha tracked
/// from the current field's gradient range enlarged by 10%. Time marches in
/// `substeps` internal steps per stored level; the internal step must satisfy
/// the CFL conditions or CflError is thrown naming the required step.
Solution solve_viscous(const ProblemSpec& spec, HamiltonianKind kind, double eps,
                       const GridSpec& grid, int substeps = 1,
                       bool keep_extended = false);

/// Same marching with eps = 0. Accepts W_limit, S_limit (gauge added back) and
/// PenalizedCostToCome. The penalized kind solves the whole-line problem on
/// the symmetric interval with extrapolation ghosts at both ends and local
/// (per-node) dissipation, so the steep penalty wall does not smear the
/// admissible region.
Solution solve_inviscid(const ProblemSpec& spec, const Hamiltonian& ham,
                        const GridSpec& grid, int substeps = 1,
                        bool keep_extended = false);

/// Conservative estimate of the internal substep count needed for stability
/// on the given output grid.
int stable_substeps(const ProblemSpec& spec, const Hamiltonian& ham, double eps,
                    const GridSpec& grid);

/// Dispatches on ham.kind, picks substeps via stable_substeps, and retries
/// with doubled substeps (up to four times) if the dynamic CFL check still
/// trips. All stored output levels stay on grid's time nodes.
Solution solve_auto(const ProblemSpec& spec, const Hamiltonian& ham,
                    const GridSpec& grid, bool keep_extended = false);

/// Viscous solves along the eps ladder plus an inviscid reference on one
/// common output grid, compared on `window`.
struct SweepReport {
  std::vector<double> eps;
  std::vector<double> successive_gaps;  // |w^{e_{k+1}} - w^{e_k}|_window
  double gap_to_inviscid = 0.0;         // smallest-eps member vs inviscid limit
  double inviscid_two_grid = 0.0;       // |w_inv(dx) - w_inv(2 dx)|_window
  bool gaps_monotone = false;
};

SweepReport vanishing_viscosity_sweep(const ProblemSpec& spec, const GridSpec& grid,
                                      const std::vector<double>& eps_ladder,
                                      const Window& window);

/// A-priori sup bound and regularity quotients for w^eps on Q_R = [0,R]x[0,T].
/// Both printed right-hand sides are evaluated; the larger one is binding.
/// Preconditions: R <= xmax and eps < min(1/(32 R^4), 1/(2 R^2)).
struct BoundsReport {
  double R = 0.0;
  double eps = 0.0;
  double eps_gate = 0.0;       // min(1/(32 R^4), 1/(2 R^2))
  double sup_measured = 0.0;   // sup |w^eps| on Q_R
  double rhs_g_form = 0.0;     // |w0| + [8(1+|g|) + |V^eps| + 1] T + 1
  double rhs_f2_form = 0.0;    // |w0| + [8(1+|f|^2) + |V^eps| + 1] T + 1
  double rhs_binding = 0.0;    // max of the two
  bool bound_ok = false;       // sup_measured <= rhs_binding
  double lip_x_quotient = 0.0;     // max |w(x+dx,t) - w(x,t)| / dx on Q_R
  double holder_t_quotient = 0.0;  // max |w(x,t)-w(x,s)| / (sqrt|t-s| + |t-s|)
  double w0_sup = 0.0;
  double g_sup = 0.0;
  double f_sup = 0.0;
  double v_eps_sup = 0.0;
};

BoundsReport check_bounds(const ProblemSpec& spec, double eps, const GridSpec& grid,
                          double R);

}  // namespace reflest::hjb
