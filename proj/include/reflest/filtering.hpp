#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "reflest/grid.hpp"
#include "reflest/scenario.hpp"

namespace reflest::filtering {

/// Deterministic per-stream normal generator: a mt19937_64 engine seeded from
/// (master seed, stream id) feeding a Box-Muller transform. Avoids
/// std::normal_distribution so that identical seeds give bit-identical noise
/// on every platform.
class GaussianStream {
 public:
  GaussianStream(std::uint64_t master_seed, std::uint64_t stream);
  double next();

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// One realization of the reflected state with its pushing process and
/// observation integral. X stays nonnegative by projection; K accumulates the
/// (nonpositive) clipped amounts so that X + K = xi + sqrt(eps) B holds
/// pathwise to machine precision; Y integrates h(X) by the midpoint rule plus
/// independent observation noise.
struct FilterPath {
  Eigen::VectorXd times;
  Eigen::VectorXd X;
  Eigen::VectorXd Y;
  Eigen::VectorXd K;
  std::uint64_t seed = 0;
};

FilterPath simulate_reflected_sde(const ProblemSpec& spec, double eps, double xi,
                                  const GridSpec& grid, std::uint64_t seed);

enum class Gauge { q, p };
enum class TransformDirection { q_to_p, p_to_q };

/// Unnormalized filtering density on the half domain [0, xmax], tagged by
/// gauge: q solves the Zakai equation with Neumann boundary, p = exp(-y h/eps) q
/// solves the robust equation with its Robin boundary.
struct DensityField {
  ScalarField field;
  Gauge gauge = Gauge::q;
};

/// One splitting step of the Zakai equation: a conservative finite-volume
/// heat step with zero-flux (Neumann) ends and drift f upwinded in flux form,
/// followed by the exponential multiplicative update
/// exp[(h/eps) dY - (h^2/(2 eps)) dt]. Preserves nonnegativity; conserves mass
/// exactly when h = 0 and f = 0. Throws CflError when dt violates the
/// explicit stability limit.
Eigen::VectorXd zakai_step(const Eigen::VectorXd& q, const ProblemSpec& spec,
                           double eps, const GridSpec& grid, double dY, double dt);

/// Marches the Zakai equation on [0, xmax] from the initial density q0 using
/// the observation increments of the scenario path y. `substeps` internal
/// steps are taken per stored level.
DensityField zakai_solve(const ProblemSpec& spec, double eps,
                         const GridSpec& grid, const Eigen::VectorXd& q0,
                         int substeps = 1);

/// Smallest substep counts that satisfy the explicit stability limits of the
/// two marchers on the given grid.
int zakai_substeps(const ProblemSpec& spec, double eps, const GridSpec& grid);
int robust_substeps(const ProblemSpec& spec, double eps, const GridSpec& grid);

/// Marches the robust equation for p directly:
///   dp/dt = y h' p_x + (eps/2) p_xx - (1/eps) [h^2/2 - (eps/2) y h''
///            - (y h')^2/2] p
/// with the Robin ghost (eps/2) p_x(0) + (y h'(0)/2) p(0) = 0 at the corner
/// and a zero-slope ghost at xmax. Cross-validates the transformed Zakai
/// solution.
DensityField robust_pde_solve(const ProblemSpec& spec, double eps,
                              const GridSpec& grid, const Eigen::VectorXd& p0,
                              int substeps = 1);

/// Exact pointwise gauge change p = exp(-y(t) h(x)/eps) q (and its inverse).
/// The input tag must match the direction source.
DensityField robust_transform(const DensityField& in, const ProblemSpec& spec,
                              double eps, TransformDirection direction);

/// S = -eps log p with p floored at 1e-300; nodes at or below the floor are
/// reported in `flagged` as (space index, time index).
struct HopfColeResult {
  ScalarField S;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> flagged;
};

HopfColeResult hopf_cole(const DensityField& p, double eps);
DensityField hopf_cole_inverse(const ScalarField& S, double eps);

/// Per-time mass, normalized mean and variance of a q-gauge density.
struct DensityMoments {
  Eigen::VectorXd mass;
  Eigen::VectorXd mean;
  Eigen::VectorXd var;
};

DensityMoments density_moments(const DensityField& q);

/// Initial law |x0 + sigma0 Z|, Z standard normal: the folded Gaussian. Its
/// density has zero slope at the origin, so it is admissible Neumann data and
/// exactly samplable, which keeps the particle and PDE filters comparable.
struct InitialLaw {
  double x0 = 1.0;
  double sigma0 = 0.5;
};

Eigen::VectorXd folded_gaussian_density(const InitialLaw& law,
                                        const Eigen::VectorXd& xs);

/// Weighted-ensemble summary per time level.
struct EnsembleSummary {
  Eigen::VectorXd ts;
  Eigen::VectorXd mean;
  Eigen::VectorXd var;
  Eigen::VectorXd ess;
};

/// Bootstrap particle filter: reflected Euler-Maruyama propagation with
/// per-slot noise streams derived from the master seed, weight update
/// exp[(h/eps) dY - (h^2/(2 eps)) dt], systematic resampling when the
/// effective sample size drops below n/2. Throws when the ESS collapses
/// below 5. y_path holds the observation at the grid time nodes.
EnsembleSummary particle_filter_oracle(const ProblemSpec& spec, double eps,
                                       int n_particles, const GridSpec& grid,
                                       const Eigen::VectorXd& y_path,
                                       std::uint64_t seed,
                                       const InitialLaw& init);

/// Small-noise asymptotics of the penalized (whole-line) Zakai solution
/// against the penalized cost-to-come: for each eps in the ladder, evolves
/// q^{kappa,eps} from exp(-psi/eps), and measures
///   d_eps = sup over the window of |shifted(-eps log q) - shifted(V^kappa)|
/// where both fields are shifted by their minimum on each time slice (q is
/// unnormalized, so only the per-time shape is pinned).
struct SmallNoiseReport {
  std::vector<double> eps;
  std::vector<double> gaps;
  bool nonincreasing = false;
};

SmallNoiseReport small_noise_check(const ProblemSpec& spec,
                                   const PenaltySpec& pen,
                                   const std::vector<double>& eps_ladder,
                                   const GridSpec& grid, const Window& window);

}  // namespace reflest::filtering
