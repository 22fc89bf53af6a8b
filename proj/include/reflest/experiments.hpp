#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "reflest/config.hpp"
#include "reflest/grid.hpp"
#include "reflest/scenario.hpp"

namespace reflest::experiments {

/// One numeric check outcome reported in the run summary.
struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;  // the measured quantity
  double bound = 0.0;  // the tolerance or threshold it was held against
  std::string note;    // comparison direction or extra context
};

struct RunReport {
  std::string experiment;
  std::vector<CheckResult> checks;
  std::vector<std::string> artifacts;  // files written, relative to out_dir

  bool all_pass() const;
};

/// Linear-quadratic scenario with synthetic observations: ydot(t) is the
/// noise-free observation c x0 exp(a t) plus a trigonometric perturbation of
/// amplitude `amp` whose coefficients are drawn deterministically from the
/// seed; y is the exact integral. The perturbation is analytic, so the
/// scenario still validates, and the Riccati oracle consumes the same ydot.
ProblemSpec synthetic_lq_scenario(double a, double c, double m, double sigma0,
                                  double x0, std::uint64_t seed,
                                  double amp = 0.25);

/// Minimum-energy Riccati pair for f = a x, h = c x, prior
/// (x - m0)^2 / (2 sigma0^2):
///   P' = 1 + 2 a P - c^2 P^2,   P(0) = sigma0^2,
///   m' = a m + P c (ydot - c m), m(0) = m0,
/// integrated by RK4 with `substeps` internal steps per grid step. Returns the
/// mean at the grid time nodes: the exact Mortensen trace for the
/// unconstrained problem, used as the filtering oracle on lq scenarios.
Eigen::VectorXd riccati_pair_mean(const ProblemSpec& spec, double a, double c,
                                  double m0, double sigma0, const GridSpec& grid,
                                  int substeps = 16);

/// Runs one experiment: writes artifacts, summary.json and log.txt under
/// cfg.out_dir, echoes the log to stdout when verbose. Returns 0 when every
/// check passes, 1 otherwise. ConfigError and IoError propagate to the
/// caller; the CLI maps them to exit codes 2 and 3. `threads` bounds the
/// worker count for independent ladder members (1 = serial).
int run(const config::ExperimentConfig& cfg, int threads, bool verbose,
        RunReport* report_out = nullptr);

}  // namespace reflest::experiments
