#include "reflest/skorokhod.hpp"

#include <cmath>
#include <stdexcept>

namespace reflest::skorokhod {

namespace {

void require_admissible_start(double x0) {
  if (!(x0 >= 0.0))
    throw std::invalid_argument("skorokhod: initial state must satisfy x0 >= 0");
}

int penalized_substeps(const ProblemSpec& spec, const PenaltySpec& pen, double dt) {
  const double stiffness = 2.0 * pen.kappa + spec.bounds.f_lip;
  return std::max(1, static_cast<int>(std::ceil(2.0 * dt * stiffness)));
}

}  // namespace

ControlSignal ControlSignal::sampled(const RealFn& fn, double T, int nt) {
  if (nt < 1) throw std::invalid_argument("ControlSignal: nt must be at least 1");
  ControlSignal c;
  c.ts = Eigen::VectorXd::LinSpaced(nt + 1, 0.0, T);
  c.omega.resize(nt);
  const double dt = T / nt;
  for (int n = 0; n < nt; ++n) c.omega[n] = fn((n + 0.5) * dt);
  c.source = fn;
  return c;
}

ControlSignal ControlSignal::constant(double value, double T, int nt) {
  return sampled([value](double) { return value; }, T, nt);
}

ControlSignal ControlSignal::refined(int factor) const {
  if (factor < 1) throw std::invalid_argument("ControlSignal: factor must be positive");
  const int nt = steps() * factor;
  const double T = ts[ts.size() - 1];
  if (source) return sampled(source, T, nt);
  ControlSignal c;
  c.ts = Eigen::VectorXd::LinSpaced(nt + 1, ts[0], T);
  c.omega.resize(nt);
  for (int n = 0; n < nt; ++n) c.omega[n] = omega[n / factor];
  return c;
}

SkorokhodSolution solve_explicit(double x0, const ControlSignal& control) {
  require_admissible_start(x0);
  const int nt = control.steps();
  const double dt = control.dt();
  SkorokhodSolution sol;
  sol.ts = control.ts;
  sol.x.resize(nt + 1);
  sol.delta.resize(nt + 1);
  sol.unconstrained.resize(nt + 1);
  double big_omega = 0.0;
  double running_min = x0;
  for (int n = 0; n <= nt; ++n) {
    if (n > 0) big_omega += dt * control.omega[n - 1];
    const double free_state = x0 + big_omega;
    running_min = std::min(running_min, free_state);
    sol.unconstrained[n] = free_state;
    sol.delta[n] = std::min(0.0, running_min);
    sol.x[n] = free_state - sol.delta[n];
  }
  return sol;
}

SkorokhodSolution solve_vi(const ProblemSpec& spec, double x0, const ControlSignal& control) {
  require_admissible_start(x0);
  const int nt = control.steps();
  const double dt = control.dt();
  SkorokhodSolution sol;
  sol.ts = control.ts;
  sol.x.resize(nt + 1);
  sol.delta.resize(nt + 1);
  sol.x[0] = x0;
  sol.delta[0] = 0.0;
  for (int n = 0; n < nt; ++n) {
    const double predicted = sol.x[n] + dt * (spec.f(sol.x[n]) + control.omega[n]);
    sol.x[n + 1] = std::max(0.0, predicted);
    sol.delta[n + 1] = sol.delta[n] + std::min(0.0, predicted);
  }
  return sol;
}

StatePath solve_penalized(const ProblemSpec& spec, const PenaltySpec& pen, double x0,
                          const ControlSignal& control) {
  pen.validate();
  const int nt = control.steps();
  const double dt = control.dt();
  const int sub = penalized_substeps(spec, pen, dt);
  const double dts = dt / sub;
  StatePath path;
  path.ts = control.ts;
  path.x.resize(nt + 1);
  path.x[0] = x0;
  for (int n = 0; n < nt; ++n) {
    double x = path.x[n];
    for (int k = 0; k < sub; ++k)
      x += dts * (eval_penalized_drift(spec, pen, x) + control.omega[n]);
    path.x[n + 1] = x;
  }
  return path;
}

StatePath solve_penalized_reverse(const ProblemSpec& spec, const PenaltySpec& pen,
                                  double terminal_x, const ControlSignal& control) {
  pen.validate();
  const int nt = control.steps();
  const double dt = control.dt();
  const int sub = penalized_substeps(spec, pen, dt);
  const double dts = dt / sub;
  StatePath path;
  path.ts = control.ts;
  path.x.resize(nt + 1);
  path.x[nt] = terminal_x;
  for (int n = nt; n > 0; --n) {
    double x = path.x[n];
    for (int k = 0; k < sub; ++k)
      x -= dts * (eval_penalized_drift(spec, pen, x) + control.omega[n - 1]);
    path.x[n - 1] = x;
  }
  return path;
}

std::vector<double> penalization_gap(const ProblemSpec& spec, double x0,
                                     const ControlSignal& control,
                                     const std::vector<double>& kappas) {
  require_admissible_start(x0);
  const int nt = control.steps();

  // Reference constrained path on the control's time nodes.
  Eigen::VectorXd ref(nt + 1);
  if (spec.bounds.f_sup == 0.0) {
    ref = solve_explicit(x0, control).x;
  } else {
    const int factor = 4;
    const auto fine = solve_vi(spec, x0, control.refined(factor));
    for (int n = 0; n <= nt; ++n) ref[n] = fine.x[static_cast<Eigen::Index>(n) * factor];
  }

  std::vector<double> gaps;
  gaps.reserve(kappas.size());
  for (double kappa : kappas) {
    const auto path = solve_penalized(spec, PenaltySpec{kappa}, x0, control);
    gaps.push_back((path.x - ref).cwiseAbs().maxCoeff());
  }
  return gaps;
}

}  // namespace reflest::skorokhod
