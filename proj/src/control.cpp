#include "reflest/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "reflest/costcome.hpp"

namespace reflest::control {
namespace {

double clamped_interp(const Eigen::VectorXd& zs, const Eigen::VectorXd& u, double z) {
  const Eigen::Index m = zs.size();
  if (z <= zs[0]) return u[0];
  if (z >= zs[m - 1]) return u[m - 1];
  const double dz = zs[1] - zs[0];
  const double s = (z - zs[0]) / dz;
  const auto i = std::min<Eigen::Index>(static_cast<Eigen::Index>(s), m - 2);
  const double w = s - static_cast<double>(i);
  return (1.0 - w) * u[i] + w * u[i + 1];
}

}  // namespace

ScalarField backward_value_dp(const ProblemSpec& spec, const GridSpec& grid,
                              double omega_bar, int n_omega) {
  grid.validate();
  if (spec.bounds.f_sup != 0.0) {
    throw std::invalid_argument(
        "backward_value_dp: the backward control problem is stated for "
        "driftless reflected dynamics (f = 0)");
  }
  if (n_omega < 2) {
    throw std::invalid_argument("backward_value_dp: n_omega must be >= 2");
  }
  if (!(omega_bar > 0.0)) {
    throw std::invalid_argument("backward_value_dp: omega_bar must be positive");
  }

  const Eigen::VectorXd xs = grid.half_nodes();
  const Eigen::VectorXd ts = grid.time_nodes();
  const Eigen::Index m = xs.size();
  const double dt = grid.dt();
  const double dw = 2.0 * omega_bar / n_omega;

  Eigen::VectorXd hx(m);
  for (Eigen::Index i = 0; i < m; ++i) hx[i] = spec.h(xs[i]);

  ScalarField out;
  out.xs = xs;
  out.ts = ts;
  out.values.resize(m, grid.nt + 1);

  Eigen::VectorXd u(m), unext(m);
  for (Eigen::Index i = 0; i < m; ++i) u[i] = spec.psi(xs[i]);
  out.values.col(0) = u;

  for (int n = 1; n <= grid.nt; ++n) {
    const double yd = spec.ydot(ts[n]);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double obs_cost = 0.5 * hx[i] * hx[i] - yd * hx[i];
      double best = std::numeric_limits<double>::infinity();
      for (int k = 0; k <= n_omega; ++k) {
        const double w = -omega_bar + k * dw;
        const double zprev = std::max(0.0, xs[i] - dt * w);
        const double cand =
            clamped_interp(xs, u, zprev) + dt * (0.5 * w * w + obs_cost);
        best = std::min(best, cand);
      }
      unext[i] = best;
    }
    u.swap(unext);
    out.values.col(n) = u;
  }
  return out;
}

double identify_with_limit(const ScalarField& W, const ScalarField& w,
                           const Window& window) {
  if (W.nxs() != w.nxs() || W.nts() != w.nts()) {
    throw std::invalid_argument("identify_with_limit: grid mismatch");
  }
  return sup_diff(W, w, window);
}

Eigen::VectorXd observation_energy(const ProblemSpec& spec, const GridSpec& grid) {
  const Eigen::VectorXd ts = grid.time_nodes();
  Eigen::VectorXd energy(ts.size());
  energy[0] = 0.0;
  const int sub = 16;
  for (Eigen::Index n = 1; n < ts.size(); ++n) {
    const double a = ts[n - 1], b = ts[n];
    const double h = (b - a) / sub;
    double acc = 0.0;
    for (int k = 0; k < sub; ++k) {
      const double y0 = spec.ydot(a + k * h);
      const double y1 = spec.ydot(a + (k + 1) * h);
      acc += 0.25 * (y0 * y0 + y1 * y1) * h;
    }
    energy[n] = energy[n - 1] + acc;
  }
  return energy;
}

BoundaryTable boundary_discrepancy_table(const ProblemSpec& spec,
                                         const PenaltySpec& pen,
                                         const GridSpec& grid, double omega_bar,
                                         int n_omega,
                                         const std::vector<double>& xs,
                                         const std::vector<double>& ts) {
  if (xs.empty() || ts.empty()) {
    throw std::invalid_argument("boundary_discrepancy_table: empty sample lists");
  }
  const ScalarField W = backward_value_dp(spec, grid, omega_bar, n_omega);
  const Eigen::VectorXd energy = observation_energy(spec, grid);
  const ScalarField vpen = costcome::cost_to_come_hjb(spec, pen, grid);
  const auto shoot =
      costcome::constrained_cost_forward_shooting(spec, grid, omega_bar, n_omega);

  const auto snap = [](const Eigen::VectorXd& axis, double v) {
    Eigen::Index best = 0;
    double dist = std::abs(axis[0] - v);
    for (Eigen::Index i = 1; i < axis.size(); ++i) {
      if (std::abs(axis[i] - v) < dist) {
        dist = std::abs(axis[i] - v);
        best = i;
      }
    }
    return best;
  };

  BoundaryTable table;
  for (double tq : ts) {
    const Eigen::Index n = snap(W.ts, tq);
    for (double xq : xs) {
      const Eigen::Index i = snap(W.xs, xq);
      BoundaryRow row;
      row.x = W.xs[i];
      row.t = W.ts[n];
      row.w_value = W.values(i, n) + energy[n];
      row.v_penalized = vpen.values(i, n);
      row.v_constrained =
          costcome::shooting_value_near(shoot, row.x, n, grid.dx());
      row.gap = std::abs(row.v_constrained - row.w_value);
      table.rows.push_back(row);
    }
  }
  return table;
}

}  // namespace reflest::control
