#include "reflest/costcome.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "reflest/hjb.hpp"

namespace reflest::costcome {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

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

ScalarField cost_to_come_hjb(const ProblemSpec& spec, const PenaltySpec& pen,
                             const GridSpec& grid) {
  pen.validate();
  const hjb::Hamiltonian ham{hjb::HamiltonianKind::PenalizedCostToCome, 0.0, pen};
  return hjb::solve_auto(spec, ham, grid).field;
}

double default_omega_bar(const ProblemSpec& spec, const GridSpec& grid) {
  return 2.0 * (spec.bounds.f_sup + grid.xmax / grid.T + spec.bounds.ydot_sup +
                spec.bounds.h_sup);
}

ScalarField cost_to_come_dp_oracle(const ProblemSpec& spec, const PenaltySpec& pen,
                                   const GridSpec& grid, double omega_bar,
                                   int n_omega) {
  grid.validate();
  pen.validate();
  if (n_omega < 2) throw std::invalid_argument("dp_oracle: n_omega must be >= 2");
  if (!(omega_bar > 0.0)) {
    throw std::invalid_argument("dp_oracle: omega_bar must be positive");
  }

  const Eigen::VectorXd zs = grid.full_nodes();
  const Eigen::VectorXd ts = grid.time_nodes();
  const Eigen::Index m = zs.size();
  const double dt = grid.dt();
  const double dw = 2.0 * omega_bar / n_omega;

  Eigen::VectorXd fk(m), hz(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    fk[i] = eval_penalized_drift(spec, pen, zs[i]);
    hz[i] = spec.h(zs[i]);
  }

  ScalarField out;
  out.xs = grid.half_nodes();
  out.ts = ts;
  out.values.resize(grid.nx + 1, grid.nt + 1);

  Eigen::VectorXd u(m), unext(m);
  for (Eigen::Index i = 0; i < m; ++i) u[i] = spec.psi(zs[i]);
  out.values.col(0) = u.segment(grid.nx, grid.nx + 1);

  for (int n = 1; n <= grid.nt; ++n) {
    const double t = ts[n];
    const double yd = spec.ydot(t);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double resid = yd - hz[i];
      const double state_cost = 0.5 * resid * resid;
      double best = kInf;
      for (int k = 0; k <= n_omega; ++k) {
        const double w = -omega_bar + k * dw;
        const double zprev = zs[i] - dt * (fk[i] + w);
        const double cand =
            clamped_interp(zs, u, zprev) + dt * (0.5 * w * w + state_cost);
        best = std::min(best, cand);
      }
      unext[i] = best;
    }
    u.swap(unext);
    out.values.col(n) = u.segment(grid.nx, grid.nx + 1);
  }
  return out;
}

TraceResult mortensen_trace(const ScalarField& value, double tie_rel) {
  const Eigen::Index m = value.nxs();
  if (m < 3) throw std::invalid_argument("mortensen_trace: need >= 3 space nodes");
  TraceResult res;
  res.ts = value.ts;
  res.xhat.resize(value.nts());
  res.tie.assign(static_cast<std::size_t>(value.nts()), 0);

  const double dx = value.dx();
  for (Eigen::Index n = 0; n < value.nts(); ++n) {
    Eigen::Index imin = 0;
    double vmin = value.values(0, n);
    for (Eigen::Index i = 1; i < m; ++i) {
      if (value.values(i, n) < vmin) {
        vmin = value.values(i, n);
        imin = i;
      }
    }
    // A second near-minimum away from imin marks an ambiguous estimate.
    const double tol = tie_rel * (1.0 + std::abs(vmin));
    for (Eigen::Index i = 0; i < m; ++i) {
      if (std::abs(i - imin) >= 2 && value.values(i, n) <= vmin + tol) {
        res.tie[static_cast<std::size_t>(n)] = 1;
        break;
      }
    }

    double xhat = value.xs[imin];
    if (imin > 0 && imin < m - 1) {
      const double vl = value.values(imin - 1, n);
      const double vr = value.values(imin + 1, n);
      const double denom = vl - 2.0 * vmin + vr;
      if (denom > 0.0) {
        double off = 0.5 * (vl - vr) / denom * dx;
        off = std::clamp(off, -dx, dx);
        xhat += off;
      }
    }
    res.xhat[n] = xhat;
  }
  return res;
}

ShootingResult constrained_cost_forward_shooting(const ProblemSpec& spec,
                                                 const GridSpec& grid,
                                                 double omega_bar, int n_omega) {
  grid.validate();
  if (n_omega < 2) throw std::invalid_argument("shooting: n_omega must be >= 2");
  if (!(omega_bar > 0.0)) {
    throw std::invalid_argument("shooting: omega_bar must be positive");
  }

  const Eigen::VectorXd xs = grid.half_nodes();
  const Eigen::VectorXd ts = grid.time_nodes();
  const Eigen::Index m = xs.size();
  const double dt = grid.dt();
  const double dx = grid.dx();
  const double dw = 2.0 * omega_bar / n_omega;

  ShootingResult res;
  res.cost.xs = xs;
  res.cost.ts = ts;
  res.cost.values.setConstant(m, grid.nt + 1, kInf);
  res.position.xs = xs;
  res.position.ts = ts;
  res.position.values.setConstant(m, grid.nt + 1,
                                  std::numeric_limits<double>::quiet_NaN());

  for (Eigen::Index i = 0; i < m; ++i) {
    res.cost.values(i, 0) = spec.psi(xs[i]);
    res.position.values(i, 0) = xs[i];
  }

  for (int n = 1; n <= grid.nt; ++n) {
    const double t = ts[n];
    const double yd = spec.ydot(t);
    auto cost_prev = res.cost.values.col(n - 1);
    auto pos_prev = res.position.values.col(n - 1);
    auto cost_next = res.cost.values.col(n);
    auto pos_next = res.position.values.col(n);
    for (Eigen::Index i = 0; i < m; ++i) {
      if (!std::isfinite(cost_prev[i])) continue;
      const double x = pos_prev[i];
      const double c0 = cost_prev[i];
      const double fx = spec.f(x);
      for (int k = 0; k <= n_omega; ++k) {
        const double w = -omega_bar + k * dw;
        const double xn = std::max(0.0, x + dt * (fx + w));
        if (xn > grid.xmax) continue;
        const double resid = yd - spec.h(xn);
        const double cn = c0 + dt * (0.5 * w * w + 0.5 * resid * resid);
        const auto j = static_cast<Eigen::Index>(std::llround(xn / dx));
        if (j < 0 || j >= m) continue;
        if (cn < cost_next[j]) {
          cost_next[j] = cn;
          pos_next[j] = xn;
        }
      }
    }
  }
  return res;
}

double shooting_value_near(const ShootingResult& res, double x, Eigen::Index tcol,
                           double window) {
  if (tcol < 0 || tcol >= res.cost.nts()) {
    throw std::invalid_argument("shooting_value_near: time column out of range");
  }
  for (const double win : {window, 2.0 * window}) {
    double best = kInf;
    for (Eigen::Index i = 0; i < res.cost.nxs(); ++i) {
      const double pos = res.position.values(i, tcol);
      if (std::isfinite(res.cost.values(i, tcol)) && std::abs(pos - x) <= win) {
        best = std::min(best, res.cost.values(i, tcol));
      }
    }
    if (best < kInf) return best;
  }
  std::ostringstream msg;
  msg << "shooting_value_near: no admissible path lands within " << 2.0 * window
      << " of x = " << x << " at t = " << res.cost.ts[tcol];
  throw std::runtime_error(msg.str());
}

}  // namespace reflest::costcome
