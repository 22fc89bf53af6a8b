#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace reflest {

/// Uniform space-time grid on [0, xmax] x [0, T].
/// Solvers that need the mirrored interval [-xmax, xmax] build it themselves;
/// nx always counts cells on the physical half [0, xmax].
struct GridSpec {
  double xmax = 1.0;
  int nx = 64;  // space cells on [0, xmax]; nodes = nx + 1
  double T = 1.0;
  int nt = 64;  // time steps; levels = nt + 1

  double dx() const { return xmax / nx; }
  double dt() const { return T / nt; }

  void validate() const {
    if (!(xmax > 0.0)) throw std::invalid_argument("GridSpec: xmax must be positive");
    if (nx < 8) throw std::invalid_argument("GridSpec: nx must be at least 8");
    if (nt < 1) throw std::invalid_argument("GridSpec: nt must be at least 1");
    if (!(T > 0.0)) throw std::invalid_argument("GridSpec: T must be positive");
  }

  /// Nodes 0..nx on [0, xmax].
  Eigen::VectorXd half_nodes() const {
    return Eigen::VectorXd::LinSpaced(nx + 1, 0.0, xmax);
  }

  /// Nodes -nx..nx on [-xmax, xmax]; node nx sits exactly at x = 0.
  Eigen::VectorXd full_nodes() const {
    return Eigen::VectorXd::LinSpaced(2 * nx + 1, -xmax, xmax);
  }

  Eigen::VectorXd time_nodes() const {
    return Eigen::VectorXd::LinSpaced(nt + 1, 0.0, T);
  }
};

/// Nodal samples of a scalar function of (x, t).
/// values(i, n) is the sample at xs[i], ts[n].
struct ScalarField {
  Eigen::VectorXd xs;
  Eigen::VectorXd ts;
  Eigen::MatrixXd values;

  ScalarField() = default;
  ScalarField(Eigen::VectorXd x, Eigen::VectorXd t)
      : xs(std::move(x)), ts(std::move(t)),
        values(Eigen::MatrixXd::Zero(xs.size(), ts.size())) {}

  Eigen::Index nxs() const { return xs.size(); }
  Eigen::Index nts() const { return ts.size(); }

  double dx() const { return xs.size() > 1 ? xs[1] - xs[0] : 0.0; }
  double dt() const { return ts.size() > 1 ? ts[1] - ts[0] : 0.0; }

  /// Linear interpolation in x at a fixed time level (clamped to the axis range).
  double interp_x(double x, Eigen::Index n) const {
    const Eigen::Index m = xs.size();
    if (x <= xs[0]) return values(0, n);
    if (x >= xs[m - 1]) return values(m - 1, n);
    const double s = (x - xs[0]) / dx();
    const auto i = static_cast<Eigen::Index>(s);
    const double w = s - static_cast<double>(i);
    return (1.0 - w) * values(i, n) + w * values(i + 1, n);
  }

  /// Restriction to the nodes with xs >= 0; used by symmetric-interval solvers
  /// to hand back the physical half.
  ScalarField nonnegative_half() const {
    Eigen::Index first = 0;
    while (first < xs.size() && xs[first] < -1e-14) ++first;
    ScalarField out;
    out.xs = xs.segment(first, xs.size() - first);
    out.ts = ts;
    out.values = values.bottomRows(xs.size() - first);
    return out;
  }
};

/// Closed comparison window in (x, t).
struct Window {
  double xlo = 0.0, xhi = 1.0;
  double tlo = 0.0, thi = 1.0;

  bool contains(double x, double t) const {
    return x >= xlo - 1e-12 && x <= xhi + 1e-12 && t >= tlo - 1e-12 && t <= thi + 1e-12;
  }
};

/// Sup of |a - b| over nodes of `a` that fall inside `window`.
/// Both fields must be sampled on node-compatible axes: every (x, t) node of
/// `a` inside the window must exist in `b` up to 1e-9 (coarse-in-fine layouts
/// from grid halving satisfy this).
double sup_diff(const ScalarField& a, const ScalarField& b, const Window& window);

/// Sup of |field| over window nodes.
double sup_abs(const ScalarField& field, const Window& window);

namespace detail {
/// Index of `v` in the uniform axis `axis`, or -1 when no node matches within tol.
Eigen::Index axis_index(const Eigen::VectorXd& axis, double v, double tol = 1e-9);
}  // namespace detail

}  // namespace reflest
