#include "reflest/grid.hpp"

#include <cmath>

namespace reflest {

namespace detail {

Eigen::Index axis_index(const Eigen::VectorXd& axis, double v, double tol) {
  if (axis.size() == 0) return -1;
  if (axis.size() == 1) return std::abs(axis[0] - v) <= tol ? 0 : -1;
  const double step = axis[1] - axis[0];
  const double s = (v - axis[0]) / step;
  const auto i = static_cast<Eigen::Index>(std::llround(s));
  if (i < 0 || i >= axis.size()) return -1;
  return std::abs(axis[i] - v) <= tol ? i : -1;
}

}  // namespace detail

double sup_diff(const ScalarField& a, const ScalarField& b, const Window& window) {
  double sup = 0.0;
  bool found = false;
  for (Eigen::Index n = 0; n < a.nts(); ++n) {
    const double t = a.ts[n];
    if (t < window.tlo - 1e-12 || t > window.thi + 1e-12) continue;
    const Eigen::Index nb = detail::axis_index(b.ts, t);
    if (nb < 0) continue;
    for (Eigen::Index i = 0; i < a.nxs(); ++i) {
      const double x = a.xs[i];
      if (x < window.xlo - 1e-12 || x > window.xhi + 1e-12) continue;
      const Eigen::Index ib = detail::axis_index(b.xs, x);
      if (ib < 0) continue;
      found = true;
      sup = std::max(sup, std::abs(a.values(i, n) - b.values(ib, nb)));
    }
  }
  if (!found) throw std::invalid_argument("sup_diff: no common nodes inside window");
  return sup;
}

double sup_abs(const ScalarField& field, const Window& window) {
  double sup = 0.0;
  bool found = false;
  for (Eigen::Index n = 0; n < field.nts(); ++n) {
    const double t = field.ts[n];
    if (t < window.tlo - 1e-12 || t > window.thi + 1e-12) continue;
    for (Eigen::Index i = 0; i < field.nxs(); ++i) {
      const double x = field.xs[i];
      if (x < window.xlo - 1e-12 || x > window.xhi + 1e-12) continue;
      found = true;
      sup = std::max(sup, std::abs(field.values(i, n)));
    }
  }
  if (!found) throw std::invalid_argument("sup_abs: no nodes inside window");
  return sup;
}

}  // namespace reflest
