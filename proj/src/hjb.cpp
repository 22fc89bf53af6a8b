#include "reflest/hjb.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace reflest::hjb {
namespace {

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Node-wise data for one marching problem. The time-dependent potential is
// assembled per step as V(x,t) = A(x) + ydot(t) B(x) + E ydot(t)^2 so the
// coefficient callables are evaluated once.
struct NodeArrays {
  Eigen::VectorXd g;      // advective coefficient in 1/2 l^2 + l g - V
  Eigen::VectorXd A, B;
  double E = 0.0;         // multiplies ydot(t)^2
  Eigen::VectorXd winit;  // initial data on the full grid
  Eigen::VectorXd h_gauge;  // h(x) on the full grid, for S-gauge output
  bool gauge_add = false;
  bool local_alpha = false;
};

NodeArrays build_arrays(const ProblemSpec& spec, const Hamiltonian& ham,
                        const Eigen::VectorXd& xs) {
  const auto n = xs.size();
  NodeArrays arr;
  arr.g.resize(n);
  arr.A.resize(n);
  arr.B.resize(n);
  arr.winit.resize(n);
  arr.h_gauge.resize(n);

  switch (ham.kind) {
    case HamiltonianKind::W_eps:
    case HamiltonianKind::W_eps_symmetrized:
    case HamiltonianKind::S_eps:
      // Symmetrized viscous w-Hamiltonian: even in x, odd advection. The
      // marched potential carries no y h'' term: substituting S = w + y h
      // into the S-gauge Hamiltonian cancels it exactly, and the robust
      // (pathwise) filtering equation requires the cancelled form. The
      // pointwise display evaluated by eval_hamiltonian is unaffected.
      for (Eigen::Index i = 0; i < n; ++i) {
        const double a = std::abs(xs[i]);
        arr.g[i] = sgn(xs[i]) * spec.f(a);
        arr.A[i] = 0.5 * spec.h(a) * spec.h(a) + ham.eps * spec.fprime(a);
        arr.B[i] = -spec.h(a);
        arr.winit[i] = spec.w0(a);
        arr.h_gauge[i] = spec.h(a);
      }
      arr.gauge_add = (ham.kind == HamiltonianKind::S_eps);
      break;
    case HamiltonianKind::W_limit:
    case HamiltonianKind::S_limit:
      for (Eigen::Index i = 0; i < n; ++i) {
        const double a = std::abs(xs[i]);
        arr.g[i] = sgn(xs[i]) * spec.f(a);
        arr.A[i] = 0.5 * spec.h(a) * spec.h(a);
        arr.B[i] = -spec.h(a);
        arr.winit[i] = spec.w0(a);
        arr.h_gauge[i] = spec.h(a);
      }
      arr.gauge_add = (ham.kind == HamiltonianKind::S_limit);
      break;
    case HamiltonianKind::PenalizedCostToCome: {
      if (!ham.penalty) {
        throw std::invalid_argument(
            "solve: PenalizedCostToCome requires a PenaltySpec");
      }
      const PenaltySpec& pen = *ham.penalty;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double x = xs[i];
        arr.g[i] = eval_penalized_drift(spec, pen, x);
        arr.A[i] = 0.5 * spec.h(x) * spec.h(x);
        arr.B[i] = -spec.h(x);
        arr.winit[i] = spec.psi(x);
        arr.h_gauge[i] = spec.h(x);
      }
      arr.E = 0.5;
      arr.local_alpha = true;  // keep the penalty wall from smearing x > 0
      break;
    }
  }
  return arr;
}

Solution run_scheme(const ProblemSpec& spec, const Hamiltonian& ham, double eps,
                    const GridSpec& grid, int substeps, bool keep_extended) {
  grid.validate();
  if (substeps < 1) throw std::invalid_argument("run_scheme: substeps must be >= 1");
  const Eigen::VectorXd xs = grid.full_nodes();
  const Eigen::VectorXd ts = grid.time_nodes();
  const Eigen::Index n = xs.size();
  const Eigen::Index last = n - 1;
  const double dx = grid.dx();
  const double dt = grid.dt() / static_cast<double>(substeps);

  if (eps > 0.0) {
    const double dt_diff = 0.9 * dx * dx / (2.0 * eps);
    if (dt > dt_diff) {
      std::ostringstream msg;
      msg << "CFL violation: diffusion requires dt <= " << dt_diff << ", got " << dt;
      throw CflError(msg.str(), dt_diff);
    }
  }

  NodeArrays arr = build_arrays(spec, ham, xs);

  Solution sol;
  sol.substeps = substeps;
  sol.field.xs = grid.half_nodes();
  sol.field.ts = ts;
  sol.field.values.resize(grid.nx + 1, grid.nt + 1);
  if (keep_extended) {
    sol.extended.xs = xs;
    sol.extended.ts = ts;
    sol.extended.values.resize(n, grid.nt + 1);
    sol.has_extended = true;
  }

  Eigen::VectorXd w = arr.winit;
  Eigen::VectorXd wnew(n), V(n), lamM(n), lamP(n);

  const auto store = [&](int col, double t) {
    sol.field.values.col(col) = w.segment(grid.nx, grid.nx + 1);
    if (arr.gauge_add) {
      sol.field.values.col(col) +=
          spec.y(t) * arr.h_gauge.segment(grid.nx, grid.nx + 1);
    }
    if (keep_extended) sol.extended.values.col(col) = w;
  };
  store(0, 0.0);

  const double diff_coeff = (eps > 0.0) ? 0.5 * eps * dt / (dx * dx) : 0.0;
  const double g_max = arr.g.cwiseAbs().maxCoeff();

  for (int col = 0; col < grid.nt; ++col) {
    for (int s = 0; s < substeps; ++s) {
      const double t = (static_cast<double>(col) * substeps + s) * dt;
      const double ydn = spec.ydot(t);
      V = arr.A + ydn * arr.B;
      const double v0 = arr.E * ydn * ydn;

      // One-sided gradients with linear-extrapolation ghosts at the far ends
      // (the ghost second difference vanishes, so diffusion sees outflow).
      for (Eigen::Index i = 1; i < n; ++i) lamM[i] = (w[i] - w[i - 1]) / dx;
      lamM[0] = lamM[1];
      for (Eigen::Index i = 0; i < last; ++i) lamP[i] = lamM[i + 1];
      lamP[last] = lamM[last];

      const double lam_range =
          std::max(lamM.cwiseAbs().maxCoeff(), lamP.cwiseAbs().maxCoeff());
      const double alpha_max = 1.1 * lam_range + g_max;
      sol.max_alpha = std::max(sol.max_alpha, alpha_max);
      if (dt > dx / alpha_max) {
        std::ostringstream msg;
        msg << "CFL violation: advection requires dt <= " << dx / alpha_max
            << " (alpha = " << alpha_max << "), got " << dt;
        throw CflError(msg.str(), dx / alpha_max);
      }

      for (Eigen::Index i = 0; i < n; ++i) {
        const double lm = lamM[i];
        const double lp = lamP[i];
        const double lb = 0.5 * (lm + lp);
        const double alpha =
            arr.local_alpha
                ? 1.1 * std::max(std::abs(lm), std::abs(lp)) + std::abs(arr.g[i])
                : alpha_max;
        const double hnum =
            0.5 * lb * lb + lb * arr.g[i] - (V[i] + v0) - 0.5 * alpha * (lp - lm);
        double upd = w[i] - dt * hnum;
        if (diff_coeff > 0.0 && i > 0 && i < last) {
          upd += diff_coeff * (w[i + 1] - 2.0 * w[i] + w[i - 1]);
        }
        wnew[i] = upd;
      }
      w.swap(wnew);
    }
    store(col + 1, ts[col + 1]);
  }
  return sol;
}

}  // namespace

double eval_hamiltonian(const Hamiltonian& ham, const ProblemSpec& spec, double x,
                        double t, double lambda) {
  const double l = lambda;
  switch (ham.kind) {
    case HamiltonianKind::PenalizedCostToCome: {
      if (!ham.penalty) {
        throw std::invalid_argument(
            "eval_hamiltonian: PenalizedCostToCome requires a PenaltySpec");
      }
      const double fk = eval_penalized_drift(spec, *ham.penalty, x);
      const double r = spec.ydot(t) - spec.h(x);
      return 0.5 * l * l + l * fk - 0.5 * r * r;
    }
    case HamiltonianKind::S_eps: {
      const double y = spec.y(t);
      const double gs = spec.f(x) - y * spec.hprime(x);
      const double lh = 0.5 * ham.eps * spec.hsecond(x) + spec.f(x) * spec.hprime(x);
      const double hp = spec.hprime(x);
      return 0.5 * l * l + l * gs -
             (0.5 * spec.h(x) * spec.h(x) + y * lh - 0.5 * y * y * hp * hp +
              ham.eps * (spec.fprime(x) - y * spec.hsecond(x)));
    }
    case HamiltonianKind::S_limit: {
      const double y = spec.y(t);
      const double gs = spec.f(x) - y * spec.hprime(x);
      const double hp = spec.hprime(x);
      return 0.5 * l * l + l * gs - 0.5 * spec.h(x) * spec.h(x) -
             y * spec.f(x) * spec.hprime(x) + 0.5 * y * y * hp * hp;
    }
    case HamiltonianKind::W_eps:
      return 0.5 * l * l + l * spec.f(x) - 0.5 * spec.h(x) * spec.h(x) -
             ham.eps * spec.fprime(x) + 0.5 * ham.eps * spec.y(t) * spec.hsecond(x) +
             spec.ydot(t) * spec.h(x);
    case HamiltonianKind::W_limit:
      return 0.5 * l * l + l * spec.f(x) - 0.5 * spec.h(x) * spec.h(x) +
             spec.ydot(t) * spec.h(x);
    case HamiltonianKind::W_eps_symmetrized: {
      const double a = std::abs(x);
      return 0.5 * l * l + l * sgn(x) * spec.f(a) -
             (0.5 * spec.h(a) * spec.h(a) - spec.ydot(t) * spec.h(a) +
              ham.eps * spec.fprime(a) - 0.5 * ham.eps * spec.y(t) * spec.hsecond(a));
    }
  }
  throw std::logic_error("eval_hamiltonian: unknown kind");
}

Solution solve_viscous(const ProblemSpec& spec, HamiltonianKind kind, double eps,
                       const GridSpec& grid, int substeps, bool keep_extended) {
  if (kind != HamiltonianKind::W_eps && kind != HamiltonianKind::S_eps &&
      kind != HamiltonianKind::W_eps_symmetrized) {
    throw std::invalid_argument("solve_viscous: kind must be W_eps, S_eps, or "
                                "W_eps_symmetrized");
  }
  if (!(eps > 0.0)) throw std::invalid_argument("solve_viscous: eps must be > 0");
  Hamiltonian ham{kind, eps, std::nullopt};
  return run_scheme(spec, ham, eps, grid, substeps, keep_extended);
}

Solution solve_inviscid(const ProblemSpec& spec, const Hamiltonian& ham,
                        const GridSpec& grid, int substeps, bool keep_extended) {
  if (ham.kind == HamiltonianKind::W_eps || ham.kind == HamiltonianKind::S_eps ||
      ham.kind == HamiltonianKind::W_eps_symmetrized) {
    throw std::invalid_argument(
        "solve_inviscid: kind must be W_limit, S_limit, or PenalizedCostToCome");
  }
  return run_scheme(spec, ham, 0.0, grid, substeps, keep_extended);
}

int stable_substeps(const ProblemSpec& spec, const Hamiltonian& ham, double eps,
                    const GridSpec& grid) {
  grid.validate();
  const Eigen::VectorXd xs = grid.full_nodes();
  const NodeArrays arr = build_arrays(spec, ham, xs);
  const double dx = grid.dx();
  const auto n = xs.size();

  double lam0 = 0.0;
  for (Eigen::Index i = 1; i < n; ++i) {
    lam0 = std::max(lam0, std::abs(arr.winit[i] - arr.winit[i - 1]) / dx);
  }
  // Potential gradient sampled over time; gradients grow at most like
  // lam0 + T max|dV/dx| for this Hamiltonian family.
  double vgrad = 0.0;
  Eigen::VectorXd V(n);
  for (int k = 0; k <= 16; ++k) {
    const double t = grid.T * k / 16.0;
    V = arr.A + spec.ydot(t) * arr.B;
    for (Eigen::Index i = 1; i < n; ++i) {
      vgrad = std::max(vgrad, std::abs(V[i] - V[i - 1]) / dx);
    }
  }
  double lam_est = 1.5 * (lam0 + grid.T * vgrad) + 1.0;
  if (ham.kind == HamiltonianKind::PenalizedCostToCome && ham.penalty) {
    // The wall region x < 0 holds slopes up to ~4 kappa |x|.
    lam_est = std::max(lam_est, 4.0 * ham.penalty->kappa * grid.xmax + lam0);
  }
  const double alpha_est = 1.1 * lam_est + arr.g.cwiseAbs().maxCoeff();
  // Combined monotonicity margin dt (alpha/dx + eps/dx^2) <= 0.9, capped by
  // the solver's own diffusion gate dt <= 0.9 dx^2 / (2 eps).
  double dt_allowed = 0.9 / (alpha_est / dx + eps / (dx * dx));
  if (eps > 0.0) dt_allowed = std::min(dt_allowed, 0.9 * dx * dx / (2.0 * eps));
  return std::max(1, static_cast<int>(std::ceil(grid.dt() / dt_allowed)));
}

Solution solve_auto(const ProblemSpec& spec, const Hamiltonian& ham,
                    const GridSpec& grid, bool keep_extended) {
  const bool viscous = ham.kind == HamiltonianKind::W_eps ||
                       ham.kind == HamiltonianKind::S_eps ||
                       ham.kind == HamiltonianKind::W_eps_symmetrized;
  int sub = stable_substeps(spec, ham, viscous ? ham.eps : 0.0, grid);
  for (int attempt = 0;; ++attempt) {
    try {
      return viscous ? solve_viscous(spec, ham.kind, ham.eps, grid, sub, keep_extended)
                     : solve_inviscid(spec, ham, grid, sub, keep_extended);
    } catch (const CflError&) {
      if (attempt >= 4) throw;
      sub *= 2;
    }
  }
}

SweepReport vanishing_viscosity_sweep(const ProblemSpec& spec, const GridSpec& grid,
                                      const std::vector<double>& eps_ladder,
                                      const Window& window) {
  if (eps_ladder.size() < 2) {
    throw std::invalid_argument("vanishing_viscosity_sweep: need >= 2 eps values");
  }
  for (std::size_t k = 1; k < eps_ladder.size(); ++k) {
    if (!(eps_ladder[k] < eps_ladder[k - 1])) {
      throw std::invalid_argument("vanishing_viscosity_sweep: eps must decrease");
    }
  }
  if (grid.nx % 2 != 0 || grid.nt % 2 != 0) {
    throw std::invalid_argument(
        "vanishing_viscosity_sweep: nx and nt must be even for the two-grid check");
  }

  SweepReport rep;
  rep.eps = eps_ladder;

  const Hamiltonian wlim{HamiltonianKind::W_limit, 0.0, std::nullopt};
  ScalarField prev;
  for (std::size_t k = 0; k < eps_ladder.size(); ++k) {
    const double e = eps_ladder[k];
    Solution sol = solve_auto(spec, {HamiltonianKind::W_eps, e, std::nullopt}, grid);
    if (k > 0) rep.successive_gaps.push_back(sup_diff(prev, sol.field, window));
    prev = std::move(sol.field);
  }

  Solution inv = solve_auto(spec, wlim, grid);
  rep.gap_to_inviscid = sup_diff(prev, inv.field, window);

  GridSpec coarse = grid;
  coarse.nx = grid.nx / 2;
  coarse.nt = grid.nt / 2;
  Solution inv2 = solve_auto(spec, wlim, coarse);
  rep.inviscid_two_grid = sup_diff(inv.field, inv2.field, window);

  rep.gaps_monotone = true;
  for (std::size_t k = 1; k < rep.successive_gaps.size(); ++k) {
    if (!(rep.successive_gaps[k] < rep.successive_gaps[k - 1])) {
      rep.gaps_monotone = false;
    }
  }
  return rep;
}

BoundsReport check_bounds(const ProblemSpec& spec, double eps, const GridSpec& grid,
                          double R) {
  grid.validate();
  if (!(R > 0.0) || R > grid.xmax) {
    throw std::invalid_argument("check_bounds: need 0 < R <= xmax");
  }
  BoundsReport rep;
  rep.R = R;
  rep.eps = eps;
  rep.eps_gate = std::min(1.0 / (32.0 * R * R * R * R), 1.0 / (2.0 * R * R));
  if (!(eps > 0.0) || eps >= rep.eps_gate) {
    std::ostringstream msg;
    msg << "check_bounds: requires 0 < eps < " << rep.eps_gate << " for R = " << R;
    throw std::invalid_argument(msg.str());
  }

  const Hamiltonian ham{HamiltonianKind::W_eps, eps, std::nullopt};
  const Solution sol = solve_auto(spec, ham, grid);
  const ScalarField& w = sol.field;

  // Ingredients of the printed right-hand sides, sampled on the half grid.
  const Eigen::VectorXd xs = grid.half_nodes();
  double w0_sup = 0.0, v_sup = 0.0;
  for (Eigen::Index i = 0; i < xs.size(); ++i) {
    w0_sup = std::max(w0_sup, std::abs(spec.w0(xs[i])));
  }
  for (int k = 0; k <= 64; ++k) {
    const double t = grid.T * k / 64.0;
    for (Eigen::Index i = 0; i < xs.size(); ++i) {
      const double x = xs[i];
      const double v = 0.5 * spec.h(x) * spec.h(x) - spec.ydot(t) * spec.h(x) +
                       eps * spec.fprime(x) - 0.5 * eps * spec.y(t) * spec.hsecond(x);
      v_sup = std::max(v_sup, std::abs(v));
    }
  }
  rep.w0_sup = w0_sup;
  rep.g_sup = spec.bounds.f_sup;  // |g| = |sgn(x) f(|x|)| = |f| on [0, xmax]
  rep.f_sup = spec.bounds.f_sup;
  rep.v_eps_sup = v_sup;
  rep.rhs_g_form = w0_sup + (8.0 * (1.0 + rep.g_sup) + v_sup + 1.0) * grid.T + 1.0;
  rep.rhs_f2_form =
      w0_sup + (8.0 * (1.0 + rep.f_sup * rep.f_sup) + v_sup + 1.0) * grid.T + 1.0;
  rep.rhs_binding = std::max(rep.rhs_g_form, rep.rhs_f2_form);

  const Window q{0.0, R, 0.0, grid.T};
  rep.sup_measured = sup_abs(w, q);
  rep.bound_ok = rep.sup_measured <= rep.rhs_binding;

  // Space-Lipschitz quotient on Q_R.
  Eigen::Index imax = 0;
  while (imax + 1 < w.nxs() && w.xs[imax + 1] <= R + 1e-12) ++imax;
  double lip = 0.0;
  const double dx = grid.dx();
  for (Eigen::Index c = 0; c < w.nts(); ++c) {
    for (Eigen::Index i = 0; i < imax; ++i) {
      lip = std::max(lip, std::abs(w.values(i + 1, c) - w.values(i, c)) / dx);
    }
  }
  rep.lip_x_quotient = lip;

  // Hoelder-1/2 time quotient, time levels subsampled to keep the pair count
  // manageable.
  const Eigen::Index stride = std::max<Eigen::Index>(1, w.nts() / 96);
  double hq = 0.0;
  for (Eigen::Index c1 = 0; c1 < w.nts(); c1 += stride) {
    for (Eigen::Index c2 = c1 + stride; c2 < w.nts(); c2 += stride) {
      const double dtq = std::abs(w.ts[c2] - w.ts[c1]);
      const double denom = std::sqrt(dtq) + dtq;
      for (Eigen::Index i = 0; i <= imax; ++i) {
        const double num = std::abs(w.values(i, c2) - w.values(i, c1));
        hq = std::max(hq, num / denom);
      }
    }
  }
  rep.holder_t_quotient = hq;
  return rep;
}

}  // namespace reflest::hjb
