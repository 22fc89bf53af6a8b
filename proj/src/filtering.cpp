#include "reflest/filtering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "reflest/costcome.hpp"
#include "reflest/hjb.hpp"

namespace reflest::filtering {
namespace {

constexpr double kDensityFloor = 1e-300;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// One conservative finite-volume step of dq/dt = -(g q)' + (eps/2) q'' on a
/// uniform node/cell grid with zero total flux through both ends. Mass
/// sum(q) dx is conserved to roundoff; upwinding keeps q >= 0 under the CFL
/// condition, which is checked and reported via CflError.
void density_step(Eigen::VectorXd& q, const Eigen::VectorXd& g, double eps,
                  double dx, double dt, Eigen::VectorXd& flux) {
  const Eigen::Index m = q.size();
  const double gmax = g.size() ? g.cwiseAbs().maxCoeff() : 0.0;
  const double rate = gmax / dx + eps / (dx * dx);
  if (rate > 0.0 && dt * rate > 0.95) {
    std::ostringstream msg;
    msg << "CFL violation in density step: dt <= " << 0.95 / rate
        << " required, got " << dt;
    throw hjb::CflError(msg.str(), 0.95 / rate);
  }
  const double dcoef = 0.5 * eps / dx;
  for (Eigen::Index i = 0; i + 1 < m; ++i) {
    const double gm = 0.5 * (g[i] + g[i + 1]);
    const double adv = gm >= 0.0 ? gm * q[i] : gm * q[i + 1];
    flux[i] = adv - dcoef * (q[i + 1] - q[i]);
  }
  const double r = dt / dx;
  q[0] -= r * flux[0];
  for (Eigen::Index i = 1; i + 1 < m; ++i) q[i] -= r * (flux[i] - flux[i - 1]);
  q[m - 1] += r * flux[m - 2];
}

/// Shared marching loop for the Zakai splitting on an arbitrary node set:
/// finite-volume transport step, then the exponential observation update with
/// increments of the scenario path y. Stores every output level as a column.
Eigen::MatrixXd march_zakai(const ProblemSpec& spec, double eps,
                            const Eigen::VectorXd& xs, const Eigen::VectorXd& g,
                            const Eigen::VectorXd& q0, double T, int nt,
                            int substeps) {
  if (substeps < 1) throw std::invalid_argument("march_zakai: substeps >= 1");
  const Eigen::Index m = xs.size();
  const double dx = xs[1] - xs[0];
  const double dt = T / nt / substeps;

  Eigen::VectorXd hx(m);
  for (Eigen::Index i = 0; i < m; ++i) hx[i] = spec.h(xs[i]);

  Eigen::MatrixXd out(m, nt + 1);
  Eigen::VectorXd q = q0;
  Eigen::VectorXd flux(m - 1);
  out.col(0) = q;
  for (int n = 0; n < nt; ++n) {
    for (int s = 0; s < substeps; ++s) {
      const double t0 = (static_cast<double>(n) * substeps + s) * dt;
      const double dY = spec.y(t0 + dt) - spec.y(t0);
      density_step(q, g, eps, dx, dt, flux);
      for (Eigen::Index i = 0; i < m; ++i) {
        q[i] *= std::exp(hx[i] / eps * dY - hx[i] * hx[i] / (2.0 * eps) * dt);
      }
    }
    out.col(n + 1) = q;
  }
  return out;
}

int cfl_substeps(double gmax, double eps, double dx, double dt) {
  const double rate = gmax / dx + eps / (dx * dx);
  return std::max(1, static_cast<int>(std::ceil(dt * rate / 0.9)));
}

}  // namespace

GaussianStream::GaussianStream(std::uint64_t master_seed, std::uint64_t stream)
    : eng_(splitmix64(splitmix64(master_seed) ^ splitmix64(stream + 1))) {}

double GaussianStream::next() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Box-Muller on uniforms strictly inside (0, 1).
  const double u1 =
      (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
  const double u2 =
      (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

FilterPath simulate_reflected_sde(const ProblemSpec& spec, double eps, double xi,
                                  const GridSpec& grid, std::uint64_t seed) {
  grid.validate();
  if (xi < 0.0) throw std::invalid_argument("simulate_reflected_sde: xi >= 0");
  if (eps < 0.0) throw std::invalid_argument("simulate_reflected_sde: eps >= 0");

  GaussianStream state_noise(seed, 0);
  GaussianStream obs_noise(seed, 1);
  const double dt = grid.dt();
  const double sq = std::sqrt(eps * dt);

  FilterPath path;
  path.seed = seed;
  path.times = grid.time_nodes();
  path.X.resize(grid.nt + 1);
  path.Y.resize(grid.nt + 1);
  path.K.resize(grid.nt + 1);
  path.X[0] = xi;
  path.Y[0] = 0.0;
  path.K[0] = 0.0;
  for (int n = 0; n < grid.nt; ++n) {
    const double s = path.X[n] + sq * state_noise.next();
    path.X[n + 1] = std::max(0.0, s);
    path.K[n + 1] = path.K[n] + std::min(0.0, s);
    path.Y[n + 1] = path.Y[n] + spec.h(0.5 * (path.X[n] + path.X[n + 1])) * dt +
                    sq * obs_noise.next();
  }
  return path;
}

Eigen::VectorXd zakai_step(const Eigen::VectorXd& q, const ProblemSpec& spec,
                           double eps, const GridSpec& grid, double dY,
                           double dt) {
  grid.validate();
  if (!(eps > 0.0)) throw std::invalid_argument("zakai_step: eps > 0");
  if (q.size() != grid.nx + 1) {
    throw std::invalid_argument("zakai_step: slice size must be nx + 1");
  }
  if (q.minCoeff() < 0.0) {
    throw std::invalid_argument("zakai_step: density must be nonnegative");
  }
  const Eigen::VectorXd xs = grid.half_nodes();
  const Eigen::Index m = xs.size();
  Eigen::VectorXd g(m), hx(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    g[i] = spec.f(xs[i]);
    hx[i] = spec.h(xs[i]);
  }
  Eigen::VectorXd next = q;
  Eigen::VectorXd flux(m - 1);
  density_step(next, g, eps, grid.dx(), dt, flux);
  for (Eigen::Index i = 0; i < m; ++i) {
    next[i] *= std::exp(hx[i] / eps * dY - hx[i] * hx[i] / (2.0 * eps) * dt);
  }
  return next;
}

DensityField zakai_solve(const ProblemSpec& spec, double eps,
                         const GridSpec& grid, const Eigen::VectorXd& q0,
                         int substeps) {
  grid.validate();
  if (!(eps > 0.0)) throw std::invalid_argument("zakai_solve: eps > 0");
  if (q0.size() != grid.nx + 1) {
    throw std::invalid_argument("zakai_solve: q0 size must be nx + 1");
  }
  const Eigen::VectorXd xs = grid.half_nodes();
  Eigen::VectorXd g(xs.size());
  for (Eigen::Index i = 0; i < xs.size(); ++i) g[i] = spec.f(xs[i]);

  DensityField q;
  q.gauge = Gauge::q;
  q.field.xs = xs;
  q.field.ts = grid.time_nodes();
  q.field.values = march_zakai(spec, eps, xs, g, q0, grid.T, grid.nt, substeps);
  return q;
}

int zakai_substeps(const ProblemSpec& spec, double eps, const GridSpec& grid) {
  grid.validate();
  const Eigen::VectorXd xs = grid.half_nodes();
  double gmax = 0.0;
  for (Eigen::Index i = 0; i < xs.size(); ++i) {
    gmax = std::max(gmax, std::abs(spec.f(xs[i])));
  }
  return cfl_substeps(gmax, eps, grid.dx(), grid.dt());
}

int robust_substeps(const ProblemSpec& spec, double eps, const GridSpec& grid) {
  grid.validate();
  return cfl_substeps(spec.bounds.y_sup * spec.bounds.h1_sup, eps, grid.dx(),
                      grid.dt());
}

DensityField robust_pde_solve(const ProblemSpec& spec, double eps,
                              const GridSpec& grid, const Eigen::VectorXd& p0,
                              int substeps) {
  grid.validate();
  if (!(eps > 0.0)) throw std::invalid_argument("robust_pde_solve: eps > 0");
  if (substeps < 1) throw std::invalid_argument("robust_pde_solve: substeps >= 1");
  if (p0.size() != grid.nx + 1) {
    throw std::invalid_argument("robust_pde_solve: p0 size must be nx + 1");
  }
  const Eigen::VectorXd xs = grid.half_nodes();
  const Eigen::Index m = xs.size();
  const double dx = grid.dx();
  const double dt = grid.dt() / substeps;

  Eigen::VectorXd hx(m), hp(m), hs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    hx[i] = spec.h(xs[i]);
    hp[i] = spec.hprime(xs[i]);
    hs[i] = spec.hsecond(xs[i]);
  }
  const double cmax = spec.bounds.y_sup * spec.bounds.h1_sup;
  const double rate = cmax / dx + eps / (dx * dx);
  if (dt * rate > 0.95) {
    std::ostringstream msg;
    msg << "CFL violation in robust step: dt <= " << 0.95 / rate
        << " required, got " << dt;
    throw hjb::CflError(msg.str(), 0.95 / rate);
  }

  DensityField out;
  out.gauge = Gauge::p;
  out.field.xs = xs;
  out.field.ts = grid.time_nodes();
  out.field.values.resize(m, grid.nt + 1);

  Eigen::VectorXd p = p0, pn(m);
  out.field.values.col(0) = p;
  for (int n = 0; n < grid.nt; ++n) {
    for (int s = 0; s < substeps; ++s) {
      const double t = grid.T * (static_cast<double>(n) * substeps + s) /
                       (static_cast<double>(grid.nt) * substeps);
      const double y = spec.y(t);
      // Robin ghost at the corner, zero-slope ghost at the far end.
      const double ghost0 = p[1] + 2.0 * dx * y * hp[0] / eps * p[0];
      const double ghostm = p[m - 2];
      for (Eigen::Index i = 0; i < m; ++i) {
        const double pl = i == 0 ? ghost0 : p[i - 1];
        const double pr = i == m - 1 ? ghostm : p[i + 1];
        const double c = y * hp[i];
        const double px = c >= 0.0 ? (pr - p[i]) / dx : (p[i] - pl) / dx;
        const double lap = (pr - 2.0 * p[i] + pl) / (dx * dx);
        const double pot =
            0.5 * hx[i] * hx[i] - 0.5 * eps * y * hs[i] - 0.5 * y * y * hp[i] * hp[i];
        pn[i] = (p[i] + dt * (c * px + 0.5 * eps * lap)) *
                std::exp(-dt * pot / eps);
      }
      p.swap(pn);
    }
    out.field.values.col(n + 1) = p;
  }
  return out;
}

DensityField robust_transform(const DensityField& in, const ProblemSpec& spec,
                              double eps, TransformDirection direction) {
  if (!(eps > 0.0)) throw std::invalid_argument("robust_transform: eps > 0");
  const Gauge source =
      direction == TransformDirection::q_to_p ? Gauge::q : Gauge::p;
  if (in.gauge != source) {
    throw std::invalid_argument("robust_transform: gauge tag does not match "
                                "the direction source");
  }
  const double sign = direction == TransformDirection::q_to_p ? -1.0 : 1.0;
  DensityField out = in;
  out.gauge = direction == TransformDirection::q_to_p ? Gauge::p : Gauge::q;
  for (Eigen::Index n = 0; n < in.field.nts(); ++n) {
    const double y = spec.y(in.field.ts[n]);
    for (Eigen::Index i = 0; i < in.field.nxs(); ++i) {
      out.field.values(i, n) =
          in.field.values(i, n) *
          std::exp(sign * y * spec.h(in.field.xs[i]) / eps);
    }
  }
  return out;
}

HopfColeResult hopf_cole(const DensityField& p, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("hopf_cole: eps > 0");
  if (p.gauge != Gauge::p) {
    throw std::invalid_argument("hopf_cole: input must be in the p gauge");
  }
  HopfColeResult res;
  res.S.xs = p.field.xs;
  res.S.ts = p.field.ts;
  res.S.values.resize(p.field.nxs(), p.field.nts());
  for (Eigen::Index n = 0; n < p.field.nts(); ++n) {
    for (Eigen::Index i = 0; i < p.field.nxs(); ++i) {
      const double v = p.field.values(i, n);
      if (!(v > kDensityFloor)) res.flagged.emplace_back(i, n);
      res.S.values(i, n) = -eps * std::log(std::max(v, kDensityFloor));
    }
  }
  return res;
}

DensityField hopf_cole_inverse(const ScalarField& S, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("hopf_cole_inverse: eps > 0");
  DensityField p;
  p.gauge = Gauge::p;
  p.field = S;
  p.field.values = (-S.values / eps).array().exp();
  return p;
}

DensityMoments density_moments(const DensityField& q) {
  const auto& f = q.field;
  const double dx = f.dx();
  DensityMoments m;
  m.mass.resize(f.nts());
  m.mean.resize(f.nts());
  m.var.resize(f.nts());
  // full-width cell weights, matching the finite-volume reading of the nodes
  // (the transport step conserves exactly this sum)
  for (Eigen::Index n = 0; n < f.nts(); ++n) {
    double w0 = 0.0, w1 = 0.0, w2 = 0.0;
    for (Eigen::Index i = 0; i < f.nxs(); ++i) {
      const double v = f.values(i, n) * dx;
      w0 += v;
      w1 += v * f.xs[i];
      w2 += v * f.xs[i] * f.xs[i];
    }
    m.mass[n] = w0;
    m.mean[n] = w0 > 0.0 ? w1 / w0 : 0.0;
    m.var[n] = w0 > 0.0 ? std::max(0.0, w2 / w0 - m.mean[n] * m.mean[n]) : 0.0;
  }
  return m;
}

Eigen::VectorXd folded_gaussian_density(const InitialLaw& law,
                                        const Eigen::VectorXd& xs) {
  if (!(law.sigma0 > 0.0)) {
    throw std::invalid_argument("folded_gaussian_density: sigma0 > 0");
  }
  const double norm = 1.0 / (law.sigma0 * std::sqrt(2.0 * M_PI));
  Eigen::VectorXd q(xs.size());
  for (Eigen::Index i = 0; i < xs.size(); ++i) {
    const double a = (xs[i] - law.x0) / law.sigma0;
    const double b = (xs[i] + law.x0) / law.sigma0;
    q[i] = norm * (std::exp(-0.5 * a * a) + std::exp(-0.5 * b * b));
  }
  return q;
}

EnsembleSummary particle_filter_oracle(const ProblemSpec& spec, double eps,
                                       int n_particles, const GridSpec& grid,
                                       const Eigen::VectorXd& y_path,
                                       std::uint64_t seed,
                                       const InitialLaw& init) {
  grid.validate();
  if (n_particles < 100) {
    throw std::invalid_argument("particle_filter_oracle: n >= 100 required");
  }
  if (!(eps > 0.0)) throw std::invalid_argument("particle_filter_oracle: eps > 0");
  if (y_path.size() != grid.nt + 1) {
    throw std::invalid_argument(
        "particle_filter_oracle: y_path must hold nt + 1 levels");
  }

  const int n = n_particles;
  const double dt = grid.dt();
  const double sq = std::sqrt(eps * dt);

  std::vector<GaussianStream> streams;
  streams.reserve(n);
  for (int j = 0; j < n; ++j) streams.emplace_back(seed, 2 + j);
  std::mt19937_64 resample_eng(splitmix64(splitmix64(seed) ^ 0x5e5a3125u));

  Eigen::VectorXd X(n), logw = Eigen::VectorXd::Zero(n), w(n);
  for (int j = 0; j < n; ++j) {
    X[j] = std::abs(init.x0 + init.sigma0 * streams[j].next());
  }

  EnsembleSummary out;
  out.ts = grid.time_nodes();
  out.mean.resize(grid.nt + 1);
  out.var.resize(grid.nt + 1);
  out.ess.resize(grid.nt + 1);

  const auto record = [&](int level) {
    const double shift = logw.maxCoeff();
    double W = 0.0, W2 = 0.0, m1 = 0.0;
    for (int j = 0; j < n; ++j) {
      w[j] = std::exp(logw[j] - shift);
      W += w[j];
      W2 += w[j] * w[j];
      m1 += w[j] * X[j];
    }
    const double mean = m1 / W;
    double v = 0.0;
    for (int j = 0; j < n; ++j) v += w[j] * (X[j] - mean) * (X[j] - mean);
    out.mean[level] = mean;
    out.var[level] = v / W;
    out.ess[level] = W * W / W2;
    return out.ess[level];
  };

  record(0);
  for (int k = 0; k < grid.nt; ++k) {
    const double dY = y_path[k + 1] - y_path[k];
    for (int j = 0; j < n; ++j) {
      X[j] = std::max(0.0, X[j] + sq * streams[j].next());
      const double h = spec.h(X[j]);
      logw[j] += h / eps * dY - h * h / (2.0 * eps) * dt;
    }
    const double ess = record(k + 1);
    if (ess < 5.0) {
      throw std::runtime_error(
          "particle_filter_oracle: effective sample size collapsed below 5; "
          "increase n_particles or eps");
    }
    if (ess < 0.5 * n && k + 1 < grid.nt) {
      // systematic resampling
      const double shift = logw.maxCoeff();
      double W = 0.0;
      for (int j = 0; j < n; ++j) {
        w[j] = std::exp(logw[j] - shift);
        W += w[j];
      }
      const double u0 =
          (static_cast<double>(resample_eng() >> 11) + 0.5) * 0x1.0p-53;
      Eigen::VectorXd Xnew(n);
      double cum = w[0];
      int src = 0;
      for (int j = 0; j < n; ++j) {
        const double target = (u0 + j) / n * W;
        while (cum < target && src + 1 < n) cum += w[++src];
        Xnew[j] = X[src];
      }
      X.swap(Xnew);
      logw.setZero();
    }
  }
  return out;
}

SmallNoiseReport small_noise_check(const ProblemSpec& spec,
                                   const PenaltySpec& pen,
                                   const std::vector<double>& eps_ladder,
                                   const GridSpec& grid, const Window& window) {
  grid.validate();
  pen.validate();
  if (eps_ladder.empty()) {
    throw std::invalid_argument("small_noise_check: empty eps ladder");
  }
  for (double e : eps_ladder) {
    if (!(e > 0.0)) throw std::invalid_argument("small_noise_check: eps > 0");
  }

  const Eigen::VectorXd xs = grid.full_nodes();
  const Eigen::VectorXd ts = grid.time_nodes();
  const Eigen::Index m = xs.size();
  Eigen::VectorXd g(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    g[i] = eval_penalized_drift(spec, pen, xs[i]);
  }
  const double gmax = g.cwiseAbs().maxCoeff();

  // The deterministic benchmark lives on the half grid; full-grid node
  // nx + i coincides with half-grid node i.
  const ScalarField vk = costcome::cost_to_come_hjb(spec, pen, grid);

  SmallNoiseReport report;
  report.eps.assign(eps_ladder.begin(), eps_ladder.end());
  for (double eps : eps_ladder) {
    Eigen::VectorXd q0(m);
    for (Eigen::Index i = 0; i < m; ++i) q0[i] = std::exp(-spec.psi(xs[i]) / eps);
    const int substeps = cfl_substeps(gmax, eps, grid.dx(), grid.dt());
    const Eigen::MatrixXd q =
        march_zakai(spec, eps, xs, g, q0, grid.T, grid.nt, substeps);

    double gap = 0.0;
    for (Eigen::Index n = 0; n < ts.size(); ++n) {
      if (ts[n] < window.tlo || ts[n] > window.thi) continue;
      double amin = std::numeric_limits<double>::infinity();
      double bmin = amin;
      for (Eigen::Index i = 0; i <= grid.nx; ++i) {
        const double x = vk.xs[i];
        if (x < window.xlo || x > window.xhi) continue;
        const double a =
            -eps * std::log(std::max(q(grid.nx + i, n), kDensityFloor));
        amin = std::min(amin, a);
        bmin = std::min(bmin, vk.values(i, n));
      }
      for (Eigen::Index i = 0; i <= grid.nx; ++i) {
        const double x = vk.xs[i];
        if (x < window.xlo || x > window.xhi) continue;
        const double a =
            -eps * std::log(std::max(q(grid.nx + i, n), kDensityFloor));
        gap = std::max(gap, std::abs((a - amin) - (vk.values(i, n) - bmin)));
      }
    }
    report.gaps.push_back(gap);
  }

  report.nonincreasing = true;
  for (std::size_t k = 1; k < report.gaps.size(); ++k) {
    if (report.gaps[k] > report.gaps[k - 1] + 1e-12) report.nonincreasing = false;
  }
  return report;
}

}  // namespace reflest::filtering
