#include "reflest/scenario.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace reflest {

namespace {

// C-infinity plateau: 1 on [-x1, x1], 0 outside [-x2, x2], exp-smoothstep in
// between. Used to truncate linear coefficients so they stay bounded without
// changing them on the computational window.
struct Plateau {
  double x1, x2;

  static double phi(double v) { return v > 0.0 ? std::exp(-1.0 / v) : 0.0; }
  static double phi1(double v) { return v > 0.0 ? phi(v) / (v * v) : 0.0; }
  static double phi2(double v) {
    return v > 0.0 ? phi(v) * (1.0 - 2.0 * v) / (v * v * v * v) : 0.0;
  }

  // s(0) = 0, s(1) = 1, flat to all orders at both ends.
  static double s(double u) {
    const double n = phi(u);
    const double d = n + phi(1.0 - u);
    return n / d;
  }
  static double s1(double u) {
    const double n = phi(u), np = phi1(u);
    const double d = n + phi(1.0 - u);
    const double dp = np - phi1(1.0 - u);
    return (np * d - n * dp) / (d * d);
  }
  static double s2(double u) {
    const double n = phi(u), np = phi1(u), npp = phi2(u);
    const double d = n + phi(1.0 - u);
    const double dp = np - phi1(1.0 - u);
    const double dpp = npp + phi2(1.0 - u);
    return (npp * d - n * dpp) / (d * d) - 2.0 * dp * (np * d - n * dp) / (d * d * d);
  }

  double value(double x) const {
    const double a = std::abs(x);
    if (a <= x1) return 1.0;
    if (a >= x2) return 0.0;
    return s((x2 - a) / (x2 - x1));
  }
  double deriv(double x) const {
    const double a = std::abs(x);
    if (a <= x1 || a >= x2) return 0.0;
    const double sgn = x >= 0.0 ? 1.0 : -1.0;
    return -sgn * s1((x2 - a) / (x2 - x1)) / (x2 - x1);
  }
  double deriv2(double x) const {
    const double a = std::abs(x);
    if (a <= x1 || a >= x2) return 0.0;
    const double w = x2 - x1;
    return s2((x2 - a) / w) / (w * w);
  }
};

CoefficientBounds sample_bounds(const ProblemSpec& spec, double xspan, double tspan) {
  CoefficientBounds b;
  const int nx = 4000, nt = 2000;
  for (int i = 0; i <= nx; ++i) {
    const double x = -xspan + 2.0 * xspan * i / nx;
    b.f_sup = std::max(b.f_sup, std::abs(spec.f(x)));
    b.f_lip = std::max(b.f_lip, std::abs(spec.fprime(x)));
    b.h_sup = std::max(b.h_sup, std::abs(spec.h(x)));
    b.h1_sup = std::max(b.h1_sup, std::abs(spec.hprime(x)));
    b.h2_sup = std::max(b.h2_sup, std::abs(spec.hsecond(x)));
  }
  for (int n = 0; n <= nt; ++n) {
    const double t = tspan * n / nt;
    b.y_sup = std::max(b.y_sup, std::abs(spec.y(t)));
    b.ydot_sup = std::max(b.ydot_sup, std::abs(spec.ydot(t)));
  }
  const double pad = 1.0 + 1e-6;
  b.f_sup *= pad;
  b.f_lip *= pad;
  b.h_sup *= pad;
  b.h1_sup *= pad;
  b.h2_sup *= pad;
  b.y_sup *= pad;
  b.ydot_sup *= pad;
  return b;
}

void check_derivative(const RealFn& fn, const RealFn& declared, double lo, double hi,
                      const std::string& label) {
  const double delta = 1e-5;
  for (int i = 0; i <= 40; ++i) {
    const double x = lo + (hi - lo) * i / 40.0;
    const double fd = (fn(x + delta) - fn(x - delta)) / (2.0 * delta);
    const double d = declared(x);
    if (std::abs(fd - d) > 1e-5 * (1.0 + std::abs(d))) {
      std::ostringstream msg;
      msg << "ProblemSpec: declared derivative " << label
          << " disagrees with centered difference at x = " << x << " (declared " << d
          << ", difference quotient " << fd << ")";
      throw std::invalid_argument(msg.str());
    }
  }
}

const RealFn kZeroFn = [](double) { return 0.0; };

}  // namespace

void ProblemSpec::validate(double xspan, double tspan) const {
  if (!f || !fprime || !h || !hprime || !hsecond || !y || !ydot || !psi || !w0)
    throw std::invalid_argument("ProblemSpec: all coefficient callables must be set");
  if (std::abs(f(0.0)) > 1e-12)
    throw std::invalid_argument("ProblemSpec: f(0) must vanish");
  check_derivative(f, fprime, -xspan, xspan, "f'");
  check_derivative(h, hprime, -xspan, xspan, "h'");
  check_derivative(hprime, hsecond, -xspan, xspan, "h''");
  check_derivative(y, ydot, 1e-3, tspan, "ydot");
  if (Omega && omega) check_derivative(Omega, omega, 1e-3, tspan, "omega");
  for (int i = 0; i <= 20; ++i) {
    const double x = -xspan + 2.0 * xspan * i / 20.0;
    if (std::abs(psi(x) - w0(x)) > 1e-9 * (1.0 + std::abs(psi(x))))
      throw std::invalid_argument("ProblemSpec: psi and w0 must coincide");
  }
}

void PenaltySpec::validate() const {
  if (!(kappa > 0.0) || !std::isfinite(kappa))
    throw std::invalid_argument("PenaltySpec: kappa must be positive and finite");
}

double PenaltySpec::penalty(double x) const {
  if (x >= 0.0) return 0.0;
  if (x <= -1.0 / kappa) return -kappa * x;
  const double u = -kappa * x;  // in (0, 1)
  return u * u * (2.0 - u);
}

double PenaltySpec::penalty_slope(double x) const {
  if (x >= 0.0) return 0.0;
  if (x <= -1.0 / kappa) return -kappa;
  const double u = -kappa * x;
  return -kappa * (4.0 * u - 3.0 * u * u);
}

double eval_penalized_drift(const ProblemSpec& spec, const PenaltySpec& pen, double x) {
  return spec.f(x) + pen.penalty(x);
}

double eval_penalized_drift_slope(const ProblemSpec& spec, const PenaltySpec& pen,
                                  double x) {
  return spec.fprime(x) + pen.penalty_slope(x);
}

ProblemSpec linear_quadratic_scenario(double a, double c, double m, double sigma0,
                                      double x0, double plateau_at) {
  if (!(sigma0 > 0.0)) throw std::invalid_argument("linear_quadratic_scenario: sigma0 > 0");
  const Plateau rho{plateau_at, 2.0 * plateau_at};

  ProblemSpec spec;
  spec.name = "linear-quadratic";
  spec.f = [a, rho](double x) { return a * x * rho.value(x); };
  spec.fprime = [a, rho](double x) { return a * (rho.value(x) + x * rho.deriv(x)); };
  spec.h = [c, rho](double x) { return c * x * rho.value(x); };
  spec.hprime = [c, rho](double x) { return c * (rho.value(x) + x * rho.deriv(x)); };
  spec.hsecond = [c, rho](double x) {
    return c * (2.0 * rho.deriv(x) + x * rho.deriv2(x));
  };
  if (a != 0.0) {
    spec.y = [a, c, x0](double t) { return c * x0 * (std::exp(a * t) - 1.0) / a; };
    spec.ydot = [a, c, x0](double t) { return c * x0 * std::exp(a * t); };
  } else {
    spec.y = [c, x0](double t) { return c * x0 * t; };
    spec.ydot = [c, x0](double) { return c * x0; };
  }
  const double inv2s2 = 1.0 / (2.0 * sigma0 * sigma0);
  spec.psi = [m, inv2s2](double x) { return (x - m) * (x - m) * inv2s2; };
  spec.w0 = spec.psi;
  spec.x0 = x0;
  spec.bounds = sample_bounds(spec, 2.0 * plateau_at + 1.0, 20.0);
  return spec;
}

ProblemSpec builtin_scenario(const std::string& name) {
  ProblemSpec spec;
  spec.name = name;

  if (name == "zero") {
    spec.f = spec.fprime = kZeroFn;
    spec.h = spec.hprime = spec.hsecond = kZeroFn;
    spec.y = spec.ydot = kZeroFn;
    spec.psi = spec.w0 = kZeroFn;
    spec.x0 = 0.0;
    return spec;
  }

  if (name == "figure1") {
    const double r5 = std::sqrt(5.0);
    const double r2 = std::sqrt(2.0);
    spec.f = spec.fprime = kZeroFn;
    spec.h = [](double x) { return std::tanh(x); };
    spec.hprime = [](double x) {
      const double th = std::tanh(x);
      return 1.0 - th * th;
    };
    spec.hsecond = [](double x) {
      const double th = std::tanh(x);
      return -2.0 * th * (1.0 - th * th);
    };
    spec.y = [](double t) { return 0.5 * std::sin(0.8 * t); };
    spec.ydot = [](double t) { return 0.4 * std::cos(0.8 * t); };
    spec.psi = spec.w0 = [](double x) {
      const double u = x - 5.0;
      return 1.0 - std::exp(-u * u / 8.0);
    };
    spec.x0 = 5.0;
    spec.Omega = [r5, r2](double t) {
      return t * std::cos(r5 * t) + r2 * t * std::sin(t);
    };
    spec.omega = [r5, r2](double t) {
      return std::cos(r5 * t) - r5 * t * std::sin(r5 * t) + r2 * std::sin(t) +
             r2 * t * std::cos(t);
    };
    spec.bounds = sample_bounds(spec, 16.0, 20.0);
    return spec;
  }

  if (name == "constant-obs") {
    spec.f = spec.fprime = kZeroFn;
    spec.h = [](double) { return 1.0; };
    spec.hprime = spec.hsecond = kZeroFn;
    spec.y = spec.ydot = kZeroFn;
    spec.psi = spec.w0 = kZeroFn;
    spec.x0 = 1.0;
    spec.bounds.h_sup = 1.0;
    return spec;
  }

  if (name == "linear-quadratic") {
    return linear_quadratic_scenario(-1.0, 1.0, 1.0, 1.0, 1.0);
  }

  if (name == "boundary-probe") {
    spec.f = spec.fprime = kZeroFn;
    spec.h = [](double x) { return std::tanh(x); };
    spec.hprime = [](double x) {
      const double th = std::tanh(x);
      return 1.0 - th * th;
    };
    spec.hsecond = [](double x) {
      const double th = std::tanh(x);
      return -2.0 * th * (1.0 - th * th);
    };
    // Observation of the constrained trajectory from x0 = 2 under omega = -2:
    // the path max(2 - 2t, 0) reaches the boundary at t = 1 and stays there.
    spec.ydot = [](double t) { return std::tanh(std::max(2.0 - 2.0 * t, 0.0)); };
    spec.y = [](double t) {
      const double lc2 = std::log(std::cosh(2.0));
      if (t >= 1.0) return 0.5 * lc2;
      return 0.5 * (lc2 - std::log(std::cosh(2.0 - 2.0 * t)));
    };
    spec.psi = spec.w0 = [](double x) {
      const double u = x - 2.0;
      return 2.0 * (1.0 - std::exp(-u * u / 4.0));
    };
    spec.x0 = 2.0;
    spec.omega = [](double) { return -2.0; };
    spec.Omega = [](double t) { return -2.0 * t; };
    spec.bounds = sample_bounds(spec, 16.0, 20.0);
    return spec;
  }

  std::ostringstream msg;
  msg << "unknown scenario \"" << name << "\"; valid presets:";
  for (const auto& n : builtin_scenario_names()) msg << " " << n;
  throw std::invalid_argument(msg.str());
}

std::vector<std::string> builtin_scenario_names() {
  return {"zero", "figure1", "constant-obs", "linear-quadratic", "boundary-probe"};
}

}  // namespace reflest
