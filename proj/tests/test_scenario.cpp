#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "reflest/scenario.hpp"

using namespace reflest;

namespace {

// Independent evaluation of the bridge cubic: value and slope boundary data
// (0, 0) at x = 0 and (1, -kappa) at x = -1/kappa force b(u) = 2u^2 - u^3 in
// the scaled variable u = -kappa x.  Solved here from the Hermite conditions
// rather than reusing the library's closed form.
double hermite_bridge_reference(double kappa, double x) {
  const double u = -kappa * x;
  // b(u) = c2 u^2 + c3 u^3 with b(1) = 1, b'(1) = 1  =>  c2 = 2, c3 = -1.
  const double c3 = -1.0, c2 = 2.0;
  return c2 * u * u + c3 * u * u * u;
}

}  // namespace

TEST_CASE("penalized drift vanishes on the admissible side") {
  auto spec = builtin_scenario("zero");
  PenaltySpec pen{10.0};
  CHECK(eval_penalized_drift(spec, pen, 1.0) == 0.0);
  CHECK(eval_penalized_drift(spec, pen, 0.0) == 0.0);
}

TEST_CASE("penalized drift is linear with slope kappa past the bridge") {
  auto spec = builtin_scenario("zero");
  PenaltySpec pen{10.0};
  CHECK(eval_penalized_drift(spec, pen, -1.0) == doctest::Approx(10.0).epsilon(1e-14));
  CHECK(eval_penalized_drift(spec, pen, -2.5) == doctest::Approx(25.0).epsilon(1e-14));
}

TEST_CASE("penalized drift uses the cubic Hermite bridge near zero") {
  auto spec = builtin_scenario("zero");
  PenaltySpec pen{10.0};
  CHECK(eval_penalized_drift(spec, pen, -0.05) == doctest::Approx(0.375).epsilon(1e-14));
  for (double kappa : {3.0, 10.0, 40.0, 160.0}) {
    PenaltySpec p{kappa};
    for (int i = 1; i < 20; ++i) {
      const double x = -i / (20.0 * kappa);
      CHECK(eval_penalized_drift(spec, p, x) ==
            doctest::Approx(hermite_bridge_reference(kappa, x)).epsilon(1e-13));
    }
  }
}

TEST_CASE("penalty bridge is C1 at both junctions") {
  for (double kappa : {5.0, 50.0, 200.0}) {
    PenaltySpec pen{kappa};
    const double d = 1e-9 / kappa;
    // value continuity
    CHECK(std::abs(pen.penalty(-d) - pen.penalty(d)) < 1e-7);
    CHECK(std::abs(pen.penalty(-1.0 / kappa - d) - pen.penalty(-1.0 / kappa + d)) < 1e-7);
    // slope continuity
    CHECK(std::abs(pen.penalty_slope(-d) - pen.penalty_slope(d)) < 1e-5 * kappa);
    CHECK(std::abs(pen.penalty_slope(-1.0 / kappa - d) -
                   pen.penalty_slope(-1.0 / kappa + d)) < 1e-5 * kappa);
  }
}

TEST_CASE("penalty slope stays in [-2 kappa, 0] and the term is nonincreasing") {
  for (double kappa : {1.0, 10.0, 160.0}) {
    PenaltySpec pen{kappa};
    double prev = pen.penalty(2.0);
    for (int i = 0; i <= 4000; ++i) {
      const double x = 2.0 - i * (4.0 / 4000.0);  // sweep 2 -> -2
      const double s = pen.penalty_slope(x);
      CHECK(s <= 1e-14);
      CHECK(s >= -2.0 * kappa - 1e-10);
      const double v = pen.penalty(x);
      CHECK(v >= prev - 1e-12);  // nonincreasing in x means nondecreasing on this sweep
      prev = v;
    }
  }
}

TEST_CASE("penalty slope magnitude peaks at 4/3 kappa") {
  PenaltySpec pen{10.0};
  double worst = 0.0;
  for (int i = 0; i <= 100000; ++i) {
    const double x = -0.1 * i / 100000.0;
    worst = std::max(worst, -pen.penalty_slope(x));
  }
  CHECK(worst == doctest::Approx(4.0 / 3.0 * 10.0).epsilon(1e-6));
}

TEST_CASE("zero preset has vanishing coefficients") {
  auto spec = builtin_scenario("zero");
  spec.validate();
  for (double x : {-2.0, 0.0, 3.5}) {
    CHECK(spec.f(x) == 0.0);
    CHECK(spec.h(x) == 0.0);
    CHECK(spec.psi(x) == 0.0);
  }
  CHECK(spec.y(1.0) == 0.0);
}

TEST_CASE("figure1 preset reproduces the contact-window constants") {
  auto spec = builtin_scenario("figure1");
  spec.validate(12.0, 16.0);
  CHECK(spec.x0 == 5.0);
  REQUIRE(static_cast<bool>(spec.Omega));
  // First boundary contact: x0 + Omega crosses zero.
  CHECK(std::abs(spec.x0 + spec.Omega(3.7554)) < 5e-3);
  // End of the first contact window: running minimum -4.9507.
  CHECK(spec.x0 + spec.Omega(4.4080) == doctest::Approx(-4.9507).epsilon(1e-3));
  // Second contact starts when x0 + Omega returns to the stored minimum.
  CHECK(spec.x0 + spec.Omega(9.5719) == doctest::Approx(-4.9507).epsilon(1e-3));
  // End of the second window: running minimum -12.3036.
  CHECK(spec.x0 + spec.Omega(10.1047) == doctest::Approx(-12.3036).epsilon(1e-3));
}

TEST_CASE("unknown scenario name raises and lists the presets") {
  try {
    builtin_scenario("nope");
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    for (const auto& name : builtin_scenario_names())
      CHECK(msg.find(name) != std::string::npos);
  }
}

TEST_CASE("all presets validate") {
  for (const auto& name : builtin_scenario_names()) {
    auto spec = builtin_scenario(name);
    CHECK_NOTHROW(spec.validate());
  }
}

TEST_CASE("declared derivatives converge at second order") {
  for (const auto& name : builtin_scenario_names()) {
    auto spec = builtin_scenario(name);
    const std::vector<std::pair<RealFn, RealFn>> pairs = {
        {spec.f, spec.fprime}, {spec.h, spec.hprime}, {spec.hprime, spec.hsecond}};
    for (const auto& [fn, d] : pairs) {
      for (double x : {0.3, 1.7, 4.9, 9.3, 11.2}) {
        auto err = [&](double delta) {
          return std::abs((fn(x + delta) - fn(x - delta)) / (2.0 * delta) - d(x));
        };
        const double e1 = err(1e-3), e2 = err(5e-4);
        if (e1 < 1e-10) continue;  // exact for locally polynomial pieces
        const double order = std::log2(e1 / e2);
        CHECK(order >= 1.9);
      }
    }
  }
}

TEST_CASE("linear-quadratic preset matches its construction") {
  auto spec = builtin_scenario("linear-quadratic");
  spec.validate();
  CHECK(spec.f(2.0) == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(spec.h(2.0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(spec.psi(1.0) == 0.0);
  CHECK(spec.psi(3.0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(spec.ydot(0.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(spec.ydot(1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  // Far outside the plateau the truncation kills the coefficients.
  CHECK(spec.f(17.0) == 0.0);
  CHECK(spec.h(17.0) == 0.0);
}

TEST_CASE("boundary-probe observation matches its constrained trajectory") {
  auto spec = builtin_scenario("boundary-probe");
  spec.validate();
  for (double t : {0.0, 0.4, 0.9, 1.3, 2.0}) {
    const double state = std::max(2.0 - 2.0 * t, 0.0);
    CHECK(spec.ydot(t) == doctest::Approx(std::tanh(state)).epsilon(1e-12));
  }
}
