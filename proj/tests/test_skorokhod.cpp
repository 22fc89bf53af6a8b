#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "reflest/scenario.hpp"
#include "reflest/skorokhod.hpp"

using namespace reflest;
using namespace reflest::skorokhod;

namespace {

// Discrete invariants shared by both constrained solvers.
void check_reflection_invariants(const SkorokhodSolution& sol) {
  CHECK(sol.delta[0] == 0.0);
  for (Eigen::Index n = 0; n < sol.x.size(); ++n) {
    CHECK(sol.x[n] >= 0.0);
    if (n > 0) {
      CHECK(sol.delta[n] <= sol.delta[n - 1] + 1e-15);
      const double move = sol.delta[n] - sol.delta[n - 1];
      if (move < -1e-15) CHECK(sol.x[n] == 0.0);  // pushes only at the boundary
    }
  }
}

}  // namespace

TEST_CASE("explicit solver keeps an interior constant path") {
  auto control = ControlSignal::constant(0.0, 2.0, 100);
  auto sol = solve_explicit(1.0, control);
  CHECK(sol.x.minCoeff() == 1.0);
  CHECK(sol.x.maxCoeff() == 1.0);
  CHECK(sol.delta.cwiseAbs().maxCoeff() == 0.0);
  check_reflection_invariants(sol);
}

TEST_CASE("explicit solver pushes linearly against a constant inflow") {
  auto control = ControlSignal::constant(-1.0, 2.0, 200);
  auto sol = solve_explicit(0.0, control);
  for (Eigen::Index n = 0; n < sol.ts.size(); ++n) {
    CHECK(sol.x[n] == 0.0);
    CHECK(sol.delta[n] == doctest::Approx(-sol.ts[n]).epsilon(1e-14));
  }
  check_reflection_invariants(sol);
}

TEST_CASE("explicit and projected solvers coincide on the same driftless grid") {
  auto spec = builtin_scenario("figure1");
  auto control = ControlSignal::sampled(spec.omega, 16.0, 2000);
  auto a = solve_explicit(spec.x0, control);
  auto b = solve_vi(spec, spec.x0, control);
  CHECK((a.x - b.x).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((a.delta - b.delta).cwiseAbs().maxCoeff() < 1e-12);
  check_reflection_invariants(a);
  check_reflection_invariants(b);
}

TEST_CASE("figure1 trajectory reproduces contact windows and push plateaus") {
  auto spec = builtin_scenario("figure1");
  auto control = ControlSignal::sampled(spec.omega, 16.0, 16000);
  auto sol = solve_explicit(spec.x0, control);
  check_reflection_invariants(sol);

  // Contact interval endpoints: first and last time x sits at the boundary.
  auto at = [&](double t) { return static_cast<Eigen::Index>(std::llround(t / 16.0 * 16000)); };
  double first_contact = -1.0, second_contact_end = -1.0;
  for (Eigen::Index n = 0; n < sol.x.size(); ++n)
    if (sol.x[n] == 0.0) {
      if (first_contact < 0.0) first_contact = sol.ts[n];
      second_contact_end = sol.ts[n];
    }
  CHECK(std::abs(first_contact - 3.7554) < 1e-2);
  CHECK(std::abs(second_contact_end - 10.1047) < 1e-2);

  // Push plateaus between and after the contact windows.
  CHECK(sol.delta[at(7.0)] == doctest::Approx(-4.9507).epsilon(2e-3));
  CHECK(sol.delta[at(9.0)] == doctest::Approx(-4.9507).epsilon(2e-3));
  CHECK(sol.delta[at(12.0)] == doctest::Approx(-12.3036).epsilon(2e-3));
  CHECK(sol.delta[at(16.0) - 1] == doctest::Approx(-12.3036).epsilon(2e-3));
}

TEST_CASE("projected Euler converges at first order under drift") {
  auto spec = linear_quadratic_scenario(-1.0, 0.0, 1.0, 1.0, 1.0);
  RealFn omega = [](double t) { return 0.5 * std::sin(t); };
  auto err_at = [&](int nt) {
    auto control = ControlSignal::sampled(omega, 4.0, nt);
    auto coarse = solve_vi(spec, 1.0, control);
    auto fine = solve_vi(spec, 1.0, control.refined(64));
    double sup = 0.0;
    for (int n = 0; n <= nt; ++n)
      sup = std::max(sup, std::abs(coarse.x[n] - fine.x[static_cast<Eigen::Index>(n) * 64]));
    return sup;
  };
  const double e1 = err_at(500), e2 = err_at(1000);
  CHECK(e1 > 0.0);
  const double ratio = e1 / e2;
  CHECK(ratio >= 1.7);
  CHECK(ratio <= 2.3);
}

TEST_CASE("projected Euler tracks the decaying drift solution") {
  auto spec = linear_quadratic_scenario(-1.0, 0.0, 1.0, 1.0, 1.0);
  auto control = ControlSignal::constant(0.0, 1.0, 2000);
  auto sol = solve_vi(spec, 1.0, control);
  double sup = 0.0;
  for (Eigen::Index n = 0; n < sol.ts.size(); ++n)
    sup = std::max(sup, std::abs(sol.x[n] - std::exp(-sol.ts[n])));
  CHECK(sup < 1e-3);
  CHECK(sol.delta.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("rest point at the boundary is preserved") {
  auto spec = builtin_scenario("zero");
  auto sol = solve_vi(spec, 0.0, ControlSignal::constant(0.0, 1.0, 50));
  CHECK(sol.x.cwiseAbs().maxCoeff() == 0.0);
  CHECK(sol.delta.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("penalized path approaches the hitting profile as kappa grows") {
  auto spec = builtin_scenario("zero");
  auto control = ControlSignal::constant(-1.0, 2.0, 4000);
  auto profile_error = [&](double kappa) {
    auto path = solve_penalized(spec, PenaltySpec{kappa}, 1.0, control);
    double sup = 0.0;
    for (Eigen::Index n = 0; n < path.ts.size(); ++n)
      sup = std::max(sup, std::abs(path.x[n] - std::max(1.0 - path.ts[n], 0.0)));
    return sup;
  };
  const double e25 = profile_error(25.0), e100 = profile_error(100.0);
  CHECK(e100 < 0.05);
  CHECK(e100 < e25);
}

TEST_CASE("penalized dynamics recovers an inadmissible start") {
  auto spec = builtin_scenario("zero");
  auto control = ControlSignal::constant(0.0, 1.0, 500);
  auto path = solve_penalized(spec, PenaltySpec{50.0}, -1.0, control);
  for (Eigen::Index n = 1; n < path.x.size(); ++n) CHECK(path.x[n] >= path.x[n - 1] - 1e-14);
  CHECK(path.x[path.x.size() - 1] > -0.05);
  CHECK(path.x[path.x.size() - 1] <= 1e-6);
}

TEST_CASE("reverse integration undoes the penalized flow to first order") {
  // Interior drifted path: reversal through a long boundary-contact window is
  // not claimed (the forward flow contracts at rate kappa there).
  auto spec = linear_quadratic_scenario(-1.0, 0.0, 1.0, 1.0, 1.0);
  PenaltySpec pen{20.0};
  RealFn omega = [](double t) { return 0.4 * std::cos(2.0 * t); };
  auto roundtrip_error = [&](int nt) {
    auto control = ControlSignal::sampled(omega, 2.0, nt);
    auto fwd = solve_penalized(spec, pen, 1.0, control);
    auto back = solve_penalized_reverse(spec, pen, fwd.x[nt], control);
    return std::abs(back.x[0] - 1.0);
  };
  const double e1 = roundtrip_error(500), e2 = roundtrip_error(1000);
  CHECK(e1 < 0.05);
  CHECK(e2 < e1);
}

TEST_CASE("reverse integration keeps interior constants") {
  auto spec = builtin_scenario("zero");
  auto control = ControlSignal::constant(0.0, 1.0, 100);
  auto back = solve_penalized_reverse(spec, PenaltySpec{10.0}, 2.0, control);
  CHECK((back.x.array() - 2.0).abs().maxCoeff() == 0.0);
}

TEST_CASE("penalization gaps shrink along the kappa ladder") {
  auto spec = builtin_scenario("figure1");
  auto control = ControlSignal::sampled(spec.omega, 16.0, 8000);
  auto gaps = penalization_gap(spec, spec.x0, control, {10.0, 40.0, 160.0});
  REQUIRE(gaps.size() == 3);
  CHECK(gaps[0] > gaps[1]);
  CHECK(gaps[1] > gaps[2]);
  CHECK(gaps[2] <= gaps[0] / 3.0);
}

TEST_CASE("negative start is rejected by the constrained solvers") {
  auto spec = builtin_scenario("zero");
  auto control = ControlSignal::constant(0.0, 1.0, 10);
  CHECK_THROWS_AS(solve_explicit(-0.5, control), std::invalid_argument);
  CHECK_THROWS_AS(solve_vi(spec, -0.5, control), std::invalid_argument);
}
