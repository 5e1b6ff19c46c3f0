#include <doctest.h>

#include <cmath>

#include "signflow/flowsim.hpp"
#include "signflow/objectives.hpp"
#include "test_util.hpp"

using namespace signflow;

namespace {

void check_trajectory_invariants(const FlowTrajectory& t) {
  REQUIRE(t.times.size() == t.states.size());
  REQUIRE(t.velocities.size() == t.states.size());
  for (std::size_t k = 1; k < t.times.size(); ++k) CHECK(t.times[k] > t.times[k - 1]);
  for (const Vector& x : t.states) CHECK(x.allFinite());
  for (std::size_t k = 1; k < t.events.size(); ++k) CHECK(t.events[k].time >= t.events[k - 1].time);
}

}  // namespace

TEST_CASE("manifold example has the stated gradient") {
  const Objective f = make_manifold_example(2.0);
  const Vector x = vec({0.3, 0.5});
  const double s = 0.5 - 2.0 * 0.3;
  CHECK(f.value(x) == doctest::Approx(0.5 + s * s));
  CHECK(f.gradient(x)[0] == doctest::Approx(-4.0 * s));
  CHECK(f.gradient(x)[1] == doctest::Approx(1.0 + 2.0 * s));
  CHECK(f.coord_lipschitz() == vec({8.0, 2.0}));
  CHECK(manifold_distance(vec({1.0, 2.0}), 2.0) == doctest::Approx(0.0));
}

TEST_CASE("regime classification") {
  CHECK(classify_regime(0.5) == Regime::Switching);
  CHECK(classify_regime(2.0) == Regime::Sliding);
  CHECK(classify_regime(1.0) == Regime::Indeterminate);
  CHECK(classify_regime(0.1) == Regime::Switching);
  CHECK(classify_regime(10.0) == Regime::Sliding);
  CHECK_THROWS_AS(classify_regime(0.0), std::invalid_argument);
  CHECK_THROWS_AS(classify_regime(-1.0), std::invalid_argument);
  CHECK(to_string(Regime::Sliding) == "sliding");
}

TEST_CASE("switching regime crosses once") {
  const Objective f = make_manifold_example(0.5);
  const FlowTrajectory t = integrate_sign_flow(f, vec({0.3, 0.5}), 1e-3, 1.0, FlowMode::SlidingAware);
  check_trajectory_invariants(t);
  CHECK(t.count(EventKind::Switch) == 1);
  CHECK(t.count(EventKind::SlideEnter) == 0);
  REQUIRE(!t.events.empty());
  // Above the manifold the velocity is (1, -1): s(t) = 0.35 - 1.5 t, crossing at t = 0.2333.
  CHECK(t.events[0].time == doctest::Approx(0.35 / 1.5).epsilon(1e-3));
  CHECK(t.events[0].coordinate == 0);
  CHECK(manifold_distance(t.states.back(), 0.5) < 0.0);
}

TEST_CASE("sliding regime tracks the manifold") {
  const Objective f = make_manifold_example(2.0);
  const double h = 1e-3;
  const FlowTrajectory t = integrate_sign_flow(f, vec({0.3, 0.5}), h, 1.0, FlowMode::SlidingAware);
  check_trajectory_invariants(t);
  REQUIRE(t.has_event(EventKind::SlideEnter));
  double enter = 0.0;
  for (const auto& e : t.events) {
    if (e.kind == EventKind::SlideEnter) {
      enter = e.time;
      break;
    }
  }
  // Below the manifold the velocity is (-1, -1): s(t) = -0.1 + t, reaching zero at t = 0.1.
  CHECK(enter == doctest::Approx(0.1).epsilon(1e-3));
  for (std::size_t k = 0; k < t.states.size(); ++k) {
    if (t.times[k] < enter) continue;
    CHECK(std::abs(manifold_distance(t.states[k], 2.0)) <= 2 * h);
    CHECK(t.velocities[k].lpNorm<Eigen::Infinity>() <= 1.0 + 1e-12);
    CHECK(std::abs(t.velocities[k][0]) < 1.0);
  }
  // On the manifold x2 = 2 x1 the sliding velocity keeps dx2 = 2 dx1 with dx2 = -1.
  CHECK(t.velocities.back()[0] == doctest::Approx(-0.5).epsilon(1e-6));
}

TEST_CASE("naive Euler chatters around the sliding manifold") {
  const Objective f = make_manifold_example(2.0);
  const FlowTrajectory t = integrate_sign_flow(f, vec({0.3, 0.5}), 1e-3, 1.0, FlowMode::Naive);
  check_trajectory_invariants(t);
  CHECK(t.count(EventKind::Switch) > 100);
  CHECK_FALSE(t.has_event(EventKind::SlideEnter));
}

TEST_CASE("flow decreases the objective") {
  for (double a : {0.5, 2.0}) {
    const Objective f = make_manifold_example(a);
    for (FlowMode m : {FlowMode::Naive, FlowMode::SlidingAware}) {
      const double h = 1e-3;
      const FlowTrajectory t = integrate_sign_flow(f, vec({0.3, 0.5}), h, 1.0, m);
      for (std::size_t k = 1; k < t.states.size(); ++k) {
        CHECK(f.value_difference(t.states[k], t.states[k - 1]) <= h * h * f.lipschitz_l1());
      }
    }
  }
}

TEST_CASE("separable quadratic reaches the optimum in finite time") {
  const Objective q = make_separable_quadratic(Vector::Ones(2), Vector::Zero(2));
  for (double h : {1e-2, 1e-3}) {
    const FlowTrajectory t = integrate_sign_flow(q, vec({2.0, -3.0}), h, 4.0, FlowMode::SlidingAware);
    check_trajectory_invariants(t);
    CHECK(t.count(EventKind::SlideEnter) == 2);
    double last = 0.0;
    for (const auto& e : t.events) last = std::max(last, e.time);
    CHECK(std::abs(last - 3.0) <= 2 * h);
    CHECK(t.states.back().lpNorm<Eigen::Infinity>() <= 2 * h);
    CHECK(t.times.back() == doctest::Approx(4.0));
  }
}

TEST_CASE("modes coincide away from switching sets") {
  const Objective q = make_separable_quadratic(vec({1.0, 3.0}), vec({0.0, 0.0}));
  const FlowTrajectory a = integrate_sign_flow(q, vec({5.0, -7.0}), 1e-2, 2.0, FlowMode::Naive);
  const FlowTrajectory b = integrate_sign_flow(q, vec({5.0, -7.0}), 1e-2, 2.0, FlowMode::SlidingAware);
  REQUIRE(a.states.size() == b.states.size());
  for (std::size_t k = 0; k < a.states.size(); ++k) {
    CHECK((a.states[k] - b.states[k]).lpNorm<Eigen::Infinity>() <= 1e-12);
  }
}

TEST_CASE("integration input validation") {
  const Objective f = make_manifold_example(2.0);
  const Vector x0 = vec({0.3, 0.5});
  CHECK_THROWS_AS(integrate_sign_flow(f, x0, 0.0, 1.0, FlowMode::Naive), ConfigError);
  CHECK_THROWS_AS(integrate_sign_flow(f, x0, 1e-3, 0.0, FlowMode::Naive), ConfigError);
  CHECK_THROWS_AS(integrate_sign_flow(f, x0, 1e-8, 1.0, FlowMode::Naive), ConfigError);
  CHECK_THROWS(integrate_sign_flow(f, vec({1.0}), 1e-3, 1.0, FlowMode::Naive));
}

TEST_CASE("trajectory CSV layout") {
  const Objective f = make_manifold_example(0.5);
  const FlowTrajectory t = integrate_sign_flow(f, vec({0.3, 0.5}), 0.05, 0.5, FlowMode::SlidingAware);
  const std::string csv = trajectory_csv(t, 2);
  CHECK(csv.rfind("t,x_1,x_2,event\n", 0) == 0);
  CHECK(csv.find("switch:1") != std::string::npos);
  FlowTrajectory empty;
  CHECK(trajectory_csv(empty, 3) == "t,x_1,x_2,x_3,event\n");
}
