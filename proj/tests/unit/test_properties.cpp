#include <doctest.h>

#include "signflow/objectives.hpp"
#include "signflow/optimizers.hpp"
#include "signflow/properties.hpp"
#include "test_util.hpp"

using namespace signflow;

namespace {

RunOptions iterates() {
  RunOptions o;
  o.keep_iterates = true;
  return o;
}

Objective spread_quadratic() {
  return make_separable_quadratic(vec({1.0, 3.0, 10.0, 30.0}), vec({1.0, -2.0, 0.5, 0.25}));
}

}  // namespace

TEST_CASE("accumulator keeps the smallest slack and the first violation") {
  PropertyAccumulator acc("demo");
  CHECK(acc.result().passed);
  CHECK(acc.result().checked == 0);
  acc.add(0.5, 0);
  acc.add(-0.1, 1);
  acc.add(-0.3, 2);
  const PropertyResult r = acc.result();
  CHECK_FALSE(r.passed);
  CHECK(r.margin == -0.3);
  CHECK(r.checked == 3);
  CHECK(r.detail.find("1") != std::string::npos);
}

TEST_CASE("adaptive sign descent satisfies every rate check") {
  const Objective f = spread_quadratic();
  const RunTrace t = run(f, Algorithm::SignGD, Vector::Zero(4), StepPolicy::adaptive(), 300, iterates());
  CHECK(check_sufficient_decrease(f, t).passed);
  CHECK(check_step_contraction(f, t).passed);
  CHECK(check_cumulative_rate(f, t).passed);
  CHECK(check_distance_rate(f, t).passed);
  CHECK(check_gradient_chain(f, t).passed);
  CHECK(check_face_sandwich(f, t).passed);
  CHECK(check_trust_region(t).passed);
  CHECK(check_monotone(f, t).passed);
}

TEST_CASE("an oversized constant step is caught") {
  const Objective f = spread_quadratic();
  const RunTrace t = run(f, Algorithm::SignGD, Vector::Zero(4), StepPolicy::constant(0.8), 50, iterates());
  CHECK_FALSE(check_sufficient_decrease(f, t).passed);
  CHECK_FALSE(check_monotone(f, t).passed);
  CHECK_FALSE(check_step_contraction(f, t).passed);
}

TEST_CASE("tampered iterates break the trust region") {
  const Objective f = spread_quadratic();
  RunTrace t = run(f, Algorithm::SignGD, Vector::Zero(4), StepPolicy::adaptive(), 5, iterates());
  t.iterates[3][0] += 10.0;
  CHECK_FALSE(check_trust_region(t).passed);
}

TEST_CASE("equal curvature identity and face contraction") {
  const Objective f = make_separable_quadratic(Vector::Constant(6, 2.0), vec({0, 1, 2, 3, 4, 5}));
  const Vector x0 = vec({3, 1, 2, 3, 4, -1});
  const RunTrace t = run(f, Algorithm::SignGD, x0, StepPolicy::face_aware(), 50, iterates());
  CHECK(check_equal_curvature_identity(f, t).passed);
  CHECK(check_face_contraction(f, t).passed);
  CHECK(t.records[0].active_size == 2);
  CHECK(t.records[0].active_curvature == 4.0);
}

TEST_CASE("checks refuse traces they cannot judge") {
  const Objective f = spread_quadratic();
  const RunTrace bare = run(f, Algorithm::SignGD, Vector::Zero(4), StepPolicy::adaptive(), 5);
  CHECK_THROWS_AS(check_sufficient_decrease(f, bare), std::invalid_argument);
  CHECK_THROWS_AS(check_trust_region(bare), std::invalid_argument);

  ProblemSpec s = ProblemSpec::defaults(ProblemKind::LogisticQuadratic);
  s.n = 5;
  s.d = 10;
  const Objective no_mu = make_problem(s);
  const RunTrace t = run(no_mu, Algorithm::SignGD, Vector::Zero(10), StepPolicy::adaptive(), 5, iterates());
  CHECK_THROWS_AS(check_step_contraction(no_mu, t), std::invalid_argument);
}
