#include <doctest.h>

#include <cmath>

#include "signflow/objectives.hpp"
#include "signflow/optimizers.hpp"
#include "signflow/rng.hpp"
#include "test_util.hpp"

using namespace signflow;

namespace {

Objective sep(std::initializer_list<double> L) {
  const Vector l = vec(L);
  return make_separable_quadratic(l, Vector::Zero(l.size()));
}

// Solves the affine two-step model by hand: d_{k-1} - d_{k-2} = (a + b) e2,
// d_k - d_{k-1} = (a - b) e1, then d_k + (a + b xi) e0 = 0.
double model_xi(double d2, double d1, double d0, double e2, double e1, double e0) {
  const double s = (d1 - d2) / e2;
  const double t = (d0 - d1) / e1;
  const double a = 0.5 * (s + t);
  const double b = 0.5 * (s - t);
  return -(d0 / e0 + a) / b;
}

}  // namespace

TEST_CASE("step policy parsing") {
  CHECK(StepPolicy::parse("adaptive").kind == StepKind::Adaptive);
  CHECK(StepPolicy::parse("face").kind == StepKind::FaceAware);
  const StepPolicy c = StepPolicy::parse("const:0.25");
  CHECK(c.kind == StepKind::Constant);
  CHECK(c.eta == 0.25);
  CHECK(StepPolicy::parse("const:tuned").tuned);
  CHECK(StepPolicy::parse(c.to_string()).eta == 0.25);
  for (const char* bad : {"const:0", "const:-1", "const:abc", "const:", "fast", "const:nan"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(StepPolicy::parse(bad), ConfigError);
  }
  CHECK_THROWS_AS(StepPolicy::constant(0.0), ConfigError);
}

TEST_CASE("algorithm names round-trip") {
  for (Algorithm a : {Algorithm::GD, Algorithm::NGD, Algorithm::GCD, Algorithm::SignGD,
                      Algorithm::OneHit, Algorithm::TwoHit, Algorithm::CC, Algorithm::ASGD}) {
    CHECK(parse_algorithm(to_string(a)) == a);
  }
  CHECK_THROWS_AS(parse_algorithm("adam"), ConfigError);
  CHECK(is_sign_family(Algorithm::TwoHit));
  CHECK_FALSE(is_sign_family(Algorithm::GCD));
}

TEST_CASE("adaptive and face-aware step sizes") {
  const Objective f = sep({1.0, 2.0, 5.0});
  CHECK(adaptive_eta(vec({3.0, -4.0, 0.0}), f) == 0.875);
  CHECK(adaptive_eta(vec({0.0, 0.0, 0.0}), f) == 0.0);
  CHECK(adaptive_eta(vec({1.0, 1.0}), sep({1.0, 1.0})) == 1.0);
  CHECK(face_aware_eta(vec({3.0, 0.0, 0.0}), f, 1e-10) == 3.0);
  const Vector all = vec({0.5, -1.0, 2.0});
  CHECK(face_aware_eta(all, f, 1e-10) == adaptive_eta(all, f));
  CHECK(face_aware_eta(vec({0.0, 0.0, 0.0}), f, 1e-10) == 0.0);
}

TEST_CASE("elementary steps") {
  const Vector x0 = vec({0.0, 0.0});
  const Vector g = vec({3.0, -4.0});
  CHECK(signgd_step(x0, g, 0.5) == vec({-0.5, 0.5}));
  CHECK(signgd_step(vec({1.0, 2.0}), vec({0.0, 0.0}), 0.5) == vec({1.0, 2.0}));
  CHECK(signgd_step(vec({1.0, 2.0}), g, 0.0) == vec({1.0, 2.0}));

  CHECK(normalized_gd_step(x0, g, 1.0).isApprox(vec({-0.6, 0.8}), 1e-15));
  CHECK(normalized_gd_step(vec({1.0, 1.0}), vec({0.0, 0.0}), 1.0) == vec({1.0, 1.0}));
  CHECK((normalized_gd_step(x0, g, 2.0) - x0).isApprox(2.0 * (normalized_gd_step(x0, g, 1.0) - x0)));

  CHECK(gd_step(vec({1.0, 1.0}), g, 0.5) == vec({-0.5, 3.0}));

  CHECK(greedy_cd_step(x0, g, 1.0) == vec({0.0, 1.0}));
  CHECK(greedy_cd_step(x0, vec({2.0, -2.0}), 1.0) == vec({-1.0, 0.0}));
  CHECK(greedy_cd_step(vec({1.0, 1.0}), vec({0.0, 0.0}), 1.0) == vec({1.0, 1.0}));
}

TEST_CASE("convex-blend tie step") {
  const Vector x0 = Vector::Zero(3);
  const Vector g = vec({2.0, -2.0, 1.0});
  const Vector dx = cc_tie_step(x0, g, 1.0);
  CHECK(dx == vec({-0.5, 0.5, 0.0}));
  CHECK(g.dot(dx) == -2.0);

  const Vector single = vec({1.0, -3.0, 2.0});
  CHECK(cc_tie_step(x0, single, 0.7) == greedy_cd_step(x0, single, 0.7));

  CHECK(cc_tie_step(x0, g, 1.0, vec({0.0, 1.0})) == vec({0.0, 1.0, 0.0}));
  CHECK_THROWS_AS(cc_tie_step(x0, g, 1.0, vec({0.5, 0.2})), std::invalid_argument);
  CHECK_THROWS_AS(cc_tie_step(x0, g, 1.0, vec({1.5, -0.5})), std::invalid_argument);
  CHECK_THROWS_AS(cc_tie_step(x0, g, 1.0, vec({1.0})), std::invalid_argument);
}

TEST_CASE("one-hit freeze") {
  const FreezeResult r = one_hit_freeze_step(vec({0.0, 0.0}), vec({1.0, -1.0}), vec({1.0, 1.0}), 1.0);
  CHECK(r.x == vec({-1.0, 0.0}));
  CHECK(r.freezes == 1);

  const Vector g = vec({0.5, -2.0, 3.0});
  const FreezeResult same = one_hit_freeze_step(Vector::Zero(3), g, g, 0.3);
  CHECK(same.freezes == 0);
  CHECK(same.x == signgd_step(Vector::Zero(3), g, 0.3));

  const FreezeResult all = one_hit_freeze_step(vec({1.0, 2.0, 3.0}), g, -g, 0.3);
  CHECK(all.freezes == 3);
  CHECK(all.x == vec({1.0, 2.0, 3.0}));

  const FreezeResult to_zero = one_hit_freeze_step(vec({1.0}), vec({0.0}), vec({1.0}), 0.3);
  CHECK(to_zero.freezes == 1);
}

TEST_CASE("sliding multiplier examples") {
  const SlidingXi a = compute_sliding_xi(0.9, -0.7, 0.5, 1.0, 1.0, 1.0);
  REQUIRE(a.xi);
  CHECK(*a.xi == doctest::Approx(0.6 / 2.8).epsilon(1e-14));
  CHECK(*a.xi == doctest::Approx(0.3 / 1.4).epsilon(1e-14));
  CHECK(*a.xi == doctest::Approx(model_xi(0.9, -0.7, 0.5, 1.0, 1.0, 1.0)).epsilon(1e-14));
  const SlidingXi ae = compute_sliding_xi_equal_steps(0.9, -0.7, 0.5);
  REQUIRE(ae.xi);
  CHECK(*ae.xi == doctest::Approx(*a.xi).epsilon(1e-14));

  const SlidingXi b = compute_sliding_xi(1.0, -0.5, 0.25, 1.0, 1.0, 1.0);
  REQUIRE(b.xi);
  CHECK(*b.xi == doctest::Approx(-0.25 / 2.25).epsilon(1e-14));

  const SlidingXi c = compute_sliding_xi(0.5, 0.5, 0.5, 1.0, 1.0, 1.0);
  CHECK(c.D == 0.0);
  CHECK_FALSE(c.xi);
  CHECK_FALSE(compute_sliding_xi_equal_steps(0.5, 0.5, 0.5).xi);

  CHECK_THROWS_AS(compute_sliding_xi(1.0, -1.0, 1.0, 0.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("sliding multiplier agrees with the hand-solved model on unequal steps") {
  CounterRng rng(41);
  int checked = 0;
  while (checked < 300) {
    const double d2 = rng.normal();
    const double d1 = rng.normal();
    const double d0 = rng.normal();
    const double e2 = 0.1 + rng.uniform();
    const double e1 = 0.1 + rng.uniform();
    const double e0 = 0.1 + rng.uniform();
    const double b = 0.5 * ((d1 - d2) / e2 - (d0 - d1) / e1);
    if (std::abs(b) < 1e-3) continue;
    const SlidingXi r = compute_sliding_xi(d2, d1, d0, e2, e1, e0);
    REQUIRE(r.xi);
    const double expected = model_xi(d2, d1, d0, e2, e1, e0);
    CHECK(std::abs(*r.xi - expected) <= 1e-9 * (1.0 + std::abs(expected)));
    ++checked;
  }
}

TEST_CASE("two-hit sliding step") {
  SUBCASE("no double flip behaves like a sign step") {
    const Vector g = vec({1.0, -2.0});
    SlidingMemory mem = SlidingMemory::start(g);
    const SlideResult r = two_hit_sliding_step(vec({0.0, 0.0}), g, mem, 0.5);
    CHECK(r.x == signgd_step(vec({0.0, 0.0}), g, 0.5));
    CHECK(r.slides == 0);
    CHECK(r.memory.steps == 1);
  }
  SUBCASE("alternating history scales the velocity") {
    SlidingMemory mem;
    mem.g_pprev = vec({0.9, 1.0});
    mem.g_prev = vec({-0.7, 1.0});
    mem.eta_pprev = 1.0;
    mem.eta_prev = 1.0;
    mem.steps = 2;
    const SlideResult r = two_hit_sliding_step(vec({0.0, 0.0}), vec({0.5, 1.0}), mem, 1.0);
    CHECK(r.x[0] == doctest::Approx(-0.214286).epsilon(1e-6));
    CHECK(r.x[1] == -1.0);
    CHECK(r.slides == 1);
    CHECK(r.triggers == 1);
    CHECK(r.memory.g_pprev == mem.g_prev);
    CHECK(r.memory.g_prev == vec({0.5, 1.0}));
  }
  SUBCASE("negative multiplier freezes the coordinate") {
    SlidingMemory mem;
    mem.g_pprev = vec({1.0});
    mem.g_prev = vec({-0.5});
    mem.eta_pprev = 1.0;
    mem.eta_prev = 1.0;
    mem.steps = 2;
    const SlideResult r = two_hit_sliding_step(vec({2.0}), vec({0.25}), mem, 1.0);
    CHECK(r.x == vec({2.0}));
  }
  SUBCASE("multiplier above one keeps the full sign velocity") {
    const double dk = 6.1 / 1.3;
    REQUIRE(*compute_sliding_xi_equal_steps(1.0, -1.0, dk).xi == doctest::Approx(1.7));
    SlidingMemory mem;
    mem.g_pprev = vec({1.0});
    mem.g_prev = vec({-1.0});
    mem.eta_pprev = 1.0;
    mem.eta_prev = 1.0;
    mem.steps = 2;
    const SlideResult r = two_hit_sliding_step(vec({0.0}), vec({dk}), mem, 1.0);
    CHECK(r.x == vec({-1.0}));
    CHECK(r.slides == 0);
    CHECK(r.triggers == 1);
  }
  SUBCASE("the test waits for two completed steps") {
    SlidingMemory mem;
    mem.g_pprev = vec({0.9});
    mem.g_prev = vec({-0.7});
    mem.eta_pprev = 1.0;
    mem.eta_prev = 1.0;
    mem.steps = 1;
    const SlideResult r = two_hit_sliding_step(vec({0.0}), vec({0.5}), mem, 1.0);
    CHECK(r.x == vec({-1.0}));
  }
}

TEST_CASE("momentum sign step") {
  const Objective f = make_separable_quadratic(vec({1.0, 3.0}), vec({0.2, -0.4}));
  const Vector x = vec({1.0, 1.0});
  SUBCASE("beta = 0 is one adaptive sign step") {
    MomentumState st{vec({5.0, -2.0}), 0.0, false, 0};
    const MomentumResult r = asgd_step(x, st, f, StepPolicy::adaptive());
    const Vector g = f.gradient(x);
    CHECK(r.x == signgd_step(x, g, adaptive_eta(g, f)));
  }
  SUBCASE("zero velocity gives v = x") {
    MomentumState st{x, 0.9, true, 0};
    const MomentumResult r = asgd_step(x, st, f, StepPolicy::adaptive());
    CHECK(r.v == x);
    CHECK_FALSE(r.restarted);
  }
  SUBCASE("lands on the optimum of the unit separable quadratic") {
    const Objective q = sep({1.0, 1.0});
    MomentumState st{vec({1.0, 1.0}), 0.9, true, 0};
    const MomentumResult r = asgd_step(vec({1.0, 1.0}), st, q, StepPolicy::adaptive());
    CHECK(r.v == vec({1.0, 1.0}));
    CHECK(r.eta == 1.0);
    CHECK(r.x == vec({0.0, 0.0}));
  }
  SUBCASE("restart resets an uphill extrapolation") {
    MomentumState st{vec({0.2, -0.4}), 0.9, true, 0};
    const MomentumResult r = asgd_step(x, st, f, StepPolicy::adaptive());
    CHECK(r.restarted);
    CHECK(r.v == x);
    CHECK(r.state.restart_count == 1);
    st.restart_enabled = false;
    const MomentumResult n = asgd_step(x, st, f, StepPolicy::adaptive());
    CHECK_FALSE(n.restarted);
  }
  SUBCASE("beta outside [0, 1) is rejected") {
    MomentumState st{x, 1.0, true, 0};
    CHECK_THROWS_AS(asgd_step(x, st, f, StepPolicy::adaptive()), ConfigError);
  }
}

TEST_CASE("run loop") {
  const Objective q = sep({1.0, 1.0});
  SUBCASE("zero iterations records only the start") {
    const RunTrace t = run(q, Algorithm::SignGD, vec({1.0, 1.0}), StepPolicy::adaptive(), 0);
    CHECK(t.records.size() == 1);
    CHECK(t.records[0].iter == 0);
    CHECK(t.records[0].eta == 0.0);
  }
  SUBCASE("adaptive sign step reaches the optimum at iteration 1") {
    const RunTrace t = run(q, Algorithm::SignGD, vec({1.0, 1.0}), StepPolicy::adaptive(), 10);
    REQUIRE(t.records.size() >= 2);
    CHECK(*t.records[1].f_gap == 0.0);
    CHECK(t.records[1].eta == 1.0);
    CHECK(t.x_final == vec({0.0, 0.0}));
  }
  SUBCASE("validation") {
    CHECK_THROWS_AS(run(q, Algorithm::SignGD, vec({1.0}), StepPolicy::adaptive(), 5), ConfigError);
    CHECK_THROWS_AS(run(q, Algorithm::SignGD, vec({1.0, 1.0}), StepPolicy::adaptive(), -1), ConfigError);
    CHECK_THROWS_AS(run(q, Algorithm::SignGD, vec({1.0, 1.0}), StepPolicy::tuned_constant(), 5),
                    ConfigError);
    RunOptions o;
    o.beta = 1.5;
    CHECK_THROWS_AS(run(q, Algorithm::ASGD, vec({1.0, 1.0}), StepPolicy::adaptive(), 5, o), ConfigError);
  }
  SUBCASE("divergent constant step is reported") {
    const Objective f = make_separable_quadratic(vec({1.0}), vec({0.0}));
    CHECK_NOTHROW(run(f, Algorithm::GD, vec({1.0}), StepPolicy::constant(1.9), 100));
    CHECK_THROWS_AS(run(f, Algorithm::GD, vec({1.0}), StepPolicy::constant(1e300), 10),
                    std::runtime_error);
  }
  SUBCASE("every algorithm decreases the gap on a small quadratic") {
    const Objective f = make_separable_quadratic(vec({1.0, 2.0, 4.0, 8.0}), vec({1.0, -1.0, 0.5, 2.0}));
    for (Algorithm a : {Algorithm::GD, Algorithm::NGD, Algorithm::GCD, Algorithm::SignGD,
                        Algorithm::OneHit, Algorithm::TwoHit, Algorithm::CC, Algorithm::ASGD}) {
      for (StepPolicy p : {StepPolicy::adaptive(), StepPolicy::face_aware()}) {
        CAPTURE(to_string(a));
        RunOptions o;
        o.restart = true;
        o.beta = 0.5;
        const RunTrace t = run(f, a, Vector::Zero(4), p, 200, o);
        CHECK(*t.records.back().f_gap < 1e-3 * *t.records.front().f_gap);
        for (std::size_t k = 1; k < t.records.size(); ++k) {
          CHECK(t.records[k].iter == t.records[k - 1].iter + 1);
          CHECK(*t.records[k].f_gap >= -1e-12);
        }
      }
    }
  }
}

TEST_CASE("face-aware sign steps leave inactive coordinates in place") {
  const Objective f = make_separable_quadratic(vec({2.0, 2.0, 2.0, 2.0}), vec({0.0, 1.0, 2.0, 3.0}));
  const Vector x0 = vec({5.0, 1.0, 2.0, 3.0});
  RunOptions o;
  o.keep_iterates = true;
  const RunTrace t = run(f, Algorithm::SignGD, x0, StepPolicy::face_aware(), 3, o);
  CHECK(t.records[0].active_size == 1);
  CHECK(t.records[0].active_curvature == 2.0);
  CHECK(t.iterates[1] == vec({0.0, 1.0, 2.0, 3.0}));
  CHECK(*t.records[1].f_gap == 0.0);
}

TEST_CASE("logistic-quadratic adaptive run is monotone") {
  ProblemSpec s = ProblemSpec::defaults(ProblemKind::LogisticQuadratic);
  s.d = 200;
  s.seed = 3;
  const ProblemInstance inst = generate_instance(s);
  Objective f = build_objective(inst);
  const ReferenceSolution ref = reference_solve(f, default_start(inst));
  REQUIRE(ref.converged);
  f = f.with_reference({ref.x_star, ref.f_star});
  const RunTrace t = run(f, Algorithm::SignGD, default_start(inst), StepPolicy::adaptive(), 2000);
  for (std::size_t k = 1; k < t.records.size(); ++k) {
    CHECK(*t.records[k].f_gap <= *t.records[k - 1].f_gap + 1e-12);
  }
}
