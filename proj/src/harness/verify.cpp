#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "signflow/directions.hpp"
#include "signflow/harness.hpp"
#include "signflow/properties.hpp"
#include "signflow/rng.hpp"
#include "signflow/trace_io.hpp"

namespace signflow {

namespace {

class Reporter {
 public:
  explicit Reporter(std::ostream& out) : out_(out) {}

  void report(const std::string& suite, const PropertyResult& r) {
    out_ << (r.passed ? "PASS" : "FAIL") << "  " << suite << "/" << r.name
         << "  margin=" << std::setprecision(6) << r.margin << "  checked=" << r.checked;
    if (!r.passed) out_ << "  " << r.detail;
    out_ << "\n";
    out_.flush();
    failures_ += r.passed ? 0 : 1;
  }

  void report(const std::string& suite, const std::string& name, bool ok, double margin,
              const std::string& detail = "") {
    PropertyResult r;
    r.name = name;
    r.passed = ok;
    r.margin = margin;
    r.checked = 1;
    r.detail = detail;
    report(suite, r);
  }

  int failures() const { return failures_; }

 private:
  std::ostream& out_;
  int failures_ = 0;
};

struct ZooProblem {
  std::string name;
  Objective obj;
  Vector x0;
};

ZooProblem zoo_problem(ProblemKind kind, int d) {
  ProblemSpec spec = ProblemSpec::defaults(kind);
  spec.d = d;
  spec.seed = 7;
  const ProblemInstance inst = generate_instance(spec);
  Objective obj = build_objective(inst);
  const Vector x0 = default_start(inst);
  if (!obj.reference()) {
    const ReferenceSolution ref = reference_solve(obj, x0);
    obj = obj.with_reference({ref.x_star, ref.f_star});
  }
  return {to_string(kind), obj, x0};
}

std::vector<ZooProblem> rate_problems() {
  std::vector<ZooProblem> out;
  ProblemSpec sep = ProblemSpec::defaults(ProblemKind::SeparableQuadratic);
  sep.d = 50;
  sep.kappa = 100.0;
  sep.seed = 7;
  const ProblemInstance inst = generate_instance(sep);
  out.push_back({"sepquad", build_objective(inst), default_start(inst)});
  out.push_back(zoo_problem(ProblemKind::LogisticQuadratic, 200));
  out.push_back(zoo_problem(ProblemKind::SmoothMax, 200));
  return out;
}

RunOptions with_iterates() {
  RunOptions o;
  o.keep_iterates = true;
  return o;
}

void suite_lemmas(Reporter& rep) {
  const std::string suite = "lemmas";
  CounterRng rng(derive_seed(11, "lemmas"));
  {
    PropertyAccumulator acc("dual-norm oracle equivalence");
    PropertyAccumulator face("steepest-face representative");
    for (BallKind kind : {BallKind::Linf, BallKind::L2, BallKind::L1}) {
      const NormBall ball(kind);
      for (int s = 0; s < 500; ++s) {
        const int d = 2 + static_cast<int>(rng.uniform() * 5.0);
        const Vector g = rng.normal_vector(d);
        const double dual = dual_norm(g, ball);
        const LinearMinimum m = brute_force_min_linear(g, ball, derive_seed(s, "oracle"));
        const double tol = kind == BallKind::L2 && d > 3 ? 1e-4 : 1e-9;
        acc.add(tol - std::abs(m.value + dual), s);
        const DirectionFace f = steepest_face(g, ball);
        face.add(1e-12 * (1.0 + dual) - std::abs(g.dot(f.representative) + dual), s);
      }
    }
    rep.report(suite, acc.result());
    rep.report(suite, face.result());
  }
  {
    PropertyAccumulator acc("tie-facet descent");
    for (int s = 0; s < 1000; ++s) {
      const int d = 2 + static_cast<int>(rng.uniform() * 8.0);
      Vector g = rng.normal_vector(d);
      const double p = 0.5 + rng.uniform();
      const int ties = 1 + static_cast<int>(rng.uniform() * d);
      for (int i = 0; i < ties; ++i) g[i] = (rng.uniform() < 0.5 ? -p : p);
      for (int i = ties; i < d; ++i) g[i] = std::clamp(g[i], -0.9 * p, 0.9 * p);
      Vector w(ties);
      for (int i = 0; i < ties; ++i) w[i] = rng.uniform() + 1e-3;
      w /= w.sum();
      const double eta = 0.01 + rng.uniform();
      const Vector x = rng.normal_vector(d);
      const Vector dx = cc_tie_step(x, g, eta, w) - x;
      const double target = -eta * p;
      acc.add(1e-12 * std::abs(target) - std::abs(g.dot(dx) - target), s);
    }
    rep.report(suite, acc.result());
  }
  {
    PropertyAccumulator odd("sign is odd");
    PropertyAccumulator chain("norm chain");
    for (int s = 0; s < 500; ++s) {
      const Vector v = rng.normal_vector(1 + static_cast<int>(rng.uniform() * 20.0));
      odd.add(sign_elementwise(-v) == -sign_elementwise(v) ? 0.0 : -1.0, s);
      const double a = norm(v, NormKind::Linf);
      const double b = norm(v, NormKind::L2);
      const double c = norm(v, NormKind::L1);
      chain.add(std::min(b - a, c - b) + 1e-15 * c, s);
    }
    rep.report(suite, odd.result());
    rep.report(suite, chain.result());
  }
  for (const ZooProblem& p : rate_problems()) {
    const RunTrace t = run(p.obj, Algorithm::SignGD, p.x0, StepPolicy::adaptive(), 300,
                           with_iterates());
    rep.report(suite + "[" + p.name + "]", check_gradient_chain(p.obj, t));
  }
}

void suite_rates(Reporter& rep) {
  for (const ZooProblem& p : rate_problems()) {
    const std::string suite = "rates[" + p.name + "]";
    const RunTrace t = run(p.obj, Algorithm::SignGD, p.x0, StepPolicy::adaptive(), 2000,
                           with_iterates());
    rep.report(suite, check_sufficient_decrease(p.obj, t));
    rep.report(suite, check_step_contraction(p.obj, t));
    rep.report(suite, check_cumulative_rate(p.obj, t));
    rep.report(suite, check_distance_rate(p.obj, t));
    rep.report(suite, check_face_sandwich(p.obj, t));
    rep.report(suite, check_trust_region(t));
    rep.report(suite, check_monotone(p.obj, t));

    RunOptions o = with_iterates();
    o.restart = true;
    o.beta = p.name == "smoothmax" ? 0.4 : 0.3;
    const RunTrace m = run(p.obj, Algorithm::ASGD, p.x0, StepPolicy::adaptive(), 2000, o);
    PropertyResult safeguard = check_sufficient_decrease(p.obj, m, 1e-9, true);
    safeguard.name = "momentum restart descent";
    rep.report(suite, safeguard);
    const double g_sign = *t.records.back().f_gap;
    const double g_mom = *m.records.back().f_gap;
    rep.report(suite, "momentum final gap <= signgd final gap",
               g_mom <= std::max(g_sign, o.epsilon_stop), std::max(g_sign, o.epsilon_stop) - g_mom);
  }
  {
    // Equal curvature with 90% of the coordinates already optimal.
    const int d = 100;
    CounterRng rng(derive_seed(13, "face"));
    Vector center = rng.normal_vector(d);
    const Objective obj = make_separable_quadratic(Vector::Constant(d, 2.0), center);
    Vector x0 = center;
    for (int i = 0; i < d / 10; ++i) x0[i] += 1.0 + rng.uniform();
    const RunTrace t = run(obj, Algorithm::SignGD, x0, StepPolicy::face_aware(), 200,
                           with_iterates());
    const std::string suite = "rates[face-aware]";
    rep.report(suite, check_face_contraction(obj, t));
    rep.report(suite, check_equal_curvature_identity(obj, t));
    rep.report(suite, check_face_sandwich(obj, t));
  }
}

void suite_sliding(Reporter& rep) {
  const std::string suite = "sliding";
  CounterRng rng(derive_seed(17, "sliding"));
  PropertyAccumulator model("sliding multiplier model consistency");
  PropertyAccumulator equal("equal-step closed form");
  int made = 0;
  for (int attempt = 0; made < 1000 && attempt < 100000; ++attempt) {
    const double alpha = 2.0 * rng.uniform() - 1.0;
    const double beta = (rng.uniform() < 0.5 ? -1.0 : 1.0) * (0.2 + 2.0 * rng.uniform());
    const double e2 = 0.05 + rng.uniform();
    const double e1 = 0.05 + rng.uniform();
    const double e0 = 0.05 + rng.uniform();
    const double d2 = 2.0 * rng.uniform() - 1.0;
    const double d1 = d2 + (alpha + beta) * e2;
    const double d0 = d1 + (alpha - beta) * e1;
    if (!(sign_of(d2) != sign_of(d1) && sign_of(d1) != sign_of(d0) && d0 != 0.0)) continue;
    const SlidingXi r = compute_sliding_xi(d2, d1, d0, e2, e1, e0);
    if (!r.xi) continue;
    const double next = d0 + (alpha + beta * *r.xi) * e0;
    const double scale = std::max({1.0, std::abs(d0), std::abs(beta * *r.xi * e0)});
    model.add(1e-12 * scale - std::abs(next), made);
    const SlidingXi gen = compute_sliding_xi(d2, d1, d0, e0, e0, e0);
    const SlidingXi eq = compute_sliding_xi_equal_steps(d2, d1, d0);
    if (gen.xi && eq.xi) {
      equal.add(1e-12 * std::max(1.0, std::abs(*gen.xi)) - std::abs(*gen.xi - *eq.xi), made);
    }
    ++made;
  }
  rep.report(suite, model.result());
  rep.report(suite, equal.result());

  // Chattering instance: plain sign steps against the two-hit rule on the a = 2 manifold.
  const Objective f = make_manifold_example(2.0);
  Vector x0(2);
  x0 << 0.3, 0.5;
  const RunTrace plain = run(f, Algorithm::SignGD, x0, StepPolicy::constant(0.01), 500);
  const RunTrace two = run(f, Algorithm::TwoHit, x0, StepPolicy::constant(0.01), 500);
  int first = -1;
  for (const auto& r : two.records) {
    if (r.slides > 0) {
      first = r.iter;
      break;
    }
  }
  int flips_plain = 0;
  int flips_two = 0;
  for (const auto& r : plain.records) flips_plain += r.iter > first ? r.sign_flips : 0;
  for (const auto& r : two.records) flips_two += r.iter > first ? r.sign_flips : 0;
  std::ostringstream os;
  os << "two-hit " << flips_two << " vs plain " << flips_plain << " after step " << first;
  rep.report(suite, "two-hit reduces post-trigger sign flips", first >= 0 && flips_two < flips_plain,
             static_cast<double>(flips_plain - flips_two), os.str());

  // Quadratic descent bound of the convex-blend step on zoo problems.
  for (ProblemKind kind : {ProblemKind::LogisticQuadratic, ProblemKind::SmoothMax}) {
    ProblemSpec spec = ProblemSpec::defaults(kind);
    spec.d = 50;
    spec.n = 500;
    spec.seed = 3;
    const ProblemInstance inst = generate_instance(spec);
    const Objective obj = build_objective(inst);
    PropertyAccumulator acc("blend descent bound");
    for (int s = 0; s < 200; ++s) {
      const Vector x = default_start(inst) + 0.5 * rng.normal_vector(spec.d);
      const Vector g = obj.gradient(x);
      const double p = norm(g, NormKind::Linf);
      const double eta = (0.1 + rng.uniform()) * p / obj.lipschitz_max();
      const Vector dx = cc_tie_step(x, g, eta, std::nullopt, 0.0) - x;
      const double u2 = (dx / eta).squaredNorm();
      const double bound = -eta * p + 0.5 * obj.lipschitz_max() * eta * eta * u2;
      const double change = obj.value_difference(x + dx, x);
      acc.add(bound + 1e-9 - change, s);
    }
    PropertyResult r = acc.result();
    rep.report(suite + "[" + to_string(kind) + "]", r);
  }
}

void suite_flow(Reporter& rep) {
  const std::string suite = "flow";
  rep.report(suite, "regime a=0.5 is switching", classify_regime(0.5) == Regime::Switching, 0.0);
  rep.report(suite, "regime a=2 is sliding", classify_regime(2.0) == Regime::Sliding, 0.0);
  rep.report(suite, "regime a=1 is indeterminate", classify_regime(1.0) == Regime::Indeterminate,
             0.0);

  Vector x0(2);
  x0 << 0.3, 0.5;
  const double h = 1e-3;
  {
    const Objective f = make_manifold_example(2.0);
    const FlowTrajectory traj = integrate_sign_flow(f, x0, h, 1.0, FlowMode::SlidingAware);
    double enter = -1.0;
    for (const auto& e : traj.events) {
      if (e.kind == EventKind::SlideEnter) {
        enter = e.time;
        break;
      }
    }
    double worst = 0.0;
    PropertyAccumulator member("Filippov velocity membership");
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
      if (enter < 0.0 || traj.times[k] < enter) continue;
      worst = std::max(worst, std::abs(manifold_distance(traj.states[k], 2.0)));
      const Vector& v = traj.velocities[k];
      member.add(std::min(1.0 + 1e-12 - v.lpNorm<Eigen::Infinity>(), 1.0 - std::abs(v[0])),
                 static_cast<int>(k));
    }
    rep.report(suite, "a=2 slides and tracks the manifold within 2h", enter >= 0.0 && worst <= 2 * h,
               2 * h - worst);
    rep.report(suite, member.result());
    PropertyAccumulator descent("flow descent");
    for (std::size_t k = 0; k + 1 < traj.states.size(); ++k) {
      descent.add(h * h * f.lipschitz_l1() -
                      f.value_difference(traj.states[k + 1], traj.states[k]),
                  static_cast<int>(k));
    }
    rep.report(suite, descent.result());
  }
  {
    const Objective f = make_manifold_example(0.5);
    const FlowTrajectory traj = integrate_sign_flow(f, x0, h, 1.0, FlowMode::SlidingAware);
    const bool single = traj.count(EventKind::Switch) == 1 && traj.count(EventKind::SlideEnter) == 0;
    rep.report(suite, "a=0.5 crosses once", single, single ? 0.0 : -1.0);
  }
  {
    // Naive Euler chatters in a band whose width scales with h.
    const Objective f = make_manifold_example(2.0);
    auto band = [&](double step) {
      const FlowTrajectory t = integrate_sign_flow(f, x0, step, 1.0, FlowMode::Naive);
      double w = 0.0;
      for (std::size_t k = 0; k < t.states.size(); ++k) {
        if (t.times[k] > 0.5) w = std::max(w, std::abs(manifold_distance(t.states[k], 2.0)));
      }
      return w;
    };
    const double ratio = band(h / 2) / band(h);
    rep.report(suite, "halving h halves the chattering band", std::abs(ratio - 0.5) <= 0.1,
               0.1 - std::abs(ratio - 0.5));
  }
  {
    const Objective q = make_separable_quadratic(Vector::Ones(2), Vector::Zero(2));
    Vector start(2);
    start << 2.0, -3.0;
    // Explicit Euler against the exact solution x_i(t) = sign(x0_i) max(|x0_i| - t, 0).
    auto euler_error = [&](double step) {
      const FlowTrajectory naive = integrate_sign_flow(q, start, step, 4.0, FlowMode::Naive);
      double dev = 0.0;
      for (std::size_t k = 0; k < naive.states.size(); ++k) {
        for (int i = 0; i < 2; ++i) {
          const double exact = sign_of(start[i]) * std::max(std::abs(start[i]) - naive.times[k], 0.0);
          dev = std::max(dev, std::abs(naive.states[k][i] - exact));
        }
      }
      return dev;
    };
    for (double step : {1e-2, 1e-3}) {
      const FlowTrajectory traj = integrate_sign_flow(q, start, step, 4.0, FlowMode::SlidingAware);
      double arrival = -1.0;
      for (const auto& e : traj.events) {
        if (e.kind == EventKind::SlideEnter) arrival = std::max(arrival, e.time);
      }
      double after = 0.0;
      for (std::size_t k = 0; k < traj.states.size(); ++k) {
        if (arrival >= 0.0 && traj.times[k] >= arrival) {
          after = std::max(after, traj.states[k].lpNorm<Eigen::Infinity>());
        }
      }
      const double err = std::abs(arrival - 3.0);
      const std::string tag = " (h=" + format_double(step) + ")";
      rep.report(suite, "separable flow reaches x* at t=3" + tag,
                 arrival >= 0.0 && err <= 2 * step && after <= 2 * step,
                 std::min(2 * step - err, 2 * step - after));
      const double ratio = euler_error(step / 2) / euler_error(step);
      rep.report(suite, "separable flow error halves with h" + tag, std::abs(ratio - 0.5) <= 0.1,
                 0.1 - std::abs(ratio - 0.5));
    }
    // Off switching sets both modes coincide.
    Vector far(2);
    far << 5.0, -7.0;
    const FlowTrajectory a = integrate_sign_flow(q, far, 1e-2, 1.0, FlowMode::Naive);
    const FlowTrajectory b = integrate_sign_flow(q, far, 1e-2, 1.0, FlowMode::SlidingAware);
    double diff = a.states.size() == b.states.size() ? 0.0 : 1.0;
    for (std::size_t k = 0; diff < 1.0 && k < a.states.size(); ++k) {
      diff = std::max(diff, (a.states[k] - b.states[k]).lpNorm<Eigen::Infinity>());
    }
    rep.report(suite, "naive and sliding-aware agree off switching sets", diff <= 1e-12,
               1e-12 - diff);
  }
}

}  // namespace

VerifyScope parse_verify_scope(const std::string& name) {
  if (name == "all") return VerifyScope::All;
  if (name == "lemmas") return VerifyScope::Lemmas;
  if (name == "rates") return VerifyScope::Rates;
  if (name == "sliding") return VerifyScope::Sliding;
  if (name == "flow") return VerifyScope::Flow;
  throw ConfigError("unknown verify scope '" + name + "' (expected all, lemmas, rates, sliding, flow)");
}

int cli_verify(VerifyScope scope, std::ostream& out) {
  Reporter rep(out);
  const bool all = scope == VerifyScope::All;
  if (all || scope == VerifyScope::Lemmas) suite_lemmas(rep);
  if (all || scope == VerifyScope::Rates) suite_rates(rep);
  if (all || scope == VerifyScope::Sliding) suite_sliding(rep);
  if (all || scope == VerifyScope::Flow) suite_flow(rep);
  out << (rep.failures() == 0 ? "all properties passed" : std::to_string(rep.failures()) +
                                                              " properties failed")
      << "\n";
  return rep.failures() == 0 ? kExitOk : kExitPropertyFailure;
}

}  // namespace signflow
