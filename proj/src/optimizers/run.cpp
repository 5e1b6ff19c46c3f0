#include <cmath>

#include "signflow/optimizers.hpp"

namespace signflow {

namespace {

int count_sign_flips(const Vector& a, const Vector& b) {
  int n = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) n += sign_of(a[i]) != sign_of(b[i]) ? 1 : 0;
  return n;
}

// Fills the fields of `rec` that describe the point x with gradient g.
void describe_point(TraceRecord& rec, const Objective& obj, const Vector& x, const Vector& g,
                    double eps_active) {
  rec.grad_l1 = norm(g, NormKind::L1);
  const auto active = active_set(g, eps_active);
  rec.active_size = static_cast<int>(active.size());
  rec.active_curvature = sum_over(obj.coord_lipschitz(), active);
  rec.f_value = obj.value(x);
  if (const auto& ref = obj.reference()) {
    rec.f_gap = obj.gap(x);
    rec.dist_sq = (x - ref->x_star).squaredNorm();
  }
}

}  // namespace

RunTrace run(const Objective& obj, Algorithm algo, const Vector& x0, const StepPolicy& policy,
             int iters, const RunOptions& options) {
  if (iters < 0) throw ConfigError("run: iters must be >= 0");
  if (x0.size() != obj.dim()) throw ConfigError("run: x0 dimension does not match the problem");
  require_finite(x0, "run x0");
  if (policy.kind == StepKind::Constant && !(policy.eta > 0.0)) {
    throw ConfigError("run: constant step size must be resolved to a positive value");
  }
  if (!(options.eps_active >= 0.0)) throw ConfigError("run: eps_active must be >= 0");
  if (!(options.tau_tie >= 0.0 && options.tau_tie < 1.0)) {
    throw ConfigError("run: tau_tie must lie in [0, 1)");
  }
  if (algo == Algorithm::ASGD && !(options.beta >= 0.0 && options.beta < 1.0)) {
    throw ConfigError("run: beta must lie in [0, 1)");
  }
  if (!(obj.lipschitz_l1() > 0.0)) {
    throw ConfigError("run: step policies need positive coordinate curvature bounds");
  }

  RunTrace trace;
  trace.algorithm = to_string(algo);
  trace.policy = policy.to_string();
  trace.records.reserve(static_cast<std::size_t>(iters) + 1);

  const double eps = options.eps_active;
  Vector x = x0;
  Vector g = obj.gradient(x);
  {
    TraceRecord rec;
    describe_point(rec, obj, x, g, eps);
    trace.records.push_back(rec);
  }
  if (options.keep_iterates) trace.iterates.push_back(x);

  Vector g_prev = g;
  SlidingMemory sliding = SlidingMemory::start(g);
  MomentumState momentum{x0, options.beta, options.restart, 0};

  auto stop_now = [&]() {
    const auto& last = trace.records.back();
    return last.f_gap && *last.f_gap <= options.epsilon_stop;
  };

  for (int k = 0; k < iters && !stop_now(); ++k) {
    TraceRecord rec;
    rec.iter = k + 1;
    Vector x_next;
    switch (algo) {
      case Algorithm::GD:
        rec.eta = policy_eta(algo, policy, g, obj, eps);
        x_next = gd_step(x, face_masked_gradient(g, policy, eps), rec.eta);
        rec.step_grad_l1 = norm(g, NormKind::L1);
        break;
      case Algorithm::NGD:
        rec.eta = policy_eta(algo, policy, g, obj, eps);
        x_next = normalized_gd_step(x, face_masked_gradient(g, policy, eps), rec.eta);
        rec.step_grad_l1 = norm(g, NormKind::L1);
        break;
      case Algorithm::GCD:
        rec.eta = policy_eta(algo, policy, g, obj, eps);
        x_next = greedy_cd_step(x, g, rec.eta, options.tau_tie);
        rec.step_grad_l1 = norm(g, NormKind::L1);
        break;
      case Algorithm::CC:
        rec.eta = policy_eta(algo, policy, g, obj, eps);
        x_next = cc_tie_step(x, g, rec.eta, std::nullopt, options.tau_tie);
        rec.step_grad_l1 = norm(g, NormKind::L1);
        break;
      case Algorithm::SignGD:
        rec.eta = policy_eta(algo, policy, g, obj, eps);
        x_next = signgd_step(x, face_masked_gradient(g, policy, eps), rec.eta);
        rec.step_grad_l1 = norm(g, NormKind::L1);
        break;
      case Algorithm::OneHit: {
        rec.eta = policy_eta(algo, policy, g, obj, eps);
        const Vector gm = face_masked_gradient(g, policy, eps);
        auto r = one_hit_freeze_step(x, gm, g_prev, rec.eta);
        x_next = std::move(r.x);
        rec.freezes = r.freezes;
        rec.step_grad_l1 = norm(g, NormKind::L1);
        g_prev = gm;
        break;
      }
      case Algorithm::TwoHit: {
        rec.eta = policy_eta(algo, policy, g, obj, eps);
        auto r = two_hit_sliding_step(x, face_masked_gradient(g, policy, eps), sliding, rec.eta);
        x_next = std::move(r.x);
        rec.slides = r.slides;
        rec.step_grad_l1 = norm(g, NormKind::L1);
        sliding = std::move(r.memory);
        break;
      }
      case Algorithm::ASGD: {
        auto r = asgd_step(x, momentum, obj, policy, eps);
        x_next = std::move(r.x);
        rec.eta = r.eta;
        rec.restarts = r.restarted ? 1 : 0;
        rec.step_grad_l1 = norm(r.grad_v, NormKind::L1);
        momentum = std::move(r.state);
        break;
      }
    }
    if (!x_next.allFinite()) {
      throw std::runtime_error("run: iterate became non-finite at step " + std::to_string(k + 1));
    }
    const Vector g_next = obj.gradient(x_next);
    describe_point(rec, obj, x_next, g_next, eps);
    rec.sign_flips = count_sign_flips(g, g_next);
    x = std::move(x_next);
    g = g_next;
    trace.records.push_back(rec);
    if (options.keep_iterates) trace.iterates.push_back(x);
  }
  trace.x_final = x;
  return trace;
}

}  // namespace signflow
