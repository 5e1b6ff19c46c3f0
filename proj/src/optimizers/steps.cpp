#include <algorithm>
#include <charconv>
#include <cmath>

#include "signflow/directions.hpp"
#include "signflow/optimizers.hpp"

namespace signflow {

StepPolicy StepPolicy::constant(double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("constant step must be > 0");
  return {StepKind::Constant, eta, false};
}

StepPolicy StepPolicy::parse(const std::string& text) {
  if (text == "adaptive") return adaptive();
  if (text == "face") return face_aware();
  const std::string prefix = "const:";
  if (text.rfind(prefix, 0) == 0) {
    const std::string rest = text.substr(prefix.size());
    if (rest == "tuned") return tuned_constant();
    double eta = 0.0;
    auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), eta);
    if (rest.empty() || ec != std::errc() || ptr != rest.data() + rest.size()) {
      throw ConfigError("invalid step '" + text + "': expected const:<eta>");
    }
    return constant(eta);
  }
  throw ConfigError("invalid step '" + text + "' (expected const:<eta>, const:tuned, adaptive, face)");
}

std::string StepPolicy::to_string() const {
  switch (kind) {
    case StepKind::Adaptive:
      return "adaptive";
    case StepKind::FaceAware:
      return "face";
    case StepKind::Constant: {
      if (tuned && eta == 0.0) return "const:tuned";
      char buf[64];
      auto res = std::to_chars(buf, buf + sizeof(buf), eta);
      return "const:" + std::string(buf, res.ptr);
    }
  }
  return "unknown";
}

std::string to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::GD:
      return "gd";
    case Algorithm::NGD:
      return "ngd";
    case Algorithm::GCD:
      return "gcd";
    case Algorithm::SignGD:
      return "signgd";
    case Algorithm::OneHit:
      return "onehit";
    case Algorithm::TwoHit:
      return "twohit";
    case Algorithm::CC:
      return "cc";
    case Algorithm::ASGD:
      return "asgd";
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
  for (Algorithm a : {Algorithm::GD, Algorithm::NGD, Algorithm::GCD, Algorithm::SignGD,
                      Algorithm::OneHit, Algorithm::TwoHit, Algorithm::CC, Algorithm::ASGD}) {
    if (to_string(a) == name) return a;
  }
  throw ConfigError("unknown algorithm '" + name +
                    "' (expected gd, ngd, gcd, signgd, onehit, twohit, cc, asgd)");
}

bool is_sign_family(Algorithm algo) {
  return algo == Algorithm::SignGD || algo == Algorithm::OneHit || algo == Algorithm::TwoHit ||
         algo == Algorithm::ASGD;
}

double adaptive_eta(const Vector& g, const Objective& obj) {
  return norm(g, NormKind::L1) / obj.lipschitz_l1();
}

double face_aware_eta(const Vector& g, const Objective& obj, double eps_active) {
  const double s = sum_over(obj.coord_lipschitz(), active_set(g, eps_active));
  if (s == 0.0) return 0.0;
  return norm(g, NormKind::L1) / s;
}

Vector gd_step(const Vector& x, const Vector& g, double eta) { return x - eta * g; }

Vector signgd_step(const Vector& x, const Vector& g, double eta) {
  return x - eta * sign_elementwise(g);
}

Vector normalized_gd_step(const Vector& x, const Vector& g, double eta) {
  const double n = g.norm();
  if (n == 0.0) return x;
  return x - (eta / n) * g;
}

Vector greedy_cd_step(const Vector& x, const Vector& g, double eta, double tau_tie) {
  Vector out = x;
  if (norm(g, NormKind::Linf) == 0.0) return out;
  const int i = argmax_abs(g, tau_tie).front();
  out[i] -= eta * sign_of(g[i]);
  return out;
}

Vector cc_tie_step(const Vector& x, const Vector& g, double eta,
                   const std::optional<Vector>& weights, double tau_tie) {
  Vector out = x;
  if (norm(g, NormKind::Linf) == 0.0) return out;
  const auto ties = argmax_abs(g, tau_tie);
  const auto m = static_cast<Eigen::Index>(ties.size());
  Vector w = Vector::Constant(m, 1.0 / static_cast<double>(m));
  if (weights) {
    if (weights->size() != m) {
      throw std::invalid_argument("cc_tie_step: expected " + std::to_string(m) +
                                  " weights, one per tied coordinate");
    }
    if (!weights->allFinite() || (weights->array() < 0.0).any() ||
        std::abs(weights->sum() - 1.0) > 1e-12) {
      throw std::invalid_argument("cc_tie_step: weights must be nonnegative and sum to 1");
    }
    w = *weights;
  }
  for (Eigen::Index k = 0; k < m; ++k) {
    const int i = ties[k];
    out[i] -= eta * w[k] * sign_of(g[i]);
  }
  return out;
}

FreezeResult one_hit_freeze_step(const Vector& x, const Vector& g, const Vector& g_prev,
                                 double eta) {
  if (g.size() != x.size() || g_prev.size() != x.size()) {
    throw std::invalid_argument("one_hit_freeze_step: dimension mismatch");
  }
  FreezeResult r{signgd_step(x, g, eta), 0};
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (sign_of(g_prev[i]) != sign_of(g[i])) {
      r.x[i] = x[i];
      ++r.freezes;
    }
  }
  return r;
}

SlidingXi compute_sliding_xi(double d_km2, double d_km1, double d_k, double eta_km2,
                             double eta_km1, double eta_k) {
  if (!(eta_km2 > 0.0 && eta_km1 > 0.0 && eta_k > 0.0)) {
    throw std::invalid_argument("compute_sliding_xi: step sizes must be > 0");
  }
  SlidingXi r;
  r.D = d_k * eta_km2 - d_km1 * (eta_km2 + eta_km1) + d_km2 * eta_km1;
  if (std::abs(r.D) <= kSlidingDegeneracy) return r;
  const double num = d_k * eta_k * eta_km2 + d_km1 * eta_k * eta_km1 +
                     2.0 * d_k * eta_km1 * eta_km2 - d_km1 * eta_k * eta_km2 -
                     d_km2 * eta_k * eta_km1;
  r.xi = num / (eta_k * r.D);
  return r;
}

SlidingXi compute_sliding_xi_equal_steps(double d_km2, double d_km1, double d_k) {
  SlidingXi r;
  const double denom = d_k - 2.0 * d_km1 + d_km2;
  r.D = denom;  // D / eta for the common step eta
  if (std::abs(denom) <= kSlidingDegeneracy) return r;
  r.xi = (3.0 * d_k - d_km2) / denom;
  return r;
}

SlidingMemory SlidingMemory::start(const Vector& g0) {
  SlidingMemory m;
  m.g_prev = g0;
  m.g_pprev = g0;
  return m;
}

SlideResult two_hit_sliding_step(const Vector& x, const Vector& g, const SlidingMemory& mem,
                                 double eta) {
  if (g.size() != x.size() || mem.g_prev.size() != x.size() ||
      mem.g_pprev.size() != x.size()) {
    throw std::invalid_argument("two_hit_sliding_step: dimension mismatch");
  }
  SlideResult r;
  Vector u = -sign_elementwise(g);
  const bool armed = mem.steps >= 2 && eta > 0.0 && mem.eta_prev > 0.0 && mem.eta_pprev > 0.0;
  if (armed) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double s = sign_of(g[i]);
      const double s1 = sign_of(mem.g_prev[i]);
      const double s2 = sign_of(mem.g_pprev[i]);
      if (s == s1 || s1 == s2) continue;
      ++r.triggers;
      const SlidingXi xi =
          compute_sliding_xi(mem.g_pprev[i], mem.g_prev[i], g[i], mem.eta_pprev, mem.eta_prev, eta);
      if (!xi.xi) continue;
      const double c = std::clamp(*xi.xi, 0.0, 1.0);
      u[i] = -s * c;
      if (c < 1.0) ++r.slides;
    }
  }
  r.x = x + eta * u;
  r.memory.g_pprev = mem.g_prev;
  r.memory.g_prev = g;
  r.memory.eta_pprev = mem.eta_prev;
  r.memory.eta_prev = eta;
  r.memory.steps = mem.steps + 1;
  return r;
}

double policy_eta(Algorithm algo, const StepPolicy& policy, const Vector& g,
                  const Objective& obj, double eps_active) {
  if (policy.kind == StepKind::Constant) {
    if (!(policy.eta > 0.0)) throw ConfigError("constant step size has not been resolved");
    return policy.eta;
  }
  const bool face = policy.kind == StepKind::FaceAware;
  auto curvature_max = [&]() {
    if (!face) return obj.lipschitz_max();
    double m = 0.0;
    for (int i : active_set(g, eps_active)) m = std::max(m, obj.coord_lipschitz()[i]);
    return m;
  };
  switch (algo) {
    case Algorithm::SignGD:
    case Algorithm::OneHit:
    case Algorithm::TwoHit:
    case Algorithm::ASGD:
      return face ? face_aware_eta(g, obj, eps_active) : adaptive_eta(g, obj);
    case Algorithm::GD: {
      const double l = curvature_max();
      return l > 0.0 ? 1.0 / l : 0.0;
    }
    case Algorithm::NGD: {
      const double l = curvature_max();
      return l > 0.0 ? g.norm() / l : 0.0;
    }
    case Algorithm::GCD:
    case Algorithm::CC:
      return norm(g, NormKind::Linf) / obj.lipschitz_max();
  }
  return 0.0;
}

Vector face_masked_gradient(const Vector& g, const StepPolicy& policy, double eps_active) {
  if (policy.kind != StepKind::FaceAware) return g;
  return g.unaryExpr([eps_active](double v) { return std::abs(v) > eps_active ? v : 0.0; });
}

MomentumResult asgd_step(const Vector& x, const MomentumState& state, const Objective& obj,
                         const StepPolicy& policy, double eps_active) {
  if (!(state.beta >= 0.0 && state.beta < 1.0)) throw ConfigError("asgd: beta must lie in [0, 1)");
  if (state.x_prev.size() != x.size()) throw std::invalid_argument("asgd: x_prev dimension");
  MomentumResult r;
  r.state = state;
  r.v = x + state.beta * (x - state.x_prev);
  if (state.restart_enabled && obj.value_difference(r.v, x) > 0.0) {
    r.v = x;
    r.restarted = true;
    ++r.state.restart_count;
  }
  r.grad_v = obj.gradient(r.v);
  r.eta = policy_eta(Algorithm::ASGD, policy, r.grad_v, obj, eps_active);
  r.x = signgd_step(r.v, face_masked_gradient(r.grad_v, policy, eps_active), r.eta);
  r.state.x_prev = x;
  return r;
}

}  // namespace signflow
