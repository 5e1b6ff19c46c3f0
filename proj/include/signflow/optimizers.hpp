#pragma once

#include <optional>
#include <string>

#include "signflow/core.hpp"

namespace signflow {

enum class StepKind { Constant, Adaptive, FaceAware };

struct StepPolicy {
  StepKind kind = StepKind::Adaptive;
  double eta = 0.0;    // Constant only
  bool tuned = false;  // Constant whose eta is chosen by the harness grid search

  static StepPolicy constant(double eta);
  static StepPolicy adaptive() { return {StepKind::Adaptive, 0.0, false}; }
  static StepPolicy face_aware() { return {StepKind::FaceAware, 0.0, false}; }
  static StepPolicy tuned_constant() { return {StepKind::Constant, 0.0, true}; }

  /// Accepts "const:<eta>", "const:tuned", "adaptive", "face". Throws ConfigError.
  static StepPolicy parse(const std::string& text);
  std::string to_string() const;
};

enum class Algorithm { GD, NGD, GCD, SignGD, OneHit, TwoHit, CC, ASGD };

std::string to_string(Algorithm algo);
Algorithm parse_algorithm(const std::string& name);  // gd, ngd, gcd, signgd, ...
/// SignGD, one-hit, two-hit and ASGD: updates of the form -eta * (entries in [-1, 1]).
bool is_sign_family(Algorithm algo);

/// ||g||_1 / ||L||_1; 0 for g = 0.
double adaptive_eta(const Vector& g, const Objective& obj);
/// ||g||_1 / S with S = sum of L_i over {i : |g_i| > eps_active}; 0 when S = 0.
double face_aware_eta(const Vector& g, const Objective& obj, double eps_active);

Vector gd_step(const Vector& x, const Vector& g, double eta);
Vector signgd_step(const Vector& x, const Vector& g, double eta);
Vector normalized_gd_step(const Vector& x, const Vector& g, double eta);
/// Moves only the lowest-index coordinate in the (tau_tie-relaxed) argmax of |g|.
Vector greedy_cd_step(const Vector& x, const Vector& g, double eta, double tau_tie = 0.0);
/// Convex blend of the greedy steps over the argmax set I. `weights`, if given, has one
/// entry per element of I (increasing index order); the default is uniform.
Vector cc_tie_step(const Vector& x, const Vector& g, double eta,
                   const std::optional<Vector>& weights = std::nullopt, double tau_tie = 0.0);

struct FreezeResult {
  Vector x;
  int freezes = 0;
};

/// Sign step, then coordinates whose gradient sign changed since `g_prev` keep their old value.
/// Zero is its own sign state, so + -> 0 counts as a change.
FreezeResult one_hit_freeze_step(const Vector& x, const Vector& g, const Vector& g_prev,
                                 double eta);

struct SlidingXi {
  double D = 0.0;
  std::optional<double> xi;  // none when |D| <= kSlidingDegeneracy
};

constexpr double kSlidingDegeneracy = 1e-14;

/// Multiplier of the extreme velocity that drives the modeled partial derivative to zero,
/// from the last three derivative values and the two steps between them plus the next step.
SlidingXi compute_sliding_xi(double d_km2, double d_km1, double d_k, double eta_km2,
                             double eta_km1, double eta_k);
/// Closed form for eta_{k-2} = eta_{k-1} = eta_k.
SlidingXi compute_sliding_xi_equal_steps(double d_km2, double d_km1, double d_k);

struct SlidingMemory {
  Vector g_prev;
  Vector g_pprev;
  double eta_prev = 0.0;
  double eta_pprev = 0.0;
  int steps = 0;  // completed steps; the sliding test runs once steps >= 2

  /// Memory as at k = 0: both gradients equal grad f(x0).
  static SlidingMemory start(const Vector& g0);
};

struct SlideResult {
  Vector x;
  int slides = 0;  // coordinates whose velocity was scaled below 1
  int triggers = 0;  // coordinates passing the two-flip test
  SlidingMemory memory;
};

SlideResult two_hit_sliding_step(const Vector& x, const Vector& g, const SlidingMemory& mem,
                                 double eta);

struct MomentumState {
  Vector x_prev;
  double beta = 0.9;
  bool restart_enabled = true;
  int restart_count = 0;
};

struct MomentumResult {
  Vector x;
  MomentumState state;
  Vector v;        // extrapolation point actually used
  Vector grad_v;   // gradient at v
  double eta = 0.0;
  bool restarted = false;
};

/// v = x + beta (x - x_prev), reset to x when restart is enabled and f(v) > f(x);
/// x' = v - eta sign(grad f(v)) with eta from `policy` at grad f(v).
MomentumResult asgd_step(const Vector& x, const MomentumState& state, const Objective& obj,
                         const StepPolicy& policy, double eps_active = kDefaultEpsActive);

struct RunOptions {
  double beta = 0.9;
  bool restart = false;
  double eps_active = kDefaultEpsActive;
  double tau_tie = 0.0;
  double epsilon_stop = 1e-12;  // early stop on f_gap; ignored without a reference
  bool keep_iterates = false;
};

/// Step size used by `algo` under `policy` for gradient g (Constant returns its eta).
double policy_eta(Algorithm algo, const StepPolicy& policy, const Vector& g,
                  const Objective& obj, double eps_active);

/// Under FaceAware, entries with |g_i| <= eps_active are zeroed so sign steps leave inactive
/// coordinates in place; other policies return g unchanged.
Vector face_masked_gradient(const Vector& g, const StepPolicy& policy, double eps_active);

/// Runs `iters` steps (fewer on early stop). Row k of the trace describes x_k.
/// Throws ConfigError for an unresolved tuned policy or invalid options.
RunTrace run(const Objective& obj, Algorithm algo, const Vector& x0, const StepPolicy& policy,
             int iters, const RunOptions& options = {});

}  // namespace signflow
