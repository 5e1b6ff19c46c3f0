#pragma once

#include <string>
#include <vector>

#include "signflow/core.hpp"

namespace signflow {

enum class FlowMode { Naive, SlidingAware };

enum class EventKind { Switch, SlideEnter, SlideExit };

std::string to_string(EventKind kind);

struct FlowEvent {
  double time = 0.0;
  int coordinate = 0;  // 0-based
  EventKind kind = EventKind::Switch;
  std::size_t sample = 0;  // index into FlowTrajectory::states
};

struct FlowTrajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  /// velocities[k] is the velocity applied from states[k]; the last entry is the velocity at the
  /// final state.
  std::vector<Vector> velocities;
  std::vector<FlowEvent> events;

  bool has_event(EventKind kind) const;
  std::size_t count(EventKind kind) const;
};

/// Step budget guard: T / h beyond this is refused.
constexpr double kMaxFlowSteps = 1e7;

/// Integrates x' in -Sign(grad f(x)) on [0, T] with base step h.
///
/// Naive mode is explicit Euler with velocity -sign(grad f). SlidingAware mode locates sign
/// changes of each partial derivative by bisection, tests whether the crossing coordinate slides
/// (both one-sided velocities push the partial derivative toward zero) and, while sliding, picks
/// the velocity in [-1, 1] that keeps the partial derivative at zero to first order.
FlowTrajectory integrate_sign_flow(const Objective& obj, const Vector& x0, double h, double T,
                                   FlowMode mode);

/// f(x) = x_2 + (x_2 - a x_1)^2 in two dimensions, with L = (2 a^2, 2).
Objective make_manifold_example(double a);

enum class Regime { Switching, Sliding, Indeterminate };

std::string to_string(Regime regime);

/// Regime of the manifold x_2 = a x_1 of make_manifold_example(a), from the one-sided sign-flow
/// velocities projected on the manifold normal. Throws std::invalid_argument for a <= 0.
Regime classify_regime(double a);

/// Signed distance of x from the manifold x_2 = a x_1.
double manifold_distance(const Vector& x, double a);

/// CSV with columns t,x_1..x_d,event; events are `kind:coordinate` (1-based), ';'-joined.
std::string trajectory_csv(const FlowTrajectory& traj, int dim);

}  // namespace signflow
