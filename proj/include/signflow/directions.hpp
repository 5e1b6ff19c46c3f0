#pragma once

#include <cstdint>
#include <vector>

#include "signflow/core.hpp"

namespace signflow {

enum class BallKind { L1, L2, Linf };

/// Primal constraint set {v : ||v|| <= radius}.
struct NormBall {
  BallKind kind = BallKind::Linf;
  double radius = 1.0;

  NormBall() = default;
  NormBall(BallKind k, double r = 1.0);
};

/// Exposed face of the ball in direction -g: the minimizers of <g, v> over the ball.
///
/// For radius r every extreme point p has ||p|| <= r and <g, p> = -r * dual_value.
struct DirectionFace {
  std::vector<Vector> extreme_points;
  double dual_value = 0.0;  // ||g||_*
  Vector representative;    // canonical selection, a convex combination of extreme_points
  /// Linf ball: coordinates with g_i = 0, where the face spans the whole interval.
  std::vector<int> free_coordinates;
  /// True when the face is too large to enumerate (Linf beyond 2^10 vertices, L2 with g = 0).
  bool implicit = false;
};

/// Largest Linf face enumerated explicitly.
constexpr int kMaxEnumeratedFreeCoordinates = 10;

/// ||g||_1 for the Linf ball, ||g||_2 for L2, ||g||_inf for L1.
double dual_norm(const Vector& g, const NormBall& ball);

/// Indices attaining max_j |g_j|, with relative tie tolerance: |g_i| >= (1 - tau_tie) max_j |g_j|.
std::vector<int> argmax_abs(const Vector& g, double tau_tie = 0.0);

DirectionFace steepest_face(const Vector& g, const NormBall& ball, double tau_tie = 0.0);

struct LinearMinimum {
  double value = 0.0;
  Vector minimizer;
};

/// Independent oracle for min_{||v|| <= r} <g, v>, limited to dim <= 6.
///
/// L1 and Linf enumerate the 2d and 2^d vertices. L2 scans a dense angular grid (1e6 samples)
/// for d <= 3 and multi-start random samples otherwise, then refines by projected gradient.
LinearMinimum brute_force_min_linear(const Vector& g, const NormBall& ball,
                                     std::uint64_t seed = 0x5eed);

constexpr int kOracleMaxDim = 6;

}  // namespace signflow
