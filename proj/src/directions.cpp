#include "signflow/directions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "signflow/rng.hpp"

namespace signflow {

NormBall::NormBall(BallKind k, double r) : kind(k), radius(r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("NormBall: radius must be > 0");
}

double dual_norm(const Vector& g, const NormBall& ball) {
  switch (ball.kind) {
    case BallKind::Linf:
      return norm(g, NormKind::L1);
    case BallKind::L2:
      return norm(g, NormKind::L2);
    case BallKind::L1:
      return norm(g, NormKind::Linf);
  }
  return 0.0;
}

std::vector<int> argmax_abs(const Vector& g, double tau_tie) {
  if (!(tau_tie >= 0.0 && tau_tie < 1.0)) {
    throw std::invalid_argument("argmax_abs: tau_tie must lie in [0, 1)");
  }
  std::vector<int> out;
  if (g.size() == 0) return out;
  const double peak = g.cwiseAbs().maxCoeff();
  const double cutoff = tau_tie == 0.0 ? peak : (1.0 - tau_tie) * peak;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (std::abs(g[i]) >= cutoff) out.push_back(static_cast<int>(i));
  }
  return out;
}

namespace {

DirectionFace linf_face(const Vector& g, double r) {
  DirectionFace face;
  face.dual_value = norm(g, NormKind::L1);
  face.representative = -r * sign_elementwise(g);
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (g[i] == 0.0) face.free_coordinates.push_back(static_cast<int>(i));
  }
  const auto n_free = static_cast<int>(face.free_coordinates.size());
  if (n_free > kMaxEnumeratedFreeCoordinates) {
    face.implicit = true;
    return face;
  }
  const std::uint32_t count = 1U << n_free;
  face.extreme_points.reserve(count);
  for (std::uint32_t mask = 0; mask < count; ++mask) {
    Vector p = face.representative;
    for (int b = 0; b < n_free; ++b) {
      p[face.free_coordinates[b]] = (mask >> b) & 1U ? r : -r;
    }
    face.extreme_points.push_back(std::move(p));
  }
  return face;
}

DirectionFace l2_face(const Vector& g, double r) {
  DirectionFace face;
  face.dual_value = norm(g, NormKind::L2);
  if (face.dual_value == 0.0) {
    face.representative = Vector::Zero(g.size());
    face.implicit = true;
    return face;
  }
  face.representative = -r * g / face.dual_value;
  face.extreme_points.push_back(face.representative);
  return face;
}

DirectionFace l1_face(const Vector& g, double r, double tau_tie) {
  DirectionFace face;
  const auto d = g.size();
  face.dual_value = norm(g, NormKind::Linf);
  if (face.dual_value == 0.0) {
    for (Eigen::Index i = 0; i < d; ++i) {
      Vector p = Vector::Zero(d);
      p[i] = r;
      face.extreme_points.push_back(p);
      p[i] = -r;
      face.extreme_points.push_back(std::move(p));
    }
    face.representative = Vector::Zero(d);
    return face;
  }
  for (int i : argmax_abs(g, tau_tie)) {
    Vector p = Vector::Zero(d);
    p[i] = -r * sign_of(g[i]);
    face.extreme_points.push_back(std::move(p));
  }
  face.representative = face.extreme_points.front();
  return face;
}

double project_to_ball(Vector& v) {
  const double n = v.norm();
  if (n > 1.0) v /= n;
  return n;
}

// Projected gradient on the unit L2 ball for the linear form <g, v>.
Vector refine_on_sphere(const Vector& g, Vector v) {
  const double gn = g.norm();
  const double step = 0.1 / gn;
  for (int it = 0; it < 5000; ++it) {
    Vector next = v - step * g;
    project_to_ball(next);
    const double change = (next - v).norm();
    v = std::move(next);
    if (change < 1e-15) break;
  }
  return v;
}

// Unit vectors sampled on a 1e6-point angular grid, one per column.
const Matrix& circle_grid() {
  static const Matrix grid = [] {
    constexpr int kAngles = 1'000'000;
    Matrix m(2, kAngles);
    for (int k = 0; k < kAngles; ++k) {
      const double theta = 2.0 * std::numbers::pi * k / kAngles;
      m(0, k) = std::cos(theta);
      m(1, k) = std::sin(theta);
    }
    return m;
  }();
  return grid;
}

const Matrix& sphere_grid() {
  static const Matrix grid = [] {
    constexpr int kSide = 1000;
    Matrix m(3, kSide * kSide);
    for (int a = 0; a < kSide; ++a) {
      const double theta = std::numbers::pi * (a + 0.5) / kSide;
      const double st = std::sin(theta);
      const double ct = std::cos(theta);
      for (int b = 0; b < kSide; ++b) {
        const double phi = 2.0 * std::numbers::pi * b / kSide;
        m(0, a * kSide + b) = st * std::cos(phi);
        m(1, a * kSide + b) = st * std::sin(phi);
        m(2, a * kSide + b) = ct;
      }
    }
    return m;
  }();
  return grid;
}

LinearMinimum l2_oracle(const Vector& g, std::uint64_t seed) {
  const auto d = g.size();
  Vector best = Vector::Zero(d);
  double best_value = std::numeric_limits<double>::infinity();
  auto consider = [&](const Vector& v) {
    const double val = g.dot(v);
    if (val < best_value) {
      best_value = val;
      best = v;
    }
  };
  if (d == 1) {
    consider(Vector::Constant(1, 1.0));
    consider(Vector::Constant(1, -1.0));
    return {best_value, best};
  }
  if (d == 2 || d == 3) {
    const Matrix& grid = d == 2 ? circle_grid() : sphere_grid();
    const Vector scores = grid.transpose() * g;
    Eigen::Index k = 0;
    scores.minCoeff(&k);
    consider(grid.col(k));
  } else {
    CounterRng rng(seed);
    for (int s = 0; s < 4096; ++s) {
      Vector v = rng.normal_vector(d);
      v /= v.norm();
      consider(v);
    }
  }
  best = refine_on_sphere(g, best);
  return {g.dot(best), best};
}

}  // namespace

DirectionFace steepest_face(const Vector& g, const NormBall& ball, double tau_tie) {
  require_finite(g, "steepest_face g");
  switch (ball.kind) {
    case BallKind::Linf:
      return linf_face(g, ball.radius);
    case BallKind::L2:
      return l2_face(g, ball.radius);
    case BallKind::L1:
      return l1_face(g, ball.radius, tau_tie);
  }
  throw std::logic_error("steepest_face: unknown ball");
}

LinearMinimum brute_force_min_linear(const Vector& g, const NormBall& ball, std::uint64_t seed) {
  const auto d = g.size();
  if (d < 1 || d > kOracleMaxDim) {
    throw std::invalid_argument("brute_force_min_linear: dimension must be in [1, 6]");
  }
  require_finite(g, "brute_force_min_linear g");
  if ((g.array() == 0.0).all()) return {0.0, Vector::Zero(d)};

  LinearMinimum out;
  out.value = std::numeric_limits<double>::infinity();
  auto consider = [&](const Vector& v) {
    const double val = g.dot(v);
    if (val < out.value) {
      out.value = val;
      out.minimizer = v;
    }
  };
  switch (ball.kind) {
    case BallKind::L1:
      for (Eigen::Index i = 0; i < d; ++i) {
        for (double s : {1.0, -1.0}) {
          Vector v = Vector::Zero(d);
          v[i] = s;
          consider(v);
        }
      }
      break;
    case BallKind::Linf:
      for (std::uint32_t mask = 0; mask < (1U << d); ++mask) {
        Vector v(d);
        for (Eigen::Index i = 0; i < d; ++i) v[i] = (mask >> i) & 1U ? 1.0 : -1.0;
        consider(v);
      }
      break;
    case BallKind::L2:
      out = l2_oracle(g, seed);
      break;
  }
  out.value *= ball.radius;
  out.minimizer *= ball.radius;
  return out;
}

}  // namespace signflow
