#include <cmath>
#include <deque>
#include <limits>

#include "signflow/objectives.hpp"

namespace signflow {

namespace {

struct Pair {
  Vector s, y;
  double rho;
};

Vector two_loop(const std::deque<Pair>& mem, const Vector& g) {
  Vector q = g;
  std::vector<double> alpha(mem.size());
  for (std::size_t k = mem.size(); k-- > 0;) {
    alpha[k] = mem[k].rho * mem[k].s.dot(q);
    q -= alpha[k] * mem[k].y;
  }
  const Pair& last = mem.back();
  q *= last.s.dot(last.y) / last.y.squaredNorm();
  for (std::size_t k = 0; k < mem.size(); ++k) {
    const double beta = mem[k].rho * mem[k].y.dot(q);
    q += (alpha[k] - beta) * mem[k].s;
  }
  return -q;
}

}  // namespace

ReferenceSolution reference_solve(const Objective& obj, const Vector& x0, double tol,
                                  int max_iters) {
  if (!(tol > 0.0)) throw ConfigError("reference_solve: tol must be > 0");
  require_finite(x0, "reference_solve x0");
  constexpr std::size_t kMemory = 10;
  constexpr double kArmijo = 1e-4;
  const double eps = std::numeric_limits<double>::epsilon();
  const double l_max = obj.lipschitz_max();

  Vector x = x0;
  double f = obj.value(x);
  Vector g = obj.gradient(x);
  const double threshold = tol * (1.0 + norm(g, NormKind::Linf));

  ReferenceSolution best{x, f, norm(g, NormKind::Linf), 0, false};
  std::deque<Pair> mem;
  int it = 0;
  for (; it < max_iters; ++it) {
    const double gnorm = norm(g, NormKind::Linf);
    if (gnorm < best.grad_inf_norm) best = {x, f, gnorm, it, false};
    if (gnorm <= threshold) break;

    Vector dir = mem.empty() ? Vector(-g / l_max) : two_loop(mem, g);
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      mem.clear();
      dir = -g / l_max;
      slope = g.dot(dir);
    }
    // Value noise allowance so the search does not stall at round-off level.
    const double allowance = 10.0 * eps * (1.0 + std::abs(f));
    double t = 1.0;
    bool accepted = false;
    Vector x_new;
    for (int bt = 0; bt < 60; ++bt) {
      x_new = x + t * dir;
      const double df = obj.value_difference(x_new, x);
      if (std::isfinite(df) && df <= kArmijo * t * slope + allowance) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      mem.clear();
      x_new = x - g / l_max;
    }
    const Vector g_new = obj.gradient(x_new);
    const Vector s = x_new - x;
    const Vector y = g_new - g;
    const double sy = s.dot(y);
    if (accepted && sy > 1e-16 * s.norm() * y.norm() && sy > 0.0) {
      mem.push_back({s, y, 1.0 / sy});
      if (mem.size() > kMemory) mem.pop_front();
    }
    x = x_new;
    g = g_new;
    f = obj.value(x);
    if (s.lpNorm<Eigen::Infinity>() == 0.0 && !accepted) break;
  }
  const double gnorm = norm(g, NormKind::Linf);
  if (gnorm <= best.grad_inf_norm) best = {x, f, gnorm, it, false};
  best.iterations_used = it;
  best.converged = best.grad_inf_norm <= threshold;
  best.f_star = obj.value(best.x_star);
  return best;
}

}  // namespace signflow
