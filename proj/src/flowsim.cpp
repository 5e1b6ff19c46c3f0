#include "signflow/flowsim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <memory>

namespace signflow {

namespace {

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Gradient of the i-th partial derivative by central differences.
Vector partial_normal(const Objective& obj, const Vector& x, int i) {
  Vector n(x.size());
  Vector probe = x;
  for (Eigen::Index m = 0; m < x.size(); ++m) {
    const double delta = 1e-6 * (1.0 + std::abs(x[m]));
    probe[m] = x[m] + delta;
    const double up = obj.gradient(probe)[i];
    probe[m] = x[m] - delta;
    const double down = obj.gradient(probe)[i];
    probe[m] = x[m];
    n[m] = (up - down) / (2.0 * delta);
  }
  return n;
}

class Integrator {
 public:
  Integrator(const Objective& obj, double h, double T, FlowMode mode)
      : obj_(obj), h_(h), T_(T), mode_(mode), sliding_(obj.dim(), false) {}

  FlowTrajectory run(const Vector& x0) {
    Vector x = x0;
    double t = 0.0;
    traj_.times.push_back(t);
    traj_.states.push_back(x);
    const double max_loops = 4.0 * std::ceil(T_ / h_) + 1000.0;
    double loops = 0.0;
    while (T_ - t > 1e-9 * h_) {
      if (++loops > max_loops) throw std::runtime_error("integrate_sign_flow: event storm");
      const double step = std::min(h_, T_ - t);
      const Vector g = obj_.gradient(x);
      Vector v = velocity(x, g, step, t);
      traj_.velocities.push_back(v);
      if (mode_ == FlowMode::Naive) {
        naive_step(x, t, g, v, step);
      } else {
        aware_step(x, t, g, v, step);
      }
    }
    const Vector g = obj_.gradient(x);
    traj_.velocities.push_back(mode_ == FlowMode::Naive ? velocity_no_events(g)
                                                        : velocity(x, g, h_, t));
    return std::move(traj_);
  }

 private:
  Vector velocity_no_events(const Vector& g) const { return -sign_elementwise(g); }

  // Base velocity; sliding coordinates get the secant solution of d_i f(x + step v) = 0.
  Vector velocity(const Vector& x, const Vector& g, double step, double t) {
    Vector v = -sign_elementwise(g);
    for (int i = 0; i < obj_.dim(); ++i) {
      if (!sliding_[i]) continue;
      v[i] = 0.0;
      Vector probe_v = v;
      probe_v[i] = -1.0;
      const double lo = obj_.gradient(x + step * probe_v)[i];
      probe_v[i] = 1.0;
      const double hi = obj_.gradient(x + step * probe_v)[i];
      const double denom = hi - lo;
      double c = denom != 0.0 ? -1.0 - 2.0 * lo / denom : 2.0;
      if (!std::isfinite(c) || std::abs(c) > 1.0 + 1e-9) {
        sliding_[i] = false;
        add_event(t, i, EventKind::SlideExit, traj_.states.size() - 1);
        v[i] = -sign_of(g[i]);
      } else {
        v[i] = std::clamp(c, -1.0, 1.0);
      }
    }
    return v;
  }

  void naive_step(Vector& x, double& t, const Vector& g, const Vector& v, double step) {
    x += step * v;
    t += step;
    const Vector g_new = obj_.gradient(x);
    traj_.times.push_back(t);
    traj_.states.push_back(x);
    for (int i = 0; i < obj_.dim(); ++i) {
      if (g[i] != 0.0 && sign_of(g_new[i]) != sign_of(g[i])) {
        add_event(t, i, EventKind::Switch, traj_.states.size() - 1);
      }
    }
  }

  void aware_step(Vector& x, double& t, const Vector& g, const Vector& v, double step) {
    const Vector x_new = x + step * v;
    const Vector g_new = obj_.gradient(x_new);
    std::vector<std::pair<double, int>> crossings;
    for (int i = 0; i < obj_.dim(); ++i) {
      if (sliding_[i] || g[i] == 0.0 || sign_of(g_new[i]) == sign_of(g[i])) continue;
      crossings.emplace_back(locate_crossing(x, v, g[i], i, step), i);
    }
    if (crossings.empty()) {
      x = x_new;
      t += step;
      traj_.times.push_back(t);
      traj_.states.push_back(x);
      return;
    }
    std::sort(crossings.begin(), crossings.end());
    const double tau = crossings.front().first;
    x += tau * v;
    t += tau;
    traj_.times.push_back(t);
    traj_.states.push_back(x);
    const std::size_t sample = traj_.states.size() - 1;
    const Vector g_c = obj_.gradient(x);
    for (const auto& [tau_i, i] : crossings) {
      if (tau_i > tau + 1e-6 * h_) break;
      const Vector n = partial_normal(obj_, x, i);
      Vector w = -sign_elementwise(g_c);
      for (int m = 0; m < obj_.dim(); ++m) {
        if (sliding_[m]) w[m] = v[m];
      }
      w[i] = -1.0;
      const double above = n.dot(w);  // side where d_i f > 0
      w[i] = 1.0;
      const double below = n.dot(w);
      if (above < 0.0 && below > 0.0) {
        sliding_[i] = true;
        add_event(t, i, EventKind::SlideEnter, sample);
      } else {
        add_event(t, i, EventKind::Switch, sample);
      }
    }
  }

  // Smallest tau in (0, step] where d_i f(x + tau v) has left the sign of g_i, to h * 1e-6.
  double locate_crossing(const Vector& x, const Vector& v, double gi, int i, double step) const {
    double lo = 0.0;
    double hi = step;
    const double s0 = sign_of(gi);
    for (int depth = 0; depth < 40 && hi - lo > 1e-6 * h_; ++depth) {
      const double mid = 0.5 * (lo + hi);
      if (sign_of(obj_.gradient(x + mid * v)[i]) == s0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return hi;
  }

  void add_event(double t, int i, EventKind kind, std::size_t sample) {
    traj_.events.push_back({t, i, kind, sample});
  }

  const Objective& obj_;
  double h_;
  double T_;
  FlowMode mode_;
  std::vector<bool> sliding_;
  FlowTrajectory traj_;
};

}  // namespace

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Switch:
      return "switch";
    case EventKind::SlideEnter:
      return "slide_enter";
    case EventKind::SlideExit:
      return "slide_exit";
  }
  return "unknown";
}

bool FlowTrajectory::has_event(EventKind kind) const { return count(kind) > 0; }

std::size_t FlowTrajectory::count(EventKind kind) const {
  return static_cast<std::size_t>(std::count_if(
      events.begin(), events.end(), [kind](const FlowEvent& e) { return e.kind == kind; }));
}

FlowTrajectory integrate_sign_flow(const Objective& obj, const Vector& x0, double h, double T,
                                   FlowMode mode) {
  if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("flow: h must be > 0");
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("flow: T must be > 0");
  if (T / h > kMaxFlowSteps) throw ConfigError("flow: T/h exceeds the 1e7 step budget");
  if (x0.size() != obj.dim()) throw ConfigError("flow: x0 dimension does not match the problem");
  require_finite(x0, "flow x0");
  return Integrator(obj, h, T, mode).run(x0);
}

Objective make_manifold_example(double a) {
  if (!std::isfinite(a)) throw std::invalid_argument("manifold example: a must be finite");
  auto value = [a](const Vector& x) {
    const double s = x[1] - a * x[0];
    return x[1] + s * s;
  };
  auto gradient = [a](const Vector& x) {
    const double s = x[1] - a * x[0];
    Vector g(2);
    g << -2.0 * a * s, 1.0 + 2.0 * s;
    return g;
  };
  Vector l(2);
  l << 2.0 * a * a, 2.0;
  return Objective("manifold", 2, value, gradient, l);
}

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::Switching:
      return "switching";
    case Regime::Sliding:
      return "sliding";
    case Regime::Indeterminate:
      return "indeterminate";
  }
  return "unknown";
}

Regime classify_regime(double a) {
  if (!(a > 0.0) || !std::isfinite(a)) throw std::invalid_argument("classify_regime: a must be > 0");
  const Objective f = make_manifold_example(a);
  // Manifold normal (grad of x_2 - a x_1), pointing to the side x_2 > a x_1.
  Vector normal(2);
  normal << -a, 1.0;
  Vector on(2);
  on << 1.0, a;
  const double offset = 1e-6;
  const Vector above = -sign_elementwise(f.gradient(on + offset * normal));
  const Vector below = -sign_elementwise(f.gradient(on - offset * normal));
  const double p_above = normal.dot(above);
  const double p_below = normal.dot(below);
  const double tol = 1e-12 * normal.norm();
  if (std::abs(p_above) <= tol || std::abs(p_below) <= tol) return Regime::Indeterminate;
  if (p_above < 0.0 && p_below > 0.0) return Regime::Sliding;
  return Regime::Switching;
}

double manifold_distance(const Vector& x, double a) {
  return (x[1] - a * x[0]) / std::sqrt(1.0 + a * a);
}

std::string trajectory_csv(const FlowTrajectory& traj, int dim) {
  std::string out = "t";
  for (int i = 1; i <= dim; ++i) out += ",x_" + std::to_string(i);
  out += ",event\n";
  std::size_t e = 0;
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    out += fmt(traj.times[k]);
    for (int i = 0; i < dim; ++i) out += "," + fmt(traj.states[k][i]);
    out += ",";
    bool first = true;
    while (e < traj.events.size() && traj.events[e].sample == k) {
      if (!first) out += ";";
      out += to_string(traj.events[e].kind) + ":" + std::to_string(traj.events[e].coordinate + 1);
      first = false;
      ++e;
    }
    out += "\n";
  }
  return out;
}

}  // namespace signflow
