#include "signflow/properties.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace signflow {

PropertyAccumulator::PropertyAccumulator(std::string name) {
  r_.name = std::move(name);
  r_.margin = std::numeric_limits<double>::infinity();
}

void PropertyAccumulator::add(double slack, int index) {
  ++r_.checked;
  any_ = true;
  if (!(slack >= 0.0) && r_.passed) {
    r_.passed = false;
    std::ostringstream os;
    os << "violated at k=" << index << " by " << -slack;
    r_.detail = os.str();
  }
  if (std::isnan(slack)) {
    r_.margin = -std::numeric_limits<double>::infinity();
  } else if (slack < r_.margin) {
    r_.margin = slack;
  }
}

PropertyResult PropertyAccumulator::result() const {
  PropertyResult out = r_;
  if (!any_) out.margin = 0.0;
  return out;
}

namespace {

void require_iterates(const RunTrace& trace, const char* what) {
  if (trace.iterates.size() != trace.records.size()) {
    throw std::invalid_argument(std::string(what) + ": trace was recorded without iterates");
  }
}

void require_gap(const RunTrace& trace, const char* what) {
  if (!trace.has_gap()) throw std::invalid_argument(std::string(what) + ": trace has no gap");
}

double mu_of(const Objective& obj, const char* what) {
  if (!obj.mu()) throw std::invalid_argument(std::string(what) + ": objective declares no mu");
  return *obj.mu();
}

}  // namespace

PropertyResult check_sufficient_decrease(const Objective& obj, const RunTrace& trace,
                                         double rel_slack, bool absolute) {
  require_iterates(trace, "check_sufficient_decrease");
  PropertyAccumulator acc("sufficient decrease");
  const double l1 = obj.lipschitz_l1();
  for (std::size_t k = 0; k + 1 < trace.records.size(); ++k) {
    const double change = obj.value_difference(trace.iterates[k + 1], trace.iterates[k]);
    const double gl1 = trace.records[k + 1].step_grad_l1;
    const double scale =
        absolute ? 1.0 : 1.0 + std::abs(trace.records[k].f_gap.value_or(trace.records[k].f_value));
    acc.add(-gl1 * gl1 / (2.0 * l1) + rel_slack * scale - change, static_cast<int>(k));
  }
  return acc.result();
}

PropertyResult check_step_contraction(const Objective& obj, const RunTrace& trace, double slack,
                                      double min_gap) {
  require_gap(trace, "check_step_contraction");
  const double q = 1.0 - mu_of(obj, "check_step_contraction") / obj.lipschitz_l1();
  PropertyAccumulator acc("per-step contraction");
  for (std::size_t k = 0; k + 1 < trace.records.size(); ++k) {
    const double gk = *trace.records[k].f_gap;
    if (!(gk > min_gap)) continue;
    acc.add(q + slack - *trace.records[k + 1].f_gap / gk, static_cast<int>(k));
  }
  return acc.result();
}

PropertyResult check_cumulative_rate(const Objective& obj, const RunTrace& trace, double rel) {
  require_gap(trace, "check_cumulative_rate");
  const double q = 1.0 - mu_of(obj, "check_cumulative_rate") / obj.lipschitz_l1();
  const double g0 = *trace.records.front().f_gap;
  PropertyAccumulator acc("cumulative rate");
  for (std::size_t k = 0; k < trace.records.size(); ++k) {
    const double bound = std::pow(q, static_cast<double>(k)) * g0 * (1.0 + rel);
    acc.add(bound - *trace.records[k].f_gap, static_cast<int>(k));
  }
  return acc.result();
}

PropertyResult check_distance_rate(const Objective& obj, const RunTrace& trace, double rel) {
  require_gap(trace, "check_distance_rate");
  const double mu = mu_of(obj, "check_distance_rate");
  const double q = 1.0 - mu / obj.lipschitz_l1();
  const double d0 = *trace.records.front().dist_sq;
  const double lead = obj.lipschitz_max() / mu;
  PropertyAccumulator acc("distance rate");
  for (std::size_t k = 0; k < trace.records.size(); ++k) {
    const double bound = lead * std::pow(q, static_cast<double>(k)) * d0 * (1.0 + rel);
    acc.add(bound - *trace.records[k].dist_sq, static_cast<int>(k));
  }
  return acc.result();
}

PropertyResult check_gradient_chain(const Objective& obj, const RunTrace& trace, double slack) {
  require_iterates(trace, "check_gradient_chain");
  require_gap(trace, "check_gradient_chain");
  const double mu = mu_of(obj, "check_gradient_chain");
  PropertyAccumulator acc("gradient-suboptimality chain");
  for (std::size_t k = 0; k < trace.records.size(); ++k) {
    const Vector g = obj.gradient(trace.iterates[k]);
    const double l1 = norm(g, NormKind::L1);
    const double l2 = norm(g, NormKind::L2);
    const double gap = std::max(0.0, *trace.records[k].f_gap);
    acc.add(std::min(l1 - l2 + 1e-15 * l1, l2 - std::sqrt(2.0 * mu * gap) + slack),
            static_cast<int>(k));
  }
  return acc.result();
}

PropertyResult check_face_contraction(const Objective& obj, const RunTrace& trace, double slack,
                                      double min_gap) {
  require_gap(trace, "check_face_contraction");
  const double mu = mu_of(obj, "check_face_contraction");
  PropertyAccumulator acc("face-aware contraction");
  for (std::size_t k = 0; k + 1 < trace.records.size(); ++k) {
    const auto& rec = trace.records[k];
    if (!(*rec.f_gap > min_gap) || rec.active_curvature <= 0.0) continue;
    acc.add(1.0 - mu / rec.active_curvature + slack - *trace.records[k + 1].f_gap / *rec.f_gap,
            static_cast<int>(k));
  }
  return acc.result();
}

PropertyResult check_face_sandwich(const Objective& obj, const RunTrace& trace) {
  const double d = obj.dim();
  const double kappa_l = obj.lipschitz_max() / obj.lipschitz_min();
  const double l1 = obj.lipschitz_l1();
  PropertyAccumulator acc("active-face sandwich");
  for (std::size_t k = 0; k < trace.records.size(); ++k) {
    const auto& rec = trace.records[k];
    const double ratio = rec.active_curvature / l1;
    const double r = rec.active_size;
    const double tol = 1e-12 * (1.0 + ratio);
    acc.add(std::min(ratio - r / (d * kappa_l) + tol, r * kappa_l / d - ratio + tol),
            static_cast<int>(k));
  }
  return acc.result();
}

PropertyResult check_equal_curvature_identity(const Objective& obj, const RunTrace& trace) {
  const double d = obj.dim();
  PropertyAccumulator acc("equal-curvature identity");
  for (std::size_t k = 0; k < trace.records.size(); ++k) {
    const auto& rec = trace.records[k];
    acc.add(-std::abs(rec.active_curvature * d - rec.active_size * obj.lipschitz_l1()),
            static_cast<int>(k));
  }
  return acc.result();
}

PropertyResult check_trust_region(const RunTrace& trace) {
  require_iterates(trace, "check_trust_region");
  PropertyAccumulator acc("trust region");
  for (std::size_t k = 0; k + 1 < trace.iterates.size(); ++k) {
    const Vector& a = trace.iterates[k];
    const double step = (trace.iterates[k + 1] - a).lpNorm<Eigen::Infinity>();
    const double rounding = 4.0 * std::numeric_limits<double>::epsilon() *
                            (a.lpNorm<Eigen::Infinity>() + trace.records[k + 1].eta);
    acc.add(trace.records[k + 1].eta + rounding - step, static_cast<int>(k));
  }
  return acc.result();
}

PropertyResult check_monotone(const Objective& obj, const RunTrace& trace, double slack) {
  require_iterates(trace, "check_monotone");
  PropertyAccumulator acc("monotone objective");
  for (std::size_t k = 0; k + 1 < trace.iterates.size(); ++k) {
    const double change = obj.value_difference(trace.iterates[k + 1], trace.iterates[k]);
    const double scale = 1.0 + std::abs(trace.records[k].f_gap.value_or(trace.records[k].f_value));
    acc.add(slack * scale - change, static_cast<int>(k));
  }
  return acc.result();
}

}  // namespace signflow
