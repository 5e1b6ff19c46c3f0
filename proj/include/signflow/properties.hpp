#pragma once

#include <string>
#include <vector>

#include "signflow/core.hpp"

namespace signflow {

/// Outcome of one executable inequality check over a run.
///
/// `margin` is the smallest slack (bound minus observed, tolerance included) over all checked
/// items; the check passes iff margin >= 0. `checked` counts the items examined.
struct PropertyResult {
  std::string name;
  bool passed = true;
  double margin = 0.0;
  int checked = 0;
  std::string detail;  // first violation, if any
};

class PropertyAccumulator {
 public:
  explicit PropertyAccumulator(std::string name);
  /// Records one item with slack = bound - observed.
  void add(double slack, int index);
  PropertyResult result() const;

 private:
  PropertyResult r_;
  bool any_ = false;
};

// The checks below need traces recorded with keep_iterates; per-step objective changes are
// evaluated with Objective::value_difference on consecutive iterates.

/// f(x_{k+1}) <= f(x_k) - ||g_k||_1^2 / (2 ||L||_1) + slack (1 + |gap_k|), g_k the gradient the
/// step was taken at (grad f(v_k) for momentum runs).
PropertyResult check_sufficient_decrease(const Objective& obj, const RunTrace& trace,
                                         double rel_slack = 1e-9, bool absolute = false);
/// gap_{k+1} / gap_k <= 1 - mu/||L||_1 + slack whenever gap_k > min_gap.
PropertyResult check_step_contraction(const Objective& obj, const RunTrace& trace,
                                      double slack = 1e-9, double min_gap = 1e-14);
/// gap_k <= (1 - mu/||L||_1)^k gap_0 (1 + rel).
PropertyResult check_cumulative_rate(const Objective& obj, const RunTrace& trace,
                                     double rel = 1e-6);
/// ||x_k - x*||^2 <= (L/mu)(1 - mu/||L||_1)^k ||x_0 - x*||^2 (1 + rel), L = max_i L_i.
PropertyResult check_distance_rate(const Objective& obj, const RunTrace& trace,
                                   double rel = 1e-6);
/// ||g||_1 >= ||g||_2 >= sqrt(2 mu gap) - slack on every iterate.
PropertyResult check_gradient_chain(const Objective& obj, const RunTrace& trace,
                                    double slack = 1e-9);
/// gap_{k+1} / gap_k <= 1 - mu/S_k + slack whenever gap_k > min_gap and S_k > 0.
PropertyResult check_face_contraction(const Objective& obj, const RunTrace& trace,
                                      double slack = 1e-9, double min_gap = 1e-14);
/// r_k / (d kappa_L) <= S_k / ||L||_1 <= r_k kappa_L / d.
PropertyResult check_face_sandwich(const Objective& obj, const RunTrace& trace);
/// S_k d == r_k ||L||_1 exactly (meaningful for equal L_i).
PropertyResult check_equal_curvature_identity(const Objective& obj, const RunTrace& trace);
/// ||x_{k+1} - x_k||_inf <= eta_k up to rounding of the update.
PropertyResult check_trust_region(const RunTrace& trace);
/// gap (or f) never increases beyond slack.
PropertyResult check_monotone(const Objective& obj, const RunTrace& trace, double slack = 1e-12);

}  // namespace signflow
