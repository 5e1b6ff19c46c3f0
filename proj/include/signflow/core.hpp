#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace signflow {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised for invalid run or problem configuration (CLI exit status 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws std::invalid_argument naming `what` if any entry of `v` is NaN or infinite.
void require_finite(const Vector& v, std::string_view what);
void require_finite(const Matrix& m, std::string_view what);

// Element-wise sign with sign(0) = 0.
Vector sign_elementwise(const Vector& v);

inline double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

enum class NormKind { L1, L2, Linf };

double norm(const Vector& v, NormKind p);

/// Indices (0-based, increasing) with |g_i| > eps_active.
std::vector<int> active_set(const Vector& g, double eps_active);

/// Sum of `weights` over `indices`.
double sum_over(const Vector& weights, const std::vector<int>& indices);

constexpr double kDefaultEpsActive = 1e-10;

struct Reference {
  Vector x_star;
  double f_star = 0.0;
};

/// Smooth objective with coordinate-wise curvature bounds.
///
/// Instances are immutable values: the callables capture shared, read-only problem data, so
/// copies are cheap and evaluation is reentrant. `coord_lipschitz` holds L_i such that
///   f(y) <= f(x) + <grad f(x), y - x> + 1/2 sum_i L_i (y_i - x_i)^2.
class Objective {
 public:
  using ValueFn = std::function<double(const Vector&)>;
  using GradientFn = std::function<Vector(const Vector&)>;
  using DifferenceFn = std::function<double(const Vector&, const Vector&)>;

  Objective(std::string name, int dim, ValueFn value, GradientFn gradient,
            Vector coord_lipschitz, std::optional<double> mu = std::nullopt);

  /// Copy carrying a reference optimum.
  [[nodiscard]] Objective with_reference(Reference reference) const;
  /// Copy using `diff` for f(x) - f(y); the default subtracts two value() calls.
  [[nodiscard]] Objective with_value_difference(DifferenceFn diff) const;
  [[nodiscard]] Objective with_mu(std::optional<double> mu) const;

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  /// f(x) - f(y), evaluated without catastrophic cancellation where the problem supports it.
  double value_difference(const Vector& x, const Vector& y) const;

  const Vector& coord_lipschitz() const { return lipschitz_; }
  /// ||L||_1 = sum_i L_i.
  double lipschitz_l1() const { return lipschitz_l1_; }
  /// L = max_i L_i.
  double lipschitz_max() const { return lipschitz_.maxCoeff(); }
  double lipschitz_min() const { return lipschitz_.minCoeff(); }
  const std::optional<double>& mu() const { return mu_; }
  const std::optional<Reference>& reference() const { return reference_; }

  /// f(x) - f*; requires a reference.
  double gap(const Vector& x) const;

 private:
  void check_dim(const Vector& x) const;

  std::string name_;
  int dim_;
  ValueFn value_;
  GradientFn gradient_;
  DifferenceFn difference_;
  Vector lipschitz_;
  double lipschitz_l1_;
  std::optional<double> mu_;
  std::optional<Reference> reference_;
  double reference_offset_ = 0.0;  // value(x_star) - f_star
};

/// One row of a run trace. Row k describes iterate x_k; `eta` and the event counters belong to
/// the step that produced x_k (all zero on row 0).
struct TraceRecord {
  int iter = 0;
  std::optional<double> f_gap;
  std::optional<double> dist_sq;
  double eta = 0.0;
  double grad_l1 = 0.0;
  int active_size = 0;
  double active_curvature = 0.0;  // S_k
  int freezes = 0;
  int slides = 0;
  int restarts = 0;

  // In-memory diagnostics, not part of the CSV schema.
  double f_value = 0.0;
  double step_grad_l1 = 0.0;  // ||grad f||_1 at the point the producing step was evaluated
  int sign_flips = 0;         // coordinates whose gradient sign differs from row k-1
};

struct RunTrace {
  std::string algorithm;
  std::string policy;
  std::vector<TraceRecord> records;
  std::vector<Vector> iterates;  // filled only when requested
  Vector x_final;

  int total_restarts() const;
  int total_freezes() const;
  int total_slides() const;
  bool has_gap() const { return !records.empty() && records.front().f_gap.has_value(); }
};

}  // namespace signflow
