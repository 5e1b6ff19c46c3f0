#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "signflow/core.hpp"

namespace signflow {

enum class ProblemKind { LogisticQuadratic, SmoothMax, L2Logistic, SeparableQuadratic };

/// How coord_lipschitz is derived for the dense zoo problems.
///
/// Table keeps the diagonal bounds (A^T A)_ii + (gamma/4)(B^T B)_ii, Q_ii + gamma/4 and
/// (1/4n)(A^T A)_ii + lambda. Those bound the Hessian diagonal only, so for dense problems the
/// separable upper model can fail. Certified scales the same vector by
/// rho = lambda_max(D^{-1/2} M D^{-1/2}), where D is the table diagonal and M a global Hessian
/// bound, which guarantees diag(L) >= Hessian everywhere.
enum class CurvatureBound { Certified, Table };

std::string to_string(ProblemKind kind);
ProblemKind parse_problem_kind(const std::string& name);  // lq, smoothmax, logreg, sepquad

struct ProblemSpec {
  ProblemKind kind = ProblemKind::LogisticQuadratic;
  int n = 2000;
  int d = 200;
  double gamma = 1.0;
  double lambda = 0.0;  // ridge; required > 0 for L2Logistic
  double kappa = 100.0;
  std::uint64_t seed = 0;
  std::optional<std::string> dataset_path;  // L2Logistic only
  CurvatureBound bound = CurvatureBound::Certified;

  /// Per-kind defaults used by the CLI (lambda 1e-3 for L2Logistic, 0 otherwise).
  static ProblemSpec defaults(ProblemKind kind);
  /// Throws ConfigError when the spec is invalid.
  void validate() const;
};

/// Raw problem data. Only the members relevant to `spec.kind` are populated.
struct ProblemInstance {
  ProblemSpec spec;
  Matrix A;              // LogisticQuadratic: n x d; L2Logistic: standardized features n x d
  Matrix B;              // LogisticQuadratic: n x d
  Matrix Q;              // SmoothMax: d x d
  Vector labels;         // L2Logistic: entries in {-1, +1}
  Vector sep_lipschitz;  // SeparableQuadratic
  Vector sep_center;     // SeparableQuadratic
};

/// Draws the instance described by `spec` (or loads its dataset). Seed-deterministic.
ProblemInstance generate_instance(const ProblemSpec& spec);
/// Builds the objective over shared copies of the instance data.
Objective build_objective(const ProblemInstance& instance);
/// Start point used by the experiments: 0, except a seeded Gaussian for SmoothMax.
Vector default_start(const ProblemInstance& instance);

Objective make_problem(const ProblemSpec& spec);
Objective make_logistic_quadratic(const ProblemSpec& spec);
Objective make_smooth_max(const ProblemSpec& spec);
Objective make_l2_logistic(const ProblemSpec& spec);
/// f(x) = 1/2 sum_i L_i (x_i - c_i)^2 with exact reference (c, 0) and mu = min L_i.
Objective make_separable_quadratic(const Vector& lipschitz, const Vector& center);

/// Label noise rate of the synthetic logistic data.
constexpr double kLabelFlipRate = 0.1;

/// Features and +-1 labels read from a CSV with a `label` column.
struct Dataset {
  Matrix features;
  Vector labels;
};

/// Throws ConfigError with the offending line number on malformed input.
Dataset load_csv_dataset(const std::string& path);
Dataset parse_csv_dataset(const std::string& text);
/// Zero mean, unit (population) variance per column; constant columns become zero.
void standardize_columns(Matrix& features);

struct ReferenceSolution {
  Vector x_star;
  double f_star = 0.0;
  double grad_inf_norm = 0.0;
  int iterations_used = 0;
  bool converged = false;
};

constexpr double kDefaultReferenceTol = 1e-10;

/// L-BFGS (memory 10) with Armijo backtracking, stopping once
/// ||grad f||_inf <= tol * (1 + ||grad f(x0)||_inf). When the line search stalls the iteration
/// takes a gradient step 1/max_i L_i and clears the memory.
ReferenceSolution reference_solve(const Objective& obj, const Vector& x0,
                                  double tol = kDefaultReferenceTol, int max_iters = 100000);

/// JSON snapshot of an instance; matrices are base64 little-endian float64, row-major.
std::string export_snapshot(const ProblemInstance& instance);
ProblemInstance import_snapshot(const std::string& json_text);

std::string base64_encode(const std::string& bytes);
std::string base64_decode(const std::string& text);

}  // namespace signflow
