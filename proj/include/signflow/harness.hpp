#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "signflow/flowsim.hpp"
#include "signflow/objectives.hpp"
#include "signflow/optimizers.hpp"

namespace signflow {

inline constexpr const char* kConfigSchema = "signflow.experiment/1";

/// CLI exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitPropertyFailure = 1,
  kExitConfigError = 2,
  kExitUnconvergedReference = 3,
};

struct AlgoConfig {
  Algorithm algo = Algorithm::SignGD;
  StepPolicy policy = StepPolicy::adaptive();
  double beta = 0.9;
  bool restart = false;

  /// File-name friendly identifier, e.g. "asgd-adaptive-restart".
  std::string label() const;
};

struct ExperimentConfig {
  ProblemSpec problem;  // problem.seed is the experiment seed
  std::vector<AlgoConfig> algos;
  int iters = 2000;
  double eps_active = kDefaultEpsActive;
  double tau_tie = 0.0;
  double reference_tol = kDefaultReferenceTol;
  std::string output_dir = "signflow-out";

  /// Throws ConfigError.
  void validate() const;
};

/// Parses a JSON config (schema "signflow.experiment/1"). Throws ConfigError.
ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& config);

/// Gap threshold for the iterations-to-epsilon summary column.
constexpr double kSummaryEpsilon = 1e-8;

/// Constant-step tuning grid: 25 log-spaced points in [1e-5, 1].
std::vector<double> tuning_grid();

struct BenchRow {
  std::string label;
  std::string csv_path;
  RunTrace trace;
  std::optional<double> tuned_eta;
  std::optional<double> final_gap;
  std::optional<double> final_dist_sq;
  std::optional<int> iters_to_eps;
  std::optional<double> max_contraction;  // max gap_{k+1}/gap_k over gap_k > 1e-14
};

struct BenchReport {
  std::vector<BenchRow> rows;
  ReferenceSolution reference;
  bool reference_converged = false;
  std::string summary_path;
  std::string svg_path;
  std::string summary_csv;
};

/// Picks the grid step with the lowest final objective value on a validation instance seeded
/// with derive_seed(seed, "validation"), under the same iteration budget.
double tune_constant_step(const ExperimentConfig& config, const AlgoConfig& algo);

/// Builds the problem, solves for the reference, runs every algorithm (concurrently, capped by
/// SIGNFLOW_THREADS) and writes <out>/<label>.csv, <out>/summary.csv and <out>/bench.svg.
BenchReport cli_bench(const ExperimentConfig& config);

struct FlowConfig {
  std::vector<double> a_values{0.5, 2.0};
  double h = 1e-3;
  double T = 1.0;
  Vector x0 = (Vector(2) << 0.3, 0.5).finished();
  FlowMode mode = FlowMode::SlidingAware;
  std::string output_dir = "signflow-out";
};

struct FlowReport {
  std::vector<std::string> csv_paths;
  std::vector<FlowTrajectory> trajectories;
  std::string svg_path;
};

/// Integrates the manifold example for each a, writing flow_a<a>.csv and flow.svg. T = 0
/// writes header-only CSVs.
FlowReport cli_flow(const FlowConfig& config);

struct AblationReport {
  RunTrace signgd;
  RunTrace asgd;
  std::string csv_path;
  std::string svg_path;
};

/// SignGD vs momentum SignGD with restart, both adaptive; records |I_k| and S_k.
AblationReport cli_ablate_face(const ExperimentConfig& config);

enum class VerifyScope { All, Lemmas, Rates, Sliding, Flow };

VerifyScope parse_verify_scope(const std::string& name);

/// Runs the property suites of `scope`, printing one line per property with its margin.
/// Returns kExitOk or kExitPropertyFailure.
int cli_verify(VerifyScope scope, std::ostream& out);

/// Worker count for concurrent runs: SIGNFLOW_THREADS if set and positive, else hardware.
unsigned worker_count();

}  // namespace signflow
