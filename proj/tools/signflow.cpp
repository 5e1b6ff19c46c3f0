#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "signflow/harness.hpp"
#include "signflow/trace_io.hpp"

using namespace signflow;

namespace {

struct CommonFlags {
  std::optional<std::string> config;
  std::optional<std::string> problem;
  std::vector<std::string> algos;
  std::vector<std::string> steps;
  std::optional<double> beta;
  bool restart = false;
  std::optional<int> iters;
  std::optional<std::uint64_t> seed;
  std::optional<int> n;
  std::optional<int> d;
  std::optional<double> gamma;
  std::optional<double> lambda;
  std::optional<double> kappa;
  std::optional<std::string> dataset;
  std::optional<double> eps_active;
  std::optional<std::string> out;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config, "JSON experiment config; flags override its values");
  app->add_option("--problem", f.problem, "lq, smoothmax, logreg or sepquad");
  app->add_option("--algo", f.algos, "gd, ngd, gcd, signgd, onehit, twohit, cc or asgd (repeatable)");
  app->add_option("--step", f.steps,
                  "const:<v>, const:tuned, adaptive or face; one value for all algos or one per algo");
  app->add_option("--beta", f.beta, "momentum for asgd");
  app->add_flag("--restart", f.restart, "enable the asgd restart safeguard");
  app->add_option("--iters", f.iters, "iteration budget");
  app->add_option("--seed", f.seed, "experiment seed");
  app->add_option("--n", f.n, "number of samples / rows");
  app->add_option("--d", f.d, "dimension");
  app->add_option("--gamma", f.gamma, "coupling weight (lq, smoothmax)");
  app->add_option("--lambda", f.lambda, "l2 regularization (logreg)");
  app->add_option("--kappa", f.kappa, "curvature spread (smoothmax, sepquad)");
  app->add_option("--dataset", f.dataset, "CSV with a label column (logreg)");
  app->add_option("--eps-active", f.eps_active, "active-face threshold");
  app->add_option("--out", f.out, "output directory");
}

ExperimentConfig resolve(const CommonFlags& f) {
  ExperimentConfig cfg;
  bool from_file = false;
  if (f.config) {
    std::string text;
    try {
      text = read_text_file(*f.config);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
    cfg = config_from_json(text);
    from_file = true;
  }
  if (f.problem) {
    const ProblemKind kind = parse_problem_kind(*f.problem);
    if (!from_file || kind != cfg.problem.kind) {
      const std::uint64_t seed = cfg.problem.seed;
      cfg.problem = ProblemSpec::defaults(kind);
      cfg.problem.seed = seed;
    }
  }
  if (f.seed) cfg.problem.seed = *f.seed;
  if (f.n) cfg.problem.n = *f.n;
  if (f.d) cfg.problem.d = *f.d;
  if (f.gamma) cfg.problem.gamma = *f.gamma;
  if (f.lambda) cfg.problem.lambda = *f.lambda;
  if (f.kappa) cfg.problem.kappa = *f.kappa;
  if (f.dataset) cfg.problem.dataset_path = *f.dataset;
  if (f.iters) cfg.iters = *f.iters;
  if (f.eps_active) cfg.eps_active = *f.eps_active;
  if (f.out) cfg.output_dir = *f.out;

  if (!f.algos.empty()) {
    if (f.steps.size() > 1 && f.steps.size() != f.algos.size()) {
      throw ConfigError("--step must be given once or once per --algo");
    }
    cfg.algos.clear();
    for (std::size_t i = 0; i < f.algos.size(); ++i) {
      AlgoConfig a;
      a.algo = parse_algorithm(f.algos[i]);
      if (!f.steps.empty()) a.policy = StepPolicy::parse(f.steps[f.steps.size() == 1 ? 0 : i]);
      cfg.algos.push_back(a);
    }
  } else if (!f.steps.empty()) {
    if (cfg.algos.empty()) cfg.algos.push_back(AlgoConfig{});
    if (f.steps.size() > 1 && f.steps.size() != cfg.algos.size()) {
      throw ConfigError("--step must be given once or once per algorithm");
    }
    for (std::size_t i = 0; i < cfg.algos.size(); ++i) {
      cfg.algos[i].policy = StepPolicy::parse(f.steps[f.steps.size() == 1 ? 0 : i]);
    }
  }
  if (cfg.algos.empty()) cfg.algos.push_back(AlgoConfig{});
  for (auto& a : cfg.algos) {
    if (f.beta) a.beta = *f.beta;
    if (f.restart) a.restart = true;
  }
  cfg.validate();
  return cfg;
}

Vector parse_x0(const std::vector<double>& v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) x[static_cast<Eigen::Index>(i)] = v[i];
  return x;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sign-based steepest descent experiments and checks"};
  app.require_subcommand(1);

  CommonFlags bench_flags;
  CLI::App* bench = app.add_subcommand("bench", "run optimizers on a problem and write traces");
  add_common(bench, bench_flags);

  CommonFlags ablate_flags;
  CLI::App* ablate = app.add_subcommand("ablate-face", "active-face size of signgd vs asgd+restart");
  add_common(ablate, ablate_flags);

  FlowConfig flow_cfg;
  std::vector<double> flow_a;
  std::vector<double> flow_x0;
  std::string flow_mode = "aware";
  std::optional<std::string> flow_out;
  CLI::App* flow = app.add_subcommand("flow", "integrate the sign flow on x2 + (x2 - a x1)^2");
  flow->set_help_flag("--help", "Print this help message and exit");
  flow->add_option("--a", flow_a, "manifold slope (repeatable); default 0.5 and 2");
  flow->add_option("--h", flow_cfg.h, "base step");
  flow->add_option("--T", flow_cfg.T, "horizon");
  flow->add_option("--x0", flow_x0, "start point")->expected(2);
  flow->add_option("--mode", flow_mode, "naive or aware")
      ->check(CLI::IsMember({"naive", "aware"}));
  flow->add_option("--out", flow_out, "output directory");

  std::string scope = "all";
  CLI::App* verify = app.add_subcommand("verify", "run the property suites");
  verify->add_option("--scope", scope, "all, lemmas, rates, sliding or flow");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (bench->parsed()) {
      const ExperimentConfig cfg = resolve(bench_flags);
      const BenchReport report = cli_bench(cfg);
      std::cout << report.summary_csv;
      std::cout << "wrote " << report.summary_path << " and " << report.svg_path << "\n";
      if (!report.reference_converged) {
        std::cerr << "warning: reference solve did not converge; gap columns omitted\n";
        return kExitUnconvergedReference;
      }
      return kExitOk;
    }
    if (ablate->parsed()) {
      const ExperimentConfig cfg = resolve(ablate_flags);
      const AblationReport report = cli_ablate_face(cfg);
      std::cout << "wrote " << report.csv_path << " and " << report.svg_path << "\n";
      return kExitOk;
    }
    if (flow->parsed()) {
      if (!flow_a.empty()) flow_cfg.a_values = flow_a;
      if (!flow_x0.empty()) flow_cfg.x0 = parse_x0(flow_x0);
      flow_cfg.mode = flow_mode == "naive" ? FlowMode::Naive : FlowMode::SlidingAware;
      if (flow_out) flow_cfg.output_dir = *flow_out;
      const FlowReport report = cli_flow(flow_cfg);
      for (std::size_t i = 0; i < report.csv_paths.size(); ++i) {
        const FlowTrajectory& t = report.trajectories[i];
        std::cout << report.csv_paths[i] << ": " << t.count(EventKind::Switch) << " switch, "
                  << t.count(EventKind::SlideEnter) << " slide_enter, "
                  << t.count(EventKind::SlideExit) << " slide_exit\n";
      }
      std::cout << "wrote " << report.svg_path << "\n";
      return kExitOk;
    }
    if (verify->parsed()) {
      return cli_verify(parse_verify_scope(scope), std::cout);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return kExitOk;
}
