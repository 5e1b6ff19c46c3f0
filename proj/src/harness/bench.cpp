#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <limits>
#include <mutex>
#include <thread>

#include "signflow/harness.hpp"
#include "signflow/rng.hpp"
#include "signflow/svg.hpp"
#include "signflow/trace_io.hpp"

namespace signflow {

namespace {

std::string join_path(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

// Runs task(i) for i in [0, count) on up to worker_count() threads; rethrows the first error.
template <typename Task>
void parallel_for(std::size_t count, Task task) {
  const std::size_t workers = std::min<std::size_t>(worker_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          task(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

RunOptions options_for(const ExperimentConfig& config, const AlgoConfig& algo) {
  RunOptions opts;
  opts.beta = algo.beta;
  opts.restart = algo.restart;
  opts.eps_active = config.eps_active;
  opts.tau_tie = config.tau_tie;
  opts.keep_iterates = false;
  return opts;
}

std::string opt_cell(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

}  // namespace

unsigned worker_count() {
  if (const char* env = std::getenv("SIGNFLOW_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

std::vector<double> tuning_grid() {
  std::vector<double> grid(25);
  for (int k = 0; k < 25; ++k) grid[k] = std::pow(10.0, -5.0 + 5.0 * k / 24.0);
  grid.front() = 1e-5;
  grid.back() = 1.0;
  return grid;
}

double tune_constant_step(const ExperimentConfig& config, const AlgoConfig& algo) {
  ProblemSpec spec = config.problem;
  spec.seed = derive_seed(config.problem.seed, "validation");
  const ProblemInstance inst = generate_instance(spec);
  const Objective obj = build_objective(inst);
  const Vector x0 = default_start(inst);
  double best_eta = 0.0;
  double best_value = std::numeric_limits<double>::infinity();
  for (double eta : tuning_grid()) {
    double final_value = std::numeric_limits<double>::infinity();
    try {
      const RunTrace t =
          run(obj, algo.algo, x0, StepPolicy::constant(eta), config.iters, options_for(config, algo));
      final_value = t.records.back().f_value;
    } catch (const std::runtime_error&) {
      continue;  // diverged to non-finite values
    }
    if (std::isfinite(final_value) && final_value < best_value) {
      best_value = final_value;
      best_eta = eta;
    }
  }
  if (!(best_eta > 0.0)) throw ConfigError("tuning: every grid step diverged");
  return best_eta;
}

BenchReport cli_bench(const ExperimentConfig& config) {
  config.validate();
  const ProblemInstance inst = generate_instance(config.problem);
  Objective obj = build_objective(inst);
  const Vector x0 = default_start(inst);

  BenchReport report;
  if (obj.reference()) {
    report.reference = {obj.reference()->x_star, obj.reference()->f_star, 0.0, 0, true};
    report.reference.grad_inf_norm = norm(obj.gradient(obj.reference()->x_star), NormKind::Linf);
  } else {
    report.reference = reference_solve(obj, x0, config.reference_tol);
    if (report.reference.converged) {
      obj = obj.with_reference({report.reference.x_star, report.reference.f_star});
    }
  }
  report.reference_converged = report.reference.converged;

  report.rows.resize(config.algos.size());
  parallel_for(config.algos.size(), [&](std::size_t i) {
    const AlgoConfig& algo = config.algos[i];
    BenchRow& row = report.rows[i];
    row.label = algo.label();
    StepPolicy policy = algo.policy;
    if (policy.kind == StepKind::Constant && policy.tuned) {
      const double eta = tune_constant_step(config, algo);
      row.tuned_eta = eta;
      policy = StepPolicy::constant(eta);
      policy.tuned = true;
    }
    row.trace = run(obj, algo.algo, x0, policy, config.iters, options_for(config, algo));
    row.csv_path = join_path(config.output_dir, row.label + ".csv");
    write_text_file(row.csv_path, trace_csv(row.trace));

    const auto& recs = row.trace.records;
    if (row.trace.has_gap()) {
      row.final_gap = recs.back().f_gap;
      row.final_dist_sq = recs.back().dist_sq;
      for (const auto& r : recs) {
        if (*r.f_gap <= kSummaryEpsilon) {
          row.iters_to_eps = r.iter;
          break;
        }
      }
      for (std::size_t k = 0; k + 1 < recs.size(); ++k) {
        if (*recs[k].f_gap > 1e-14) {
          const double ratio = *recs[k + 1].f_gap / *recs[k].f_gap;
          row.max_contraction = row.max_contraction ? std::max(*row.max_contraction, ratio) : ratio;
        }
      }
    }
  });

  std::string summary =
      "label,algo,step,eta_tuned,beta,restart,final_gap,final_dist_sq,iters_to_eps,"
      "max_contraction,restarts,freezes,slides,reference_converged\n";
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& row = report.rows[i];
    const auto& algo = config.algos[i];
    summary += row.label + "," + to_string(algo.algo) + "," + algo.policy.to_string() + "," +
               opt_cell(row.tuned_eta) + "," + format_double(algo.beta) + "," +
               (algo.restart ? "1" : "0") + "," + opt_cell(row.final_gap) + "," +
               opt_cell(row.final_dist_sq) + "," +
               (row.iters_to_eps ? std::to_string(*row.iters_to_eps) : "") + "," +
               opt_cell(row.max_contraction) + "," + std::to_string(row.trace.total_restarts()) +
               "," + std::to_string(row.trace.total_freezes()) + "," +
               std::to_string(row.trace.total_slides()) + "," +
               (report.reference_converged ? "1" : "0") + "\n";
  }
  report.summary_csv = summary;
  report.summary_path = join_path(config.output_dir, "summary.csv");
  write_text_file(report.summary_path, summary);

  std::vector<SvgPanel> panels;
  const std::string problem = to_string(config.problem.kind);
  if (report.reference_converged) {
    SvgPanel gap{problem + ": function gap", "iteration", "f(x_k) - f*", true, {}};
    SvgPanel dist{problem + ": squared distance", "iteration", "||x_k - x*||^2", true, {}};
    for (const auto& row : report.rows) {
      SvgSeries sg{row.label, {}, {}, false};
      SvgSeries sd{row.label, {}, {}, false};
      for (const auto& r : row.trace.records) {
        sg.x.push_back(r.iter);
        sg.y.push_back(*r.f_gap);
        sd.x.push_back(r.iter);
        sd.y.push_back(*r.dist_sq);
      }
      gap.series.push_back(std::move(sg));
      dist.series.push_back(std::move(sd));
    }
    panels = {gap, dist};
  } else {
    SvgPanel grad{problem + ": gradient l1 norm (reference unconverged)", "iteration",
                  "||grad f(x_k)||_1", true, {}};
    for (const auto& row : report.rows) {
      SvgSeries s{row.label, {}, {}, false};
      for (const auto& r : row.trace.records) {
        s.x.push_back(r.iter);
        s.y.push_back(r.grad_l1);
      }
      grad.series.push_back(std::move(s));
    }
    panels = {grad};
  }
  report.svg_path = join_path(config.output_dir, "bench.svg");
  write_text_file(report.svg_path, render_svg(panels));
  return report;
}

FlowReport cli_flow(const FlowConfig& config) {
  if (config.a_values.empty()) throw ConfigError("flow: at least one --a value is required");
  if (config.x0.size() != 2) throw ConfigError("flow: x0 must have two entries");
  if (!(config.T >= 0.0) || !std::isfinite(config.T)) throw ConfigError("flow: T must be >= 0");
  if (!(config.h > 0.0)) throw ConfigError("flow: h must be > 0");
  for (double a : config.a_values) {
    if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("flow: a must be > 0");
  }
  FlowReport report;
  std::vector<SvgPanel> panels;
  for (double a : config.a_values) {
    const Objective f = make_manifold_example(a);
    FlowTrajectory traj;
    if (config.T > 0.0) traj = integrate_sign_flow(f, config.x0, config.h, config.T, config.mode);
    const std::string path = join_path(config.output_dir, "flow_a" + format_double(a) + ".csv");
    write_text_file(path, trajectory_csv(traj, 2));
    report.csv_paths.push_back(path);

    std::string regime;
    try {
      regime = to_string(classify_regime(a));
    } catch (const std::invalid_argument&) {
      regime = "invalid";
    }
    SvgPanel panel{"a = " + format_double(a) + " (" + regime + ")", "x_1", "x_2", false, {}};
    SvgSeries path_series{"trajectory a=" + format_double(a), {}, {}, false};
    double lo = config.x0[0];
    double hi = config.x0[0];
    for (const auto& s : traj.states) {
      path_series.x.push_back(s[0]);
      path_series.y.push_back(s[1]);
      lo = std::min(lo, s[0]);
      hi = std::max(hi, s[0]);
    }
    if (hi - lo < 1e-9) {
      lo -= 0.5;
      hi += 0.5;
    }
    SvgSeries manifold{"manifold x_2 = a x_1", {lo, hi}, {a * lo, a * hi}, true};
    panel.series = {path_series, manifold};
    panels.push_back(std::move(panel));
    report.trajectories.push_back(std::move(traj));
  }
  report.svg_path = join_path(config.output_dir, "flow.svg");
  write_text_file(report.svg_path, render_svg(panels));
  return report;
}

AblationReport cli_ablate_face(const ExperimentConfig& config) {
  ExperimentConfig cfg = config;
  if (cfg.algos.empty()) cfg.algos.push_back({});
  double beta = 0.9;
  for (const auto& a : cfg.algos) {
    if (a.policy.kind != StepKind::Adaptive) {
      throw ConfigError("ablate-face: requires the adaptive step policy");
    }
    if (a.algo == Algorithm::ASGD) beta = a.beta;
  }
  cfg.validate();
  const ProblemInstance inst = generate_instance(cfg.problem);
  const Objective obj = build_objective(inst);
  const Vector x0 = default_start(inst);

  RunOptions opts;
  opts.eps_active = cfg.eps_active;
  opts.beta = beta;
  opts.restart = true;
  AblationReport report;
  const AlgoConfig sign_cfg{Algorithm::SignGD, StepPolicy::adaptive(), beta, false};
  const AlgoConfig asgd_cfg{Algorithm::ASGD, StepPolicy::adaptive(), beta, true};
  parallel_for(2, [&](std::size_t i) {
    if (i == 0) {
      report.signgd = run(obj, Algorithm::SignGD, x0, StepPolicy::adaptive(), cfg.iters, opts);
    } else {
      report.asgd = run(obj, Algorithm::ASGD, x0, StepPolicy::adaptive(), cfg.iters, opts);
    }
  });
  write_text_file(join_path(cfg.output_dir, sign_cfg.label() + ".csv"), trace_csv(report.signgd));
  write_text_file(join_path(cfg.output_dir, asgd_cfg.label() + ".csv"), trace_csv(report.asgd));

  std::string csv = "iter,active_size_signgd,S_k_signgd,active_size_asgd,S_k_asgd\n";
  const std::size_t rows = std::max(report.signgd.records.size(), report.asgd.records.size());
  SvgPanel sizes{"active-face size |I_k|", "iteration", "|I_k|", false, {}};
  SvgPanel curv{"active-face curvature S_k", "iteration", "S_k", false, {}};
  SvgSeries s1{"signgd |I_k|", {}, {}, false};
  SvgSeries s2{"asgd-restart |I_k|", {}, {}, false};
  SvgSeries c1{"signgd S_k", {}, {}, false};
  SvgSeries c2{"asgd-restart S_k", {}, {}, false};
  for (std::size_t k = 0; k < rows; ++k) {
    csv += std::to_string(k);
    for (const RunTrace* t : {&report.signgd, &report.asgd}) {
      csv += ",";
      if (k < t->records.size()) csv += std::to_string(t->records[k].active_size);
      csv += ",";
      if (k < t->records.size()) csv += format_double(t->records[k].active_curvature);
    }
    csv += "\n";
    if (k < report.signgd.records.size()) {
      s1.x.push_back(k);
      s1.y.push_back(report.signgd.records[k].active_size);
      c1.x.push_back(k);
      c1.y.push_back(report.signgd.records[k].active_curvature);
    }
    if (k < report.asgd.records.size()) {
      s2.x.push_back(k);
      s2.y.push_back(report.asgd.records[k].active_size);
      c2.x.push_back(k);
      c2.y.push_back(report.asgd.records[k].active_curvature);
    }
  }
  sizes.series = {s1, s2};
  curv.series = {c1, c2};
  report.csv_path = join_path(cfg.output_dir, "ablate_face.csv");
  write_text_file(report.csv_path, csv);
  report.svg_path = join_path(cfg.output_dir, "ablate_face.svg");
  write_text_file(report.svg_path, render_svg({sizes, curv}));
  return report;
}

}  // namespace signflow
