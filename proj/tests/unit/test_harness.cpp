#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>
#include <vector>

#include "signflow/harness.hpp"
#include "signflow/svg.hpp"
#include "signflow/trace_io.hpp"
#include "test_util.hpp"

using namespace signflow;
namespace fs = std::filesystem;

namespace {

std::string scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("signflow-unit-" + name);
  fs::remove_all(p);
  return p.string();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

// Minimal well-formedness check: balanced, properly nested elements and quoted attributes.
bool well_formed_xml(const std::string& s) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  while ((i = s.find('<', i)) != std::string::npos) {
    const std::size_t j = s.find('>', i);
    if (j == std::string::npos) return false;
    std::string tag = s.substr(i + 1, j - i - 1);
    i = j + 1;
    if (tag.empty()) return false;
    if (tag[0] == '?' || tag[0] == '!') continue;
    std::size_t quotes = 0;
    for (char c : tag) quotes += c == '"';
    if (quotes % 2 != 0) return false;
    if (tag[0] == '/') {
      if (stack.empty() || stack.back() != tag.substr(1)) return false;
      stack.pop_back();
    } else if (tag.back() != '/') {
      stack.push_back(tag.substr(0, tag.find_first_of(" \t\n")));
    }
  }
  return stack.empty();
}

ExperimentConfig small_config(const std::string& out) {
  ExperimentConfig cfg;
  cfg.problem = ProblemSpec::defaults(ProblemKind::SeparableQuadratic);
  cfg.problem.d = 10;
  cfg.problem.seed = 4;
  cfg.iters = 30;
  cfg.output_dir = out;
  AlgoConfig a;
  a.algo = Algorithm::SignGD;
  AlgoConfig b;
  b.algo = Algorithm::ASGD;
  b.beta = 0.3;
  b.restart = true;
  cfg.algos = {a, b};
  return cfg;
}

}  // namespace

TEST_CASE("shortest round-trip float formatting") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(1e-300) == "1e-300");
  for (double v : {M_PI, 1.0 / 3.0, 2.5e-17, -123456.789}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("trace CSV schema") {
  const Objective f = make_separable_quadratic(vec({1.0, 1.0}), vec({0.0, 0.0}));
  const RunTrace t = run(f, Algorithm::SignGD, vec({1.0, 1.0}), StepPolicy::adaptive(), 1);
  const auto rows = lines(trace_csv(t));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == "iter,f_gap,dist_sq,eta,grad_l1,active_size,S_k,freezes,slides,restarts");
  CHECK(rows[1] == "0,1,2,0,2,2,2,0,0,0");
  CHECK(rows[2] == "1,0,0,1,0,0,0,0,0,0");

  const Objective m = make_manifold_example(2.0);
  const RunTrace nr = run(m, Algorithm::SignGD, vec({0.3, 0.5}), StepPolicy::adaptive(), 1);
  CHECK(lines(trace_csv(nr))[1].rfind("0,,,0,", 0) == 0);
}

TEST_CASE("config JSON round trip and overrides") {
  ExperimentConfig cfg = small_config("out-dir");
  cfg.algos[0].policy = StepPolicy::constant(0.125);
  const ExperimentConfig back = config_from_json(config_to_json(cfg));
  CHECK(back.problem.kind == cfg.problem.kind);
  CHECK(back.problem.d == 10);
  CHECK(back.problem.seed == 4);
  CHECK(back.iters == 30);
  CHECK(back.output_dir == "out-dir");
  REQUIRE(back.algos.size() == 2);
  CHECK(back.algos[0].policy.eta == 0.125);
  CHECK(back.algos[1].restart);
  CHECK(back.algos[1].beta == 0.3);
  CHECK(config_to_json(back) == config_to_json(cfg));
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(config_from_json("{"), ConfigError);
  CHECK_THROWS_AS(config_from_json("[]"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"schema":"other/1"})"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"schema":"signflow.experiment/1","problem":{"kind":"x"}})"),
                  ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"schema":"signflow.experiment/1","iters":"many"})"),
                  ConfigError);
  CHECK_THROWS_AS(
      config_from_json(R"({"schema":"signflow.experiment/1","algos":[{"algo":"signgd","step":"x"}]})"),
      ConfigError);

  ExperimentConfig cfg = small_config("o");
  cfg.validate();
  cfg.iters = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = small_config("o");
  cfg.algos.clear();
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = small_config("o");
  cfg.algos.push_back(cfg.algos[0]);
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("algorithm labels are file-name friendly") {
  AlgoConfig a;
  a.algo = Algorithm::SignGD;
  a.policy = StepPolicy::constant(0.5);
  CHECK(a.label() == "signgd-const-0.5");
  AlgoConfig b;
  b.algo = Algorithm::ASGD;
  b.beta = 0.3;
  b.restart = true;
  CHECK(b.label() == "asgd-adaptive-b0.3-restart");
}

TEST_CASE("bench writes one CSV per algorithm plus summary and figure") {
  const std::string out = scratch("bench");
  ExperimentConfig cfg = small_config(out);
  const BenchReport r = cli_bench(cfg);
  CHECK(r.reference_converged);
  REQUIRE(r.rows.size() == 2);
  for (const BenchRow& row : r.rows) {
    CHECK(fs::exists(row.csv_path));
    CHECK(row.final_gap.has_value());
  }
  const auto summary = lines(read_text_file(r.summary_path));
  CHECK(summary.size() == 3);
  CHECK(summary[0].rfind("label,algo,step,", 0) == 0);

  const std::string svg = read_text_file(r.svg_path);
  CHECK(well_formed_xml(svg));
  for (const BenchRow& row : r.rows) {
    CHECK(svg.find("data-series=\"" + row.label + "\"") != std::string::npos);
  }
  // Adaptive sign rows never contract slower than the linear rate.
  const Objective f = make_problem(cfg.problem);
  const double bound = 1.0 - *f.mu() / f.lipschitz_l1() + 1e-9;
  REQUIRE(r.rows[0].max_contraction);
  CHECK(*r.rows[0].max_contraction <= bound);
}

TEST_CASE("bench with one iteration writes two data rows") {
  const std::string out = scratch("bench1");
  ExperimentConfig cfg = small_config(out);
  cfg.iters = 1;
  cfg.algos.resize(1);
  const BenchReport r = cli_bench(cfg);
  CHECK(lines(read_text_file(r.rows[0].csv_path)).size() == 3);
}

TEST_CASE("bench output is byte-identical across runs") {
  ExperimentConfig a = small_config(scratch("det-a"));
  ExperimentConfig b = small_config(scratch("det-b"));
  const BenchReport ra = cli_bench(a);
  const BenchReport rb = cli_bench(b);
  for (std::size_t i = 0; i < ra.rows.size(); ++i) {
    CHECK(read_text_file(ra.rows[i].csv_path) == read_text_file(rb.rows[i].csv_path));
  }
  CHECK(read_text_file(ra.summary_path) == read_text_file(rb.summary_path));
}

TEST_CASE("unconverged reference drops the gap columns") {
  const std::string out = scratch("unconv");
  ExperimentConfig cfg;
  cfg.problem = ProblemSpec::defaults(ProblemKind::LogisticQuadratic);
  cfg.problem.n = 50;
  cfg.problem.d = 10;
  cfg.reference_tol = 1e-300;
  cfg.iters = 5;
  cfg.output_dir = out;
  cfg.algos = {AlgoConfig{}};
  const BenchReport r = cli_bench(cfg);
  CHECK_FALSE(r.reference_converged);
  CHECK_FALSE(r.rows[0].final_gap.has_value());
  CHECK(lines(read_text_file(r.rows[0].csv_path))[1].rfind("0,,,", 0) == 0);
}

TEST_CASE("tuned constant step is picked from the grid") {
  const auto grid = tuning_grid();
  REQUIRE(grid.size() == 25);
  CHECK(grid.front() == doctest::Approx(1e-5));
  CHECK(grid.back() == doctest::Approx(1.0));
  ExperimentConfig cfg = small_config(scratch("tune"));
  AlgoConfig a;
  a.algo = Algorithm::SignGD;
  a.policy = StepPolicy::tuned_constant();
  const double eta = tune_constant_step(cfg, a);
  CHECK(std::find_if(grid.begin(), grid.end(), [&](double g) { return g == eta; }) != grid.end());
}

TEST_CASE("flow command output") {
  SUBCASE("both regimes") {
    FlowConfig cfg;
    cfg.output_dir = scratch("flow");
    const FlowReport r = cli_flow(cfg);
    REQUIRE(r.csv_paths.size() == 2);
    CHECK(read_text_file(r.csv_paths[0]).find("switch:") != std::string::npos);
    CHECK(read_text_file(r.csv_paths[1]).find("slide_enter:") != std::string::npos);
    CHECK(well_formed_xml(read_text_file(r.svg_path)));
  }
  SUBCASE("zero horizon gives header-only CSVs") {
    FlowConfig cfg;
    cfg.T = 0.0;
    cfg.output_dir = scratch("flow0");
    const FlowReport r = cli_flow(cfg);
    for (const auto& p : r.csv_paths) CHECK(read_text_file(p) == "t,x_1,x_2,event\n");
  }
  SUBCASE("invalid inputs") {
    FlowConfig cfg;
    cfg.output_dir = scratch("flowbad");
    cfg.a_values = {-1.0};
    CHECK_THROWS_AS(cli_flow(cfg), ConfigError);
  }
}

TEST_CASE("active-face ablation") {
  ExperimentConfig cfg;
  cfg.problem = ProblemSpec::defaults(ProblemKind::LogisticQuadratic);
  cfg.problem.n = 400;
  cfg.problem.d = 40;
  cfg.iters = 400;
  cfg.output_dir = scratch("ablate");
  cfg.algos = {AlgoConfig{}};
  const AblationReport r = cli_ablate_face(cfg);
  const auto rows = lines(read_text_file(r.csv_path));
  CHECK(rows[0] == "iter,active_size_signgd,S_k_signgd,active_size_asgd,S_k_asgd");
  CHECK(r.signgd.records.front().active_size == 40);
  CHECK(well_formed_xml(read_text_file(r.svg_path)));

  cfg.algos[0].policy = StepPolicy::constant(0.1);
  CHECK_THROWS_AS(cli_ablate_face(cfg), ConfigError);
}

TEST_CASE("a start at the optimum has an empty active face throughout") {
  const Vector c = vec({1.0, -2.0, 3.0});
  const Objective f = make_separable_quadratic(vec({1.0, 2.0, 3.0}), c);
  const RunTrace t = run(f, Algorithm::SignGD, c, StepPolicy::adaptive(), 20);
  for (const auto& r : t.records) CHECK(r.active_size == 0);
}

TEST_CASE("svg escaping and series markers") {
  CHECK(xml_escape("a<b & \"c\"") == "a&lt;b &amp; &quot;c&quot;");
  SvgPanel p;
  p.title = "t<1>";
  p.series.push_back({"s&1", {0, 1, 2}, {1, 0.1, 0.01}, false});
  p.series.push_back({"empty", {}, {}, true});
  const std::string svg = render_svg({p});
  CHECK(well_formed_xml(svg));
  CHECK(svg.find("data-series=\"s&amp;1\"") != std::string::npos);
  CHECK(svg.find("data-series=\"empty\"") != std::string::npos);
}

TEST_CASE("verify scope parsing") {
  CHECK(parse_verify_scope("rates") == VerifyScope::Rates);
  CHECK_THROWS_AS(parse_verify_scope("everything"), ConfigError);
  std::ostringstream out;
  CHECK(cli_verify(VerifyScope::Sliding, out) == kExitOk);
  CHECK(out.str().find("PASS") != std::string::npos);
}
