#include <cmath>
#include <set>

#include <json.hpp>

#include "signflow/harness.hpp"
#include "signflow/trace_io.hpp"

namespace signflow {

using nlohmann::json;

std::string AlgoConfig::label() const {
  std::string step = policy.to_string();
  std::string clean;
  for (char c : step) clean += c == ':' ? '-' : c;
  std::string out = to_string(algo) + "-" + clean;
  if (algo == Algorithm::ASGD) {
    out += "-b" + format_double(beta);
    if (restart) out += "-restart";
  }
  return out;
}

void ExperimentConfig::validate() const {
  problem.validate();
  if (algos.empty()) throw ConfigError("config: at least one algorithm is required");
  if (iters < 1) throw ConfigError("config: iters must be >= 1");
  if (!(eps_active >= 0.0)) throw ConfigError("config: eps_active must be >= 0");
  if (!(tau_tie >= 0.0 && tau_tie < 1.0)) throw ConfigError("config: tau_tie must lie in [0, 1)");
  if (!(reference_tol > 0.0)) throw ConfigError("config: reference tolerance must be > 0");
  if (output_dir.empty()) throw ConfigError("config: output directory must not be empty");
  std::set<std::string> labels;
  for (const auto& a : algos) {
    if (!(a.beta >= 0.0 && a.beta < 1.0)) throw ConfigError("config: beta must lie in [0, 1)");
    if (!labels.insert(a.label()).second) {
      throw ConfigError("config: algorithm '" + a.label() + "' is listed twice");
    }
  }
}

namespace {

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

}  // namespace

ExperimentConfig config_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  try {
    if (!doc.is_object()) throw ConfigError("config: top level must be an object");
    if (!doc.contains("schema") || doc.at("schema").get<std::string>() != kConfigSchema) {
      throw ConfigError(std::string("config: schema field must be \"") + kConfigSchema + "\"");
    }
    ExperimentConfig cfg;
    if (doc.contains("problem")) {
      const json& p = doc.at("problem");
      const std::string kind = p.value("kind", std::string("lq"));
      cfg.problem = ProblemSpec::defaults(parse_problem_kind(kind));
      read_if(p, "n", cfg.problem.n);
      read_if(p, "d", cfg.problem.d);
      read_if(p, "gamma", cfg.problem.gamma);
      read_if(p, "lambda", cfg.problem.lambda);
      read_if(p, "kappa", cfg.problem.kappa);
      if (p.contains("dataset") && !p.at("dataset").is_null()) {
        cfg.problem.dataset_path = p.at("dataset").get<std::string>();
      }
      if (p.contains("bound")) {
        const std::string b = p.at("bound").get<std::string>();
        if (b == "certified") {
          cfg.problem.bound = CurvatureBound::Certified;
        } else if (b == "table") {
          cfg.problem.bound = CurvatureBound::Table;
        } else {
          throw ConfigError("config: bound must be \"certified\" or \"table\"");
        }
      }
    }
    read_if(doc, "seed", cfg.problem.seed);
    read_if(doc, "iters", cfg.iters);
    read_if(doc, "eps_active", cfg.eps_active);
    read_if(doc, "tau_tie", cfg.tau_tie);
    read_if(doc, "reference_tol", cfg.reference_tol);
    read_if(doc, "out", cfg.output_dir);
    if (doc.contains("algos")) {
      for (const json& a : doc.at("algos")) {
        AlgoConfig ac;
        ac.algo = parse_algorithm(a.at("algo").get<std::string>());
        if (a.contains("step")) ac.policy = StepPolicy::parse(a.at("step").get<std::string>());
        read_if(a, "beta", ac.beta);
        read_if(a, "restart", ac.restart);
        cfg.algos.push_back(ac);
      }
    }
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json problem{{"kind", to_string(cfg.problem.kind)},
               {"n", cfg.problem.n},
               {"d", cfg.problem.d},
               {"gamma", cfg.problem.gamma},
               {"lambda", cfg.problem.lambda},
               {"kappa", cfg.problem.kappa},
               {"bound", cfg.problem.bound == CurvatureBound::Table ? "table" : "certified"}};
  if (cfg.problem.dataset_path) problem["dataset"] = *cfg.problem.dataset_path;
  json algos = json::array();
  for (const auto& a : cfg.algos) {
    algos.push_back({{"algo", to_string(a.algo)},
                     {"step", a.policy.to_string()},
                     {"beta", a.beta},
                     {"restart", a.restart}});
  }
  json doc{{"schema", kConfigSchema}, {"problem", problem},      {"algos", algos},
           {"iters", cfg.iters},      {"seed", cfg.problem.seed}, {"eps_active", cfg.eps_active},
           {"tau_tie", cfg.tau_tie},  {"reference_tol", cfg.reference_tol},
           {"out", cfg.output_dir}};
  return doc.dump(2) + "\n";
}

}  // namespace signflow
