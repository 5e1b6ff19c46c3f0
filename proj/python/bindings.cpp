#include <limits>
#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "signflow/directions.hpp"
#include "signflow/harness.hpp"
#include "signflow/trace_io.hpp"

namespace py = pybind11;
using namespace signflow;

namespace {

BallKind parse_ball(const std::string& name) {
  if (name == "l1") return BallKind::L1;
  if (name == "l2") return BallKind::L2;
  if (name == "linf") return BallKind::Linf;
  throw py::value_error("ball must be 'l1', 'l2' or 'linf'");
}

py::dict trace_to_dict(const RunTrace& t) {
  const auto n = static_cast<py::ssize_t>(t.records.size());
  py::array_t<double> gap(n), dist(n), eta(n), grad(n), s(n);
  py::array_t<int> iter(n), active(n), freezes(n), slides(n), restarts(n);
  for (py::ssize_t k = 0; k < n; ++k) {
    const TraceRecord& r = t.records[static_cast<std::size_t>(k)];
    iter.mutable_at(k) = r.iter;
    gap.mutable_at(k) = r.f_gap.value_or(std::numeric_limits<double>::quiet_NaN());
    dist.mutable_at(k) = r.dist_sq.value_or(std::numeric_limits<double>::quiet_NaN());
    eta.mutable_at(k) = r.eta;
    grad.mutable_at(k) = r.grad_l1;
    active.mutable_at(k) = r.active_size;
    s.mutable_at(k) = r.active_curvature;
    freezes.mutable_at(k) = r.freezes;
    slides.mutable_at(k) = r.slides;
    restarts.mutable_at(k) = r.restarts;
  }
  py::dict d;
  d["algorithm"] = t.algorithm;
  d["policy"] = t.policy;
  d["iter"] = iter;
  d["f_gap"] = gap;
  d["dist_sq"] = dist;
  d["eta"] = eta;
  d["grad_l1"] = grad;
  d["active_size"] = active;
  d["S_k"] = s;
  d["freezes"] = freezes;
  d["slides"] = slides;
  d["restarts"] = restarts;
  d["x_final"] = t.x_final;
  d["csv"] = trace_csv(t);
  return d;
}

// ConfigError derives from std::runtime_error; surface it as ValueError.
template <typename F>
auto config_guard(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw py::value_error(e.what());
  }
}

}  // namespace

PYBIND11_MODULE(_signflow, m) {
  m.doc() = "Sign-based steepest descent: optimizers, objectives, sign-flow integration";

  py::class_<Objective>(m, "Objective")
      .def_property_readonly("name", &Objective::name)
      .def_property_readonly("dim", &Objective::dim)
      .def("value", &Objective::value)
      .def("gradient", &Objective::gradient)
      .def("value_difference", &Objective::value_difference)
      .def("gap", &Objective::gap)
      .def_property_readonly("coord_lipschitz", &Objective::coord_lipschitz)
      .def_property_readonly("lipschitz_l1", &Objective::lipschitz_l1)
      .def_property_readonly("mu", &Objective::mu)
      .def_property_readonly("x_star", [](const Objective& o) -> std::optional<Vector> {
        if (!o.reference()) return std::nullopt;
        return o.reference()->x_star;
      });

  m.def(
      "make_problem",
      [](const std::string& kind, int n, int d, double gamma, std::optional<double> lambda,
         double kappa, std::uint64_t seed, std::optional<std::string> dataset,
         bool with_reference) {
        return config_guard([&] {
          ProblemSpec spec = ProblemSpec::defaults(parse_problem_kind(kind));
          spec.n = n;
          spec.d = d;
          spec.gamma = gamma;
          if (lambda) spec.lambda = *lambda;
          spec.kappa = kappa;
          spec.seed = seed;
          if (dataset) spec.dataset_path = *dataset;
          const ProblemInstance inst = generate_instance(spec);
          Objective obj = build_objective(inst);
          const Vector x0 = default_start(inst);
          if (with_reference && !obj.reference()) {
            const ReferenceSolution ref = reference_solve(obj, x0);
            if (ref.converged) obj = obj.with_reference({ref.x_star, ref.f_star});
          }
          return py::make_tuple(obj, x0);
        });
      },
      py::arg("kind"), py::arg("n") = 2000, py::arg("d") = 200, py::arg("gamma") = 1.0,
      py::arg("lambda_") = py::none(), py::arg("kappa") = 100.0, py::arg("seed") = 0,
      py::arg("dataset") = py::none(), py::arg("with_reference") = true,
      "Builds a zoo problem; returns (objective, default start).");

  m.def("separable_quadratic", &make_separable_quadratic, py::arg("lipschitz"),
        py::arg("center"));
  m.def("manifold_example", &make_manifold_example, py::arg("a"));

  m.def(
      "run",
      [](const Objective& obj, const std::string& algo, const Vector& x0, const std::string& step,
         int iters, double beta, bool restart, double eps_active, double tau_tie) {
        return config_guard([&] {
          RunOptions o;
          o.beta = beta;
          o.restart = restart;
          o.eps_active = eps_active;
          o.tau_tie = tau_tie;
          return trace_to_dict(
              run(obj, parse_algorithm(algo), x0, StepPolicy::parse(step), iters, o));
        });
      },
      py::arg("objective"), py::arg("algo"), py::arg("x0"), py::arg("step") = "adaptive",
      py::arg("iters") = 2000, py::arg("beta") = 0.9, py::arg("restart") = false,
      py::arg("eps_active") = kDefaultEpsActive, py::arg("tau_tie") = 0.0);

  m.def("signgd_step", &signgd_step, py::arg("x"), py::arg("g"), py::arg("eta"));
  m.def("adaptive_eta", &adaptive_eta, py::arg("g"), py::arg("objective"));
  m.def("face_aware_eta", &face_aware_eta, py::arg("g"), py::arg("objective"),
        py::arg("eps_active") = kDefaultEpsActive);
  m.def("cc_tie_step", &cc_tie_step, py::arg("x"), py::arg("g"), py::arg("eta"),
        py::arg("weights") = py::none(), py::arg("tau_tie") = 0.0);
  m.def(
      "sliding_xi",
      [](double d_km2, double d_km1, double d_k, double e_km2, double e_km1, double e_k) {
        return compute_sliding_xi(d_km2, d_km1, d_k, e_km2, e_km1, e_k).xi;
      },
      py::arg("d_km2"), py::arg("d_km1"), py::arg("d_k"), py::arg("eta_km2"),
      py::arg("eta_km1"), py::arg("eta_k"), "Unclipped sliding multiplier, or None if degenerate.");

  m.def(
      "dual_norm", [](const Vector& g, const std::string& ball) {
        return dual_norm(g, NormBall(parse_ball(ball)));
      },
      py::arg("g"), py::arg("ball"));
  m.def(
      "steepest_direction",
      [](const Vector& g, const std::string& ball) {
        return steepest_face(g, NormBall(parse_ball(ball))).representative;
      },
      py::arg("g"), py::arg("ball"));

  m.def(
      "classify_regime", [](double a) { return to_string(classify_regime(a)); }, py::arg("a"));
  m.def(
      "integrate_flow",
      [](const Objective& obj, const Vector& x0, double h, double T, const std::string& mode) {
        return config_guard([&] {
          if (mode != "naive" && mode != "aware") throw ConfigError("mode must be naive or aware");
          const FlowTrajectory t = integrate_sign_flow(
              obj, x0, h, T, mode == "naive" ? FlowMode::Naive : FlowMode::SlidingAware);
          py::list events;
          for (const auto& e : t.events) {
            events.append(py::make_tuple(e.time, e.coordinate, to_string(e.kind)));
          }
          py::dict d;
          d["t"] = t.times;
          d["x"] = t.states;
          d["events"] = events;
          return d;
        });
      },
      py::arg("objective"), py::arg("x0"), py::arg("h"), py::arg("T"), py::arg("mode") = "aware");

  m.def(
      "bench",
      [](const std::string& config_json) {
        return config_guard([&] {
          const ExperimentConfig cfg = config_from_json(config_json);
          cfg.validate();
          const BenchReport r = cli_bench(cfg);
          py::dict d;
          d["summary_csv"] = r.summary_csv;
          d["summary_path"] = r.summary_path;
          d["svg_path"] = r.svg_path;
          d["reference_converged"] = r.reference_converged;
          return d;
        });
      },
      py::arg("config_json"), "Runs a bench from a JSON experiment config.");

  m.def(
      "verify",
      [](const std::string& scope) {
        return config_guard([&] {
          std::ostringstream out;
          const int code = cli_verify(parse_verify_scope(scope), out);
          return py::make_tuple(code == 0, out.str());
        });
      },
      py::arg("scope") = "all", "Runs property suites; returns (passed, report).");
}
