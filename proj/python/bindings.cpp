#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "asdca/costmodel.hpp"
#include "asdca/data.hpp"
#include "asdca/losses.hpp"
#include "asdca/objective.hpp"
#include "asdca/solvers.hpp"
#include "asdca/theory.hpp"

namespace py = pybind11;
using namespace asdca;

namespace {

py::dict record_to_dict(const TraceRecord& r) {
  py::dict d;
  d["iteration"] = r.iteration;
  d["examples_processed"] = r.examples_processed;
  d["primal"] = r.primal;
  d["dual"] = r.dual;
  d["gap"] = r.gap;
  d["potential"] = r.potential;
  d["wall_seconds"] = r.wall_seconds;
  return d;
}

py::dict trace_to_dict(const SolverTrace& t) {
  py::dict d;
  d["algorithm"] = std::string(algorithm_name(t.algorithm));
  d["m"] = t.batch_size;
  d["theta"] = t.theta;
  d["converged"] = t.converged;
  py::list records;
  for (const auto& r : t.records) records.append(record_to_dict(r));
  d["records"] = records;
  d["x"] = t.x;
  if (t.dual) d["coeffs"] = t.dual->coeffs;
  return d;
}

py::dict cost_to_dict(const CostEstimate& c) {
  py::dict d;
  d["algorithm"] = std::string(algorithm_name(c.algorithm));
  d["partition"] = std::string(partition_name(c.partition));
  d["m"] = c.batch_size;
  d["runtime"] = c.runtime_units;
  d["comm"] = c.comm_units;
  d["iterations"] = c.iterations;
  d["total"] = c.total_units;
  return d;
}

py::dict entry_to_dict(const VerificationEntry& e) {
  py::dict d;
  d["name"] = e.name;
  d["passed"] = e.passed;
  d["skipped"] = e.skipped;
  d["measured"] = e.measured;
  d["bound"] = e.bound;
  d["tolerance"] = e.tolerance;
  d["note"] = e.note;
  return d;
}

py::dict estimates_to_dict(const AlgorithmEstimates& a) {
  py::dict d;
  d["sdca"] = a.sdca;
  d["asdca"] = a.asdca;
  d["agd"] = a.agd;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Accelerated mini-batch SDCA, SDCA and AGD for regularized smooth losses.";

  py::class_<Dataset, std::shared_ptr<Dataset>>(m, "Dataset")
      .def_property_readonly("n", &Dataset::size)
      .def_property_readonly("dim", &Dataset::dim)
      .def_property_readonly("avg_nnz", &Dataset::avg_nnz)
      .def("labels", [](const Dataset& d) {
        std::vector<double> y;
        for (const auto& ex : d.examples()) y.push_back(ex.label);
        return y;
      })
      .def("row", [](const Dataset& d, std::size_t i) {
        if (i >= d.size()) throw py::index_error("row index out of range");
        const auto& f = d[i].features;
        return py::make_tuple(std::vector<std::size_t>(f.indices().begin(), f.indices().end()),
                              std::vector<double>(f.values().begin(), f.values().end()));
      })
      .def("__len__", &Dataset::size);

  m.def("parse_libsvm", [](const std::string& text) { return std::make_shared<Dataset>(parse_libsvm_string(text)); },
        py::arg("text"), "Parse libsvm-format text (1-based indices).");
  m.def("load_libsvm", [](const std::string& path) { return std::make_shared<Dataset>(load_libsvm(path)); },
        py::arg("path"));
  m.def("serialize_libsvm", &serialize_libsvm, py::arg("dataset"));
  m.def(
      "generate_synthetic",
      [](std::size_t n, std::size_t d, double sparsity, double label_noise, double margin, std::uint64_t seed) {
        SyntheticSpec spec{n, d, sparsity, label_noise, margin, seed};
        return std::make_shared<Dataset>(generate_synthetic(spec));
      },
      py::arg("n"), py::arg("d"), py::arg("sparsity") = 1.0, py::arg("label_noise") = 0.0,
      py::arg("margin") = 0.0, py::arg("seed") = 0);

  py::class_<ScalarLoss>(m, "Loss")
      .def(py::init([](const std::string& name) { return loss_from_name(name); }), py::arg("name"))
      .def_property_readonly("name", [](const ScalarLoss& l) { return std::string(l.name()); })
      .def("value", &ScalarLoss::value, py::arg("z"), py::arg("y"))
      .def("derivative", &ScalarLoss::derivative, py::arg("z"), py::arg("y"))
      .def("conjugate", &ScalarLoss::conjugate, py::arg("s"), py::arg("y"))
      .def_property_readonly("smoothness", &ScalarLoss::smoothness);

  py::class_<Problem>(m, "Problem")
      .def(py::init([](std::shared_ptr<Dataset> data, const std::string& loss, std::optional<double> lambda) {
             return make_problem(std::const_pointer_cast<const Dataset>(data), loss_from_name(loss), lambda);
           }),
           py::arg("dataset"), py::arg("loss") = "smoothed-hinge", py::arg("lam") = py::none())
      .def_property_readonly("n", &Problem::n)
      .def_property_readonly("dim", &Problem::dim)
      .def_readonly("lam", &Problem::lambda)
      .def_readonly("gamma", &Problem::gamma)
      .def("primal", [](const Problem& p, const std::vector<double>& x) {
        if (x.size() != p.dim()) throw py::value_error("x has the wrong dimension");
        return primal_value(p, x);
      })
      .def("dual", [](const Problem& p, std::vector<double> coeffs) {
        if (coeffs.size() != p.n()) throw py::value_error("need one coefficient per example");
        return dual_value(p, DualState::from_coeffs(p, std::move(coeffs)));
      });

  m.def("compute_theta", &compute_theta, py::arg("gamma"), py::arg("lam"), py::arg("n"), py::arg("m"));
  m.def("dominating_factor", &dominating_factor, py::arg("n"), py::arg("m"), py::arg("gamma"), py::arg("lam"));
  m.def(
      "iteration_table",
      [](std::size_t n, std::size_t mb, double gln) { return estimates_to_dict(iteration_table({n, mb, gln})); },
      py::arg("n"), py::arg("m"), py::arg("gamma_lambda_n"));
  m.def(
      "examples_processed_table",
      [](std::size_t n, std::size_t mb, double gln) {
        return estimates_to_dict(examples_processed_table({n, mb, gln}));
      },
      py::arg("n"), py::arg("m"), py::arg("gamma_lambda_n"));

  m.def(
      "run",
      [](const Problem& problem, const std::string& algorithm, std::size_t batch, std::optional<double> theta,
         double epsilon, std::size_t max_iterations, std::uint64_t seed, std::size_t checkpoint_every,
         std::optional<double> dual_optimum) {
        SolverConfig config;
        config.algorithm = algorithm_from_name(algorithm);
        config.batch_size = batch;
        config.theta_override = theta;
        config.gap_tolerance = epsilon;
        config.max_iterations = max_iterations;
        config.seed = seed;
        config.checkpoint_every = checkpoint_every;
        RunOptions options;
        options.dual_optimum = dual_optimum;
        SolverTrace trace;
        {
          py::gil_scoped_release release;
          trace = run_solver(problem, config, options);
        }
        return trace_to_dict(trace);
      },
      py::arg("problem"), py::arg("algorithm") = "asdca", py::arg("m") = 1, py::arg("theta") = py::none(),
      py::arg("epsilon") = 1e-6, py::arg("max_iterations") = 1000000, py::arg("seed") = 0,
      py::arg("checkpoint_every") = 0, py::arg("dual_optimum") = py::none());

  m.def(
      "solve_reference",
      [](const Problem& problem, double tol) {
        const auto ref = solve_reference(problem, tol);
        py::dict d;
        d["primal"] = ref.primal;
        d["dual"] = ref.dual;
        d["x"] = ref.x;
        return d;
      },
      py::arg("problem"), py::arg("tol") = 1e-12);

  m.def(
      "verify_theorem1",
      [](const Problem& problem, std::size_t mb, std::optional<double> theta, double dual_optimum,
         std::size_t seeds) {
        Theorem1Options options;
        options.seeds = seeds;
        py::list out;
        for (const auto& e : verify_theorem1(problem, mb, theta, dual_optimum, options)) out.append(entry_to_dict(e));
        return out;
      },
      py::arg("problem"), py::arg("m"), py::arg("theta") = py::none(), py::arg("dual_optimum"),
      py::arg("seeds") = 200);

  m.def(
      "iteration_cost",
      [](const std::string& algorithm, const std::string& partition, std::size_t s, std::size_t d, double d_bar,
         std::size_t n, std::size_t mb) {
        if (partition != "features" && partition != "examples") throw py::value_error("partition must be features or examples");
        const Partition p = partition == "features" ? Partition::Features : Partition::Examples;
        return cost_to_dict(iteration_cost(algorithm_from_name(algorithm), p, ClusterSpec{s, d, d_bar, n, 0.0}, mb));
      },
      py::arg("algorithm"), py::arg("partition"), py::arg("s"), py::arg("d"), py::arg("d_bar"), py::arg("n"),
      py::arg("m") = 1);

  m.def(
      "recommend",
      [](std::size_t s, std::size_t d, double d_bar, std::size_t n, double overhead, double gamma, double lambda,
         double epsilon, std::vector<std::size_t> grid) {
        RecommendQuery q{gamma, lambda, epsilon, std::move(grid)};
        py::list out;
        for (const auto& c : recommend(ClusterSpec{s, d, d_bar, n, overhead}, q)) out.append(cost_to_dict(c));
        return out;
      },
      py::arg("s"), py::arg("d"), py::arg("d_bar"), py::arg("n"), py::arg("channel_overhead"), py::arg("gamma"),
      py::arg("lam"), py::arg("epsilon"), py::arg("m_grid"));
}
