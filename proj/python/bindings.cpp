#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fabolas/acquisition.hpp"
#include "fabolas/benchmarks.hpp"
#include "fabolas/experiment.hpp"
#include "fabolas/strategies.hpp"

namespace py = pybind11;
using namespace fabolas;

namespace {

py::dict row_dict(const RecordRow& r) {
  py::dict d;
  d["iteration"] = r.iteration;
  d["x"] = std::vector<double>(r.x.data(), r.x.data() + r.x.size());
  d["s"] = r.s;
  d["y"] = r.y;
  d["z"] = r.z;
  d["overhead_seconds"] = r.overhead;
  d["elapsed_seconds"] = r.elapsed;
  d["failed"] = r.failed;
  if (r.incumbent)
    d["incumbent"] = std::vector<double>(r.incumbent->data(), r.incumbent->data() + r.incumbent->size());
  else
    d["incumbent"] = py::none();
  d["predicted_incumbent_loss"] = r.predicted_incumbent_loss ? py::cast(*r.predicted_incumbent_loss) : py::none();
  d["true_loss"] = r.true_loss ? py::cast(*r.true_loss) : py::none();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bindings for the fabolas C++ core";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<EvaluationFailure>(m, "EvaluationFailure", PyExc_RuntimeError);

  m.def("strategy_names", &strategy_names);

  m.def("branin", &branin, py::arg("x1"), py::arg("x2"));
  m.def(
      "synthetic_eval",
      [](const Eigen::VectorXd& x, double s, std::optional<std::uint64_t> seed) {
        const ObjectiveResult r = synthetic_mf_eval(x, s, seed);
        return py::make_tuple(r.loss, r.cost);
      },
      py::arg("x"), py::arg("s"), py::arg("noise_seed") = py::none(),
      "(loss, cost) of the synthetic multi-fidelity benchmark");
  m.attr("SYNTHETIC_OPTIMUM") = kSyntheticOptimum;

  m.def("expected_improvement", &expected_improvement, py::arg("mean"), py::arg("variance"), py::arg("f_min"));

  m.def(
      "hyperband_brackets",
      [](double R, double eta) {
        py::list out;
        for (const auto& b : hyperband_brackets(R, eta)) {
          py::list rungs;
          for (const auto& r : b.rungs) rungs.append(py::make_tuple(r.n_configs, r.resource));
          out.append(py::dict(py::arg("s") = b.s, py::arg("n_configs") = b.n_configs,
                              py::arg("initial_resource") = b.initial_resource, py::arg("rungs") = rungs));
        }
        return out;
      },
      py::arg("R"), py::arg("eta") = 3.0);

  m.def(
      "make_surrogate",
      [](const std::string& path, std::uint64_t seed) { save_surrogate_csv(make_svm_like_surrogate(seed), path); },
      py::arg("path"), py::arg("seed") = 0, "write the SVM-like surrogate table as CSV");

  m.def(
      "normalize_config", [](const std::string& text) { return serialize_config(parse_config(text)); },
      py::arg("config_json"), "parse, validate and re-serialize an experiment configuration");

  m.def(
      "run_experiment",
      [](const std::string& config_json) {
        const ExperimentConfig c = parse_config(config_json);
        py::gil_scoped_release release;
        return run_experiment(c);
      },
      py::arg("config_json"), "run every configured seed; returns the record file paths");

  m.def(
      "read_record",
      [](const std::string& path) {
        const ExperimentRecord r = read_record(path);
        py::list rows;
        for (const auto& row : r.rows) rows.append(row_dict(row));
        return py::dict(py::arg("strategy") = r.strategy, py::arg("seed") = r.seed, py::arg("rows") = rows);
      },
      py::arg("path"));

  m.def(
      "report_csv",
      [](const std::vector<std::string>& paths, std::optional<std::vector<double>> times, int grid_points) {
        std::vector<ExperimentRecord> records;
        for (const auto& p : paths) records.push_back(read_record(p));
        const std::vector<double> grid = times ? *times : default_grid(records, grid_points);
        return report_csv(report(records, grid));
      },
      py::arg("paths"), py::arg("times") = py::none(), py::arg("grid_points") = 30);

  m.def("percentile", &percentile, py::arg("values"), py::arg("q"));
}
