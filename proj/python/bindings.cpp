#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "pgdetect/baselines.hpp"
#include "pgdetect/experiment.hpp"
#include "pgdetect/features.hpp"
#include "pgdetect/metrics.hpp"
#include "pgdetect/synth.hpp"
#include "pgdetect/training.hpp"

namespace py = pybind11;
using namespace pgd;

namespace {

using Array2 = py::array_t<double, py::array::c_style | py::array::forcecast>;
using Labels = py::array_t<int, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array2& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D feature array");
  const auto rows = static_cast<std::size_t>(a.shape(0)), cols = static_cast<std::size_t>(a.shape(1));
  return Matrix(rows, cols, std::vector<double>(a.data(), a.data() + rows * cols));
}

py::array_t<double> from_matrix(const Matrix& m) {
  py::array_t<double> out({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

DatasetTable to_table(const Array2& x, const Labels& y, std::vector<std::string> names) {
  DatasetTable t;
  t.features = to_matrix(x);
  if (names.empty()) {
    for (std::size_t c = 0; c < t.cols(); ++c) names.push_back("f" + std::to_string(c));
  }
  t.feature_names = std::move(names);
  t.labels.assign(y.data(), y.data() + y.size());
  t.validate();
  return t;
}

py::dict table_dict(const DatasetTable& t) {
  py::dict d;
  d["feature_names"] = t.feature_names;
  d["features"] = from_matrix(t.features);
  d["labels"] = py::array_t<int>(static_cast<py::ssize_t>(t.labels.size()), t.labels.data());
  return d;
}

py::dict report_dict(const EvalReport& r) {
  py::dict d;
  d["accuracy"] = r.accuracy;
  d["f1"] = r.f1;
  d["roc_auc"] = r.roc_auc;
  d["pr_auc"] = r.pr_auc;
  d["confusion"] = py::dict(py::arg("tp") = r.confusion.tp, py::arg("fp") = r.confusion.fp,
                            py::arg("tn") = r.confusion.tn, py::arg("fn") = r.confusion.fn);
  return d;
}

ExperimentConfig config_from(const std::string& json_text, bool needs_source = true) {
  ExperimentConfig cfg;
  if (!json_text.empty()) cfg.merge_json(nlohmann::json::parse(json_text));
  if (needs_source) {
    cfg.validate();
  } else {
    cfg.train.validate();
  }
  return cfg;
}

std::shared_ptr<Classifier> own(std::unique_ptr<Classifier> c) { return std::shared_ptr<Classifier>(std::move(c)); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Problem-gambling detection: PGN4 network, baselines, feature selection and metrics";

  py::register_exception<ContainerError>(m, "ContainerError", PyExc_ValueError);

  m.def(
      "generate",
      [](const std::string& name, std::uint64_t seed) {
        const auto d = generate(preset(name, seed));
        auto out = table_dict(d.table);
        out["reason_codes"] = d.reason_codes;
        out["signal_columns"] = d.signal_columns;
        return out;
      },
      py::arg("preset"), py::arg("seed") = 0);

  m.def(
      "load_csv",
      [](const std::filesystem::path& path, const std::string& label, const std::vector<std::string>& exclude) {
        CsvOptions opts;
        opts.label_column = label;
        opts.exclude_columns = exclude;
        return table_dict(load_csv(path, opts));
      },
      py::arg("path"), py::arg("label") = "flag", py::arg("exclude") = std::vector<std::string>{"rg_reason"});

  m.def(
      "pearson",
      [](const std::vector<double>& x, const std::vector<double>& y) { return pearson(x, y).r; }, py::arg("x"),
      py::arg("y"));

  m.def(
      "correlation_report",
      [](const Array2& x, const Labels& y, std::vector<std::string> names) {
        const auto rep = correlation_report(to_table(x, y, std::move(names)));
        py::dict d;
        d["feature_names"] = rep.feature_names;
        d["flag_corr"] = rep.flag_corr;
        d["degenerate"] = rep.degenerate;
        d["pairwise"] = from_matrix(rep.pairwise);
        return d;
      },
      py::arg("features"), py::arg("labels"), py::arg("feature_names") = std::vector<std::string>{});

  m.def(
      "select_features",
      [](const Array2& x, const Labels& y, std::size_t n, std::vector<std::string> names, bool signed_rank) {
        const auto rep = correlation_report(to_table(x, y, std::move(names)));
        return select_and_arrange(rep, n, signed_rank ? RankBy::Signed : RankBy::Absolute).ordered_names;
      },
      py::arg("features"), py::arg("labels"), py::arg("n"), py::arg("feature_names") = std::vector<std::string>{},
      py::arg("signed_rank") = false);

  m.def(
      "evaluate",
      [](const std::vector<double>& scores, const std::vector<int>& labels, double threshold) {
        return report_dict(evaluate(scores, labels, threshold));
      },
      py::arg("scores"), py::arg("labels"), py::arg("threshold") = 0.5);

  py::class_<Classifier, std::shared_ptr<Classifier>>(m, "Model")
      .def_property_readonly("method", &Classifier::method)
      .def(
          "score",
          [](const Classifier& c, const Array2& x) {
            const auto s = c.score(to_matrix(x));
            return py::array_t<double>(static_cast<py::ssize_t>(s.size()), s.data());
          },
          py::arg("features"))
      .def("save", &Classifier::save, py::arg("path"));

  m.def(
      "train_model",
      [](const std::string& method, const Array2& x, const Labels& y, std::uint64_t seed,
         const std::string& config_json) {
        const auto cfg = config_from(config_json, false);
        const auto table = to_table(x, y, {});
        py::gil_scoped_release release;
        return own(fit_method(method, table, DatasetTable{}, cfg, seed));
      },
      py::arg("method"), py::arg("features"), py::arg("labels"), py::arg("seed") = 0, py::arg("config_json") = "");

  m.def(
      "load_model", [](const std::filesystem::path& path) { return own(load_classifier(path)); }, py::arg("path"));

  m.def(
      "run_sweep",
      [](const std::string& config_json, const std::optional<std::filesystem::path>& out_dir) {
        const auto cfg = config_from(config_json);
        const auto data = load_experiment_data(cfg);
        std::string grid;
        {
          py::gil_scoped_release release;
          grid = grid_json(run_sweep(cfg, data, out_dir)).dump();
        }
        return grid;
      },
      py::arg("config_json"), py::arg("out_dir") = std::nullopt);

  m.def(
      "gradient_check",
      [](std::size_t input_length, std::size_t batch, std::uint64_t seed, double h) {
        Rng rng(seed);
        const auto net = pgn4_init(input_length, rng);
        const Tensor3 x(batch, 1, input_length, rng.normal_vector(batch * input_length, 0, 1));
        std::vector<int> labels;
        for (std::size_t i = 0; i < batch; ++i) labels.push_back(static_cast<int>(i % 2));
        const auto rep = gradient_check(net, x, labels, h, 1e-4);
        py::dict errors;
        for (const auto& e : rep.entries) errors[py::str(e.name)] = e.relative_error;
        return py::make_tuple(rep.max_relative_error, errors);
      },
      py::arg("input_length") = 12, py::arg("batch") = 4, py::arg("seed") = 0, py::arg("h") = 1e-5);

  m.def("flatten_width", &pgn4_flatten_width, py::arg("input_length"));
}
