#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "warden/codec.hpp"
#include "warden/dataset_sink.hpp"
#include "warden/error.hpp"
#include "warden/evaluation.hpp"
#include "warden/mining.hpp"
#include "warden/preprocess.hpp"
#include "warden/warehouse.hpp"
#include "warden/watcher.hpp"

namespace py = pybind11;
using namespace warden;

namespace {

using Matrix = std::vector<std::vector<double>>;

LabeledDataset to_dataset(const Matrix& x, const std::vector<int>& y, std::vector<std::string> names) {
  if (x.size() != y.size()) throw ValidationError("X and y differ in length");
  const std::size_t width = x.empty() ? names.size() : x.front().size();
  LabeledDataset ds;
  ds.features = FeatureMatrix(0, width);
  for (const auto& row : x) ds.features.append_row(row);
  ds.labels = y;
  if (names.empty()) {
    for (std::size_t f = 0; f < width; ++f) names.push_back("x" + std::to_string(f));
  }
  if (names.size() != width) throw ValidationError("feature_names does not match the row width");
  ds.feature_names = std::move(names);
  return ds;
}

Matrix to_rows(const FeatureMatrix& m) {
  Matrix out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out[i].assign(m.row(i).begin(), m.row(i).end());
  return out;
}

FeatureMatrix to_features(const Matrix& x) {
  FeatureMatrix m(0, x.empty() ? 0 : x.front().size());
  for (const auto& row : x) m.append_row(row);
  return m;
}

ConfusionMatrix to_confusion(const std::array<std::array<std::size_t, 2>, 2>& cells) {
  ConfusionMatrix m;
  m.cells = cells;
  return m;
}

py::object json_to_py(const nlohmann::ordered_json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_warden, m) {
  m.doc() = "Warehouse, dataset codecs, CART/forest learners and evaluation";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<DecodeError>(m, "DecodeError", PyExc_ValueError);
  py::register_exception<UntrainableData>(m, "UntrainableData", base.ptr());

  py::enum_<Gender>(m, "Gender").value("Male", Gender::Male).value("Female", Gender::Female);

  py::class_<CustomerRecord>(m, "CustomerRecord")
      .def(py::init([](UserId user_id, Gender gender, int age, std::int64_t estimated_salary, int purchased) {
             return CustomerRecord{user_id, gender, age, estimated_salary, purchased};
           }),
           py::arg("user_id"), py::arg("gender"), py::arg("age"), py::arg("estimated_salary"), py::arg("purchased"))
      .def_readwrite("user_id", &CustomerRecord::user_id)
      .def_readwrite("gender", &CustomerRecord::gender)
      .def_readwrite("age", &CustomerRecord::age)
      .def_readwrite("estimated_salary", &CustomerRecord::estimated_salary)
      .def_readwrite("purchased", &CustomerRecord::purchased)
      .def("validate", [](const CustomerRecord& r) { validate(r); })
      .def(py::self == py::self)
      .def("__repr__", [](const CustomerRecord& r) { return "CustomerRecord(" + format_csv_row(r) + ")"; });

  m.def("format_csv_row", &format_csv_row);
  m.def("encode_csv", [](const std::vector<CustomerRecord>& rows) {
    DatasetSnapshot s;
    merge_rows(s.rows, rows);
    return encode_csv(s);
  }, "Canonical CSV (sorted by user_id) of the given rows.");
  m.def("decode_csv", [](const std::string& text) { return decode_csv(text).rows; });
  m.def("encode_json", [](const std::vector<CustomerRecord>& rows) {
    DatasetSnapshot s;
    merge_rows(s.rows, rows);
    return encode_json(s);
  });

  py::class_<ChangeEntry>(m, "ChangeEntry")
      .def_readonly("version", &ChangeEntry::version)
      .def_readonly("record", &ChangeEntry::record)
      .def_property_readonly("kind", [](const ChangeEntry& e) { return std::string(to_string(e.kind)); });

  py::class_<Warehouse>(m, "Warehouse")
      .def(py::init<>())
      .def(py::init<std::filesystem::path>(), py::arg("log_path"))
      .def("upsert_record", &Warehouse::upsert_record)
      .def("seed_from_fixture", &Warehouse::seed_from_fixture)
      .def("changes_since", &Warehouse::changes_since, py::arg("cursor"), py::arg("limit") = 500)
      .def("latest_version", &Warehouse::latest_version)
      .def("records", &Warehouse::records);

  m.def("select_features", [](const std::vector<CustomerRecord>& rows) {
    DatasetSnapshot s;
    merge_rows(s.rows, rows);
    auto ds = select_features(s);
    return py::make_tuple(to_rows(ds.features), ds.labels, ds.feature_names);
  }, "Returns (X, y, feature_names) with features [Age, EstimatedSalary].");
  m.def("train_test_split", [](std::size_t n, double test_fraction, std::uint64_t seed) {
    LabeledDataset ds;
    ds.features = FeatureMatrix(n, 1);
    ds.labels.assign(n, 0);
    auto split = train_test_split(ds, {test_fraction, seed});
    return py::make_tuple(split.train_indices, split.test_indices);
  }, py::arg("n"), py::arg("test_fraction") = 0.3, py::arg("seed") = 0,
     "Returns (train_indices, test_indices) for n rows.");
  m.def("fit_standardizer", [](const Matrix& x) {
    auto s = fit_standardizer(to_dataset(x, std::vector<int>(x.size(), 0), {}));
    return py::make_tuple(s.means, s.std_devs);
  });
  m.def("standardize", [](const Matrix& x, const std::vector<double>& means, const std::vector<double>& std_devs) {
    return to_rows(transform(to_dataset(x, std::vector<int>(x.size(), 0), {}), {means, std_devs}).features);
  });
  m.def("discretize", [](const Matrix& x, int bins) {
    return to_rows(discretize(to_dataset(x, std::vector<int>(x.size(), 0), {}), bins).features);
  });

  m.def("gini", [](std::vector<std::size_t> counts) { return gini(counts); });

  py::class_<DecisionTreeModel>(m, "DecisionTree")
      .def("predict", [](const DecisionTreeModel& t, const std::vector<double>& row) { return t.predict(row); })
      .def("predict_all", [](const DecisionTreeModel& t, const Matrix& x) { return predict_all(t, to_features(x)); })
      .def_property_readonly("depth", &DecisionTreeModel::depth)
      .def_property_readonly("leaf_count", &DecisionTreeModel::leaf_count)
      .def_readonly("feature_names", &DecisionTreeModel::feature_names)
      .def("render", &render_tree_text)
      .def("digest", &model_digest)
      .def("to_json", [](const DecisionTreeModel& t) { return tree_to_json(t).dump(); })
      .def_static("from_json", [](const std::string& s) { return tree_from_json(nlohmann::json::parse(s)); });

  m.def("build_tree",
        [](const Matrix& x, const std::vector<int>& y, std::vector<std::string> names, std::optional<int> max_depth,
           int min_samples_split, int min_samples_leaf) {
          return build_tree(to_dataset(x, y, std::move(names)), {max_depth, min_samples_split, min_samples_leaf});
        },
        py::arg("X"), py::arg("y"), py::arg("feature_names") = std::vector<std::string>{},
        py::arg("max_depth") = py::none(), py::arg("min_samples_split") = 2, py::arg("min_samples_leaf") = 1);

  m.def("tune_tree",
        [](const Matrix& x, const std::vector<int>& y, std::vector<std::string> names, std::size_t folds,
           std::uint64_t seed) {
          auto r = tune_tree(to_dataset(x, y, std::move(names)), TuneGrid::defaults(), folds, seed);
          py::dict best;
          best["max_depth"] = r.best.max_depth ? py::object(py::int_(*r.best.max_depth)) : py::none();
          best["min_samples_split"] = r.best.min_samples_split;
          best["min_samples_leaf"] = r.best.min_samples_leaf;
          return py::make_tuple(best, r.model, r.cv_accuracy);
        },
        py::arg("X"), py::arg("y"), py::arg("feature_names") = std::vector<std::string>{}, py::arg("folds") = 5,
        py::arg("seed") = 0, "Grid search by k-fold CV. Returns (best_params, model, cv_accuracy).");

  py::class_<ForestModel>(m, "Forest")
      .def("predict", [](const ForestModel& f, const std::vector<double>& row) { return predict_forest(f, row); })
      .def("predict_all", [](const ForestModel& f, const Matrix& x) { return predict_all(f, to_features(x)); })
      .def_property_readonly("n_trees", [](const ForestModel& f) { return f.trees.size(); })
      .def_property_readonly("trees", [](const ForestModel& f) { return f.trees; });

  m.def("build_forest",
        [](const Matrix& x, const std::vector<int>& y, std::size_t n_trees, bool bootstrap, std::size_t max_features,
           std::uint64_t seed) {
          ForestParams p;
          p.n_trees = n_trees;
          p.bootstrap = bootstrap;
          p.max_features = max_features;
          p.seed = seed;
          return build_forest(to_dataset(x, y, {}), p);
        },
        py::arg("X"), py::arg("y"), py::arg("n_trees") = 100, py::arg("bootstrap") = true,
        py::arg("max_features") = 1, py::arg("seed") = 0);

  m.def("confusion", [](const std::vector<int>& t, const std::vector<int>& p) { return confusion(t, p).cells; });
  m.def("report", [](const std::array<std::array<std::size_t, 2>, 2>& cells) {
    return json_to_py(report_to_json(report(to_confusion(cells))));
  });
  m.def("render_report", [](const std::array<std::array<std::size_t, 2>, 2>& cells) {
    return render_report_text(report(to_confusion(cells)));
  });
  m.def("errors_from_predictions", [](const std::vector<int>& t, const std::vector<int>& p) {
    auto e = errors_from_predictions(t, p);
    return py::make_tuple(e.mae, e.mse, e.rmse);
  }, "Returns (mae, mse, rmse).");

  m.def("retrain", [](const std::vector<CustomerRecord>& rows) {
    DatasetSnapshot s;
    merge_rows(s.rows, rows);
    return json_to_py(pattern_report_to_json(retrain_pipeline(s, {}, nullptr).report));
  }, "Runs the full retrain pipeline with default settings and returns the pattern report.");
}
