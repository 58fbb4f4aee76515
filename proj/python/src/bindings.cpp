#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "clip/checkpoint.hpp"
#include "clip/coloring.hpp"
#include "clip/datasets.hpp"
#include "clip/error.hpp"
#include "clip/gradcheck.hpp"
#include "clip/harness.hpp"
#include "clip/model.hpp"

namespace py = pybind11;
using namespace clip;
using nlohmann::json;

namespace {

// Structured values cross the boundary as JSON text; the Python side decodes.
ClipConfig config_of(const std::string& text) { return config_from_json(json::parse(text)); }

TrainSchedule schedule_of(const std::string& text) {
  return schedule_from_json(text.empty() ? json::object() : json::parse(text));
}

Graph make_graph(const std::vector<std::vector<double>>& rows, const std::vector<Edge>& edges) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  Matrix attrs(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) throw Error(Errc::DimensionMismatch, "ragged attribute rows");
    for (std::size_t j = 0; j < cols; ++j) attrs(i, j) = rows[i][j];
  }
  return Graph::from_edges(std::move(attrs), edges);
}

std::vector<std::vector<double>> rows_of(const Matrix& m) {
  std::vector<std::vector<double>> out(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

std::vector<std::vector<int>> colors_of(const std::vector<Coloring>& cs) {
  std::vector<std::vector<int>> out;
  for (const auto& c : cs) out.push_back(c.colors);
  return out;
}

ColoringSample sample_of(const std::vector<std::vector<int>>& colors) {
  ColoringSample s;
  for (const auto& c : colors) s.colorings.push_back({c});
  return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "CLIP graph classifier core";

  py::register_exception<Error>(m, "ClipError", PyExc_ValueError);

  py::class_<Graph>(m, "Graph")
      .def(py::init(&make_graph), py::arg("attrs"), py::arg("edges"))
      .def_property_readonly("size", &Graph::size)
      .def_property_readonly("attr_dim", &Graph::attr_dim)
      .def_property_readonly("attrs", [](const Graph& g) { return rows_of(g.attrs()); })
      .def_property_readonly("edges", &Graph::edges)
      .def("adjacency", [](const Graph& g) { return rows_of(g.adjacency()); })
      .def("neighbors", [](const Graph& g, int i) { return neighbors(g, i); })
      .def("permute", [](const Graph& g, const std::vector<int>& perm) { return permute(g, perm); })
      .def("__len__", &Graph::size)
      .def("__eq__", [](const Graph& a, const Graph& b) { return a == b; });

  py::class_<LabeledDataset>(m, "Dataset")
      .def_property_readonly("graphs", [](const LabeledDataset& d) { return d.graphs; })
      .def_property_readonly("labels", [](const LabeledDataset& d) { return d.labels; })
      .def_property_readonly("name", [](const LabeledDataset& d) { return d.meta.name; })
      .def_property_readonly("num_classes", [](const LabeledDataset& d) { return d.meta.num_classes; })
      .def_property_readonly("attr_dim", [](const LabeledDataset& d) { return d.meta.attr_dim; })
      .def_property_readonly("color_dim", [](const LabeledDataset& d) { return d.meta.color_dim; })
      .def_property_readonly("generation", [](const LabeledDataset& d) { return d.meta.generation.dump(); })
      .def("__len__", &LabeledDataset::size)
      .def("__eq__", [](const LabeledDataset& a, const LabeledDataset& b) { return a == b; });

  py::class_<ClipModel>(m, "Model")
      .def_static("init", [](const std::string& config, std::uint64_t seed) {
        Rng rng(seed);
        return ClipModel::init(config_of(config), rng);
      })
      .def_static("from_json", [](const std::string& text) { return model_from_json(json::parse(text)); })
      .def_static("load", &load_model)
      .def("to_json", [](const ClipModel& m) { return model_to_json(m).dump(); })
      .def("config_json", [](const ClipModel& m) { return config_to_json(m.config).dump(); })
      .def("save", [](const ClipModel& m, const std::filesystem::path& p) { save_model(m, p); })
      .def_property_readonly("parameter_count",
                             [](const ClipModel& m) { return m.params.parameter_count(); })
      .def("forward",
           [](const ClipModel& m, const Graph& g, const std::vector<std::vector<int>>& colorings) {
             return clip_forward(m, g, sample_of(colorings));
           })
      .def("predict_logits",
           [](const ClipModel& m, const Graph& g, int eval_samples, std::uint64_t seed) {
             Rng rng(seed);
             return predict_logits(m, g, eval_samples, rng);
           })
      .def("predict", [](const ClipModel& m, const Graph& g, int eval_samples, std::uint64_t seed) {
        Rng rng(seed);
        return predict(m, g, eval_samples, rng);
      })
      .def("__eq__", [](const ClipModel& a, const ClipModel& b) { return a == b; });

  m.def("configure_for", [](const std::string& config, const LabeledDataset& d) {
    return config_to_json(configure_for(config_of(config), d.meta)).dump();
  });

  // colorings
  m.def("attribute_groups", [](const Graph& g) { return attribute_groups(g).groups; });
  m.def("coloring_count", [](const Graph& g) { return coloring_count(attribute_groups(g)).str(); });
  m.def("enumerate_colorings", [](const Graph& g, std::uint64_t cap) {
    return colors_of(enumerate_colorings(attribute_groups(g), cap));
  });
  m.def("sample_colorings", [](const Graph& g, int k, std::uint64_t seed) {
    Rng rng(seed);
    return colors_of(sample_colorings(attribute_groups(g), k, rng).colorings);
  });
  m.def("apply_coloring", [](const Graph& g, const std::vector<int>& colors, int color_dim) {
    return rows_of(apply_coloring(g, Coloring{colors}, color_dim));
  });

  // datasets
  m.def("csl_graph", &csl_graph);
  m.def("gen_property", [](const std::string& task, std::uint64_t seed, int per_class) {
    Rng rng(seed);
    return gen_property_dataset(parse_task(task), rng, per_class);
  });
  m.def("gen_csl", [](const std::vector<int>& ks, int copies, std::uint64_t seed) {
    Rng rng(seed);
    return gen_csl_dataset(ks, copies, rng);
  });
  m.attr("DEFAULT_CSL_SKIPS") =
      std::vector<int>(kDefaultCslSkips.begin(), kDefaultCslSkips.end());
  m.def("oracle_label", [](const std::string& task, const Graph& g) {
    return oracle_label(parse_task(task), g);
  });
  m.def("load_tu", [](const std::filesystem::path& root, std::string name) {
    if (name.empty()) name = find_tu_name(root);
    return parse_tu_dataset(root, name);
  });
  m.def("save_tu", [](const LabeledDataset& d, const std::filesystem::path& root,
                      const std::string& name, bool node_labels) {
    serialize_tu_dataset(d, root, name, node_labels ? NodeLabels::Write : NodeLabels::Omit);
  });
  m.def("stratified_folds", [](const LabeledDataset& d, int folds, std::uint64_t seed) {
    Rng rng(seed);
    return stratified_folds(d, folds, rng).folds;
  });

  // harness
  m.def("train", [](const std::string& config, const std::string& schedule, const LabeledDataset& d,
                    const std::vector<int>& train_idx, const std::vector<int>& eval_idx,
                    std::uint64_t seed) {
    const ClipConfig c = config_of(config);
    const TrainSchedule s = schedule_of(schedule);
    Rng rng(seed);
    TrainOutcome out;
    {
      py::gil_scoped_release release;
      out = train(c, s, d, train_idx, eval_idx, rng);
    }
    json j = {{"initial_accuracy", out.initial_accuracy},
              {"eval_curve", out.eval_curve},
              {"train_loss", out.train_loss},
              {"stopped_early", out.stopped_early}};
    return py::make_tuple(out.model, j.dump());
  });
  m.def("cross_validate", [](const std::string& config, const std::string& schedule,
                             const LabeledDataset& d, std::uint64_t seed, int folds, int threads) {
    const ClipConfig c = config_of(config);
    const TrainSchedule s = schedule_of(schedule);
    Rng rng(seed);
    CvResult r;
    {
      py::gil_scoped_release release;
      r = cross_validate(c, s, d, rng, folds, threads);
    }
    return cv_to_json(r).dump();
  });
  m.def("gradcheck", [](int configs, std::uint64_t seed, const std::string& activation) {
    GradcheckOptions o;
    o.configs = configs;
    o.seed = seed;
    o.activation = parse_activation(activation);
    const GradcheckReport r = run_gradcheck(o);
    return json{{"configs", r.configs},
                {"skipped_ties", r.skipped_ties},
                {"entries", r.entries},
                {"failures", r.failures},
                {"max_rel_error", r.max_rel_error},
                {"passed", r.passed()}}
        .dump();
  });
  m.def("default_thread_count", &default_thread_count);
}
