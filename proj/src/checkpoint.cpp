#include "clip/checkpoint.hpp"

#include <fstream>
#include <string>

#include "clip/error.hpp"

namespace clip {

using nlohmann::json;

json mlp_to_json(const MlpParams& p) {
  json layers = json::array();
  for (const Dense& d : p.layers) {
    std::vector<double> w;
    w.reserve(d.weight.size());
    for (int o = 0; o < d.out(); ++o) {
      for (int i = 0; i < d.in(); ++i) w.push_back(d.weight(i, o));
    }
    layers.push_back({{"in", d.in()}, {"out", d.out()}, {"weight", w}, {"bias", d.bias}});
  }
  return {{"activation", std::string(activation_name(p.activation))}, {"layers", layers}};
}

MlpParams mlp_from_json(const json& j) {
  try {
    MlpParams p;
    p.activation = parse_activation(j.at("activation").get<std::string>());
    for (const auto& l : j.at("layers")) {
      const int in = l.at("in").get<int>();
      const int out = l.at("out").get<int>();
      const auto w = l.at("weight").get<std::vector<double>>();
      auto bias = l.at("bias").get<std::vector<double>>();
      if (in < 1 || out < 1 || w.size() != static_cast<std::size_t>(in) * out ||
          bias.size() != static_cast<std::size_t>(out)) {
        throw Error(Errc::BadCheckpoint, "layer shape does not match its entries");
      }
      Dense d{Matrix(in, out), std::move(bias)};
      for (int o = 0; o < out; ++o) {
        for (int i = 0; i < in; ++i) d.weight(i, o) = w[static_cast<std::size_t>(o) * in + i];
      }
      p.layers.push_back(std::move(d));
    }
    p.validate();
    if (!p.all_finite()) throw Error(Errc::BadCheckpoint, "non-finite parameter");
    return p;
  } catch (const json::exception& e) {
    throw Error(Errc::BadCheckpoint, e.what());
  }
}

json config_to_json(const ClipConfig& c) {
  return {{"hops", c.hops},
          {"colorings", c.colorings},
          {"hidden", c.hidden},
          {"attr_dim", c.attr_dim},
          {"color_dim", c.color_dim},
          {"num_classes", c.num_classes},
          {"eval_samples", c.eval_samples},
          {"mlp_layers", c.mlp_layers},
          {"activation", std::string(activation_name(c.activation))},
          {"jumping_knowledge", c.jumping_knowledge},
          {"enumeration_cap", c.enumeration_cap}};
}

ClipConfig config_from_json(const json& j) {
  ClipConfig c;
  try {
    c.hops = j.value("hops", c.hops);
    c.colorings = j.value("colorings", c.colorings);
    c.hidden = j.value("hidden", c.hidden);
    c.attr_dim = j.value("attr_dim", c.attr_dim);
    c.color_dim = j.value("color_dim", c.color_dim);
    c.num_classes = j.value("num_classes", c.num_classes);
    c.eval_samples = j.value("eval_samples", c.eval_samples);
    c.mlp_layers = j.value("mlp_layers", c.mlp_layers);
    if (j.contains("activation")) c.activation = parse_activation(j.at("activation").get<std::string>());
    c.jumping_knowledge = j.value("jumping_knowledge", c.jumping_knowledge);
    c.enumeration_cap = j.value("enumeration_cap", c.enumeration_cap);
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidConfig, e.what());
  }
  return c;
}

json model_to_json(const ClipModel& m) {
  json hops = json::array();
  for (const auto& h : m.params.hops) {
    hops.push_back({{"phi", mlp_to_json(h.phi)}, {"psi", mlp_to_json(h.psi)}});
  }
  return {{"format", "clip-model"},
          {"version", kCheckpointVersion},
          {"config", config_to_json(m.config)},
          {"hops", hops},
          {"readout", mlp_to_json(m.params.readout)},
          {"head", mlp_to_json(m.params.head)}};
}

ClipModel model_from_json(const json& j) {
  try {
    if (j.value("format", "") != "clip-model") throw Error(Errc::BadCheckpoint, "not a clip model");
    if (j.value("version", 0) != kCheckpointVersion) {
      throw Error(Errc::BadCheckpoint, "unsupported checkpoint version");
    }
    ClipModel m;
    m.config = config_from_json(j.at("config"));
    m.config.validate();
    for (const auto& h : j.at("hops")) {
      m.params.hops.push_back({mlp_from_json(h.at("phi")), mlp_from_json(h.at("psi"))});
    }
    m.params.readout = mlp_from_json(j.at("readout"));
    m.params.head = mlp_from_json(j.at("head"));

    // Shapes must agree with what the config would build.
    Rng probe(0);
    const ClipModel fresh = ClipModel::init(m.config, probe);
    const auto want = fresh.params.tensors();
    const auto have = m.params.tensors();
    bool ok = want.size() == have.size();
    for (std::size_t t = 0; ok && t < want.size(); ++t) ok = want[t].size() == have[t].size();
    if (!ok) throw Error(Errc::BadCheckpoint, "parameter shapes do not match the config");
    return m;
  } catch (const json::exception& e) {
    throw Error(Errc::BadCheckpoint, e.what());
  }
}

void save_model(const ClipModel& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::MissingFile, "cannot write " + path.string());
  out << model_to_json(m).dump() << '\n';
}

ClipModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::MissingFile, "cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(Errc::BadCheckpoint, e.what());
  }
  return model_from_json(j);
}

}  // namespace clip
