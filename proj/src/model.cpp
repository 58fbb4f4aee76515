#include "clip/model.hpp"

#include <algorithm>
#include <string>

#include "clip/error.hpp"

namespace clip {

namespace {

std::vector<int> mlp_dims(int in, int hidden, int layers) {
  std::vector<int> dims{in};
  dims.insert(dims.end(), static_cast<std::size_t>(layers), hidden);
  return dims;
}

// Column sums, rows visited in ascending order.
void add_column_sums(const Matrix& x, std::span<double> out) {
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = x.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) out[c] += row[c];
  }
}

// Readout slice [offset, offset + width) owned by hop t (JK layout: hop 0 is
// the colored input, hop t >= 1 the output of round t).
struct Slice {
  std::size_t offset;
  std::size_t width;
};

Slice readout_slice(const ClipConfig& cfg, int t) {
  if (!cfg.jumping_knowledge) return {0, static_cast<std::size_t>(cfg.hidden)};
  if (t == 0) return {0, static_cast<std::size_t>(cfg.input_dim())};
  return {static_cast<std::size_t>(cfg.input_dim() + (t - 1) * cfg.hidden),
          static_cast<std::size_t>(cfg.hidden)};
}

}  // namespace

void ClipConfig::validate() const {
  auto fail = [](const std::string& why) { throw Error(Errc::InvalidConfig, why); };
  if (hops < 1) fail("at least one aggregation round is required");
  if (colorings < kAllColorings) fail("colorings must be >= 0 or kAllColorings");
  if (hidden < 1) fail("hidden width must be positive");
  if (attr_dim < 1) fail("attribute width must be positive");
  if (color_dim < 0) fail("color_dim must be non-negative");
  if (colorings == 0 && color_dim != 0) fail("uncolored models take color_dim 0");
  if (colorings != 0 && color_dim == 0) fail("colored models need color_dim >= 1");
  if (num_classes < 1) fail("num_classes must be positive");
  if (eval_samples < 1) fail("eval_samples must be positive");
  if (mlp_layers < 1) fail("mlp_layers must be positive");
}

int ClipConfig::readout_dim() const noexcept {
  return jumping_knowledge ? input_dim() + hops * hidden : hidden;
}

ClipParams ClipParams::zeros_like() const {
  ClipParams z = *this;
  z.set_zero();
  return z;
}

void ClipParams::set_zero() {
  for (auto& h : hops) {
    h.phi.set_zero();
    h.psi.set_zero();
  }
  readout.set_zero();
  head.set_zero();
}

std::size_t ClipParams::parameter_count() const noexcept {
  std::size_t total = readout.parameter_count() + head.parameter_count();
  for (const auto& h : hops) total += h.phi.parameter_count() + h.psi.parameter_count();
  return total;
}

std::vector<std::span<double>> ClipParams::tensors() {
  std::vector<std::span<double>> out;
  auto append = [&](MlpParams& p) {
    auto t = p.tensors();
    out.insert(out.end(), t.begin(), t.end());
  };
  for (auto& h : hops) {
    append(h.phi);
    append(h.psi);
  }
  append(readout);
  append(head);
  return out;
}

std::vector<std::span<const double>> ClipParams::tensors() const {
  std::vector<std::span<const double>> out;
  auto append = [&](const MlpParams& p) {
    auto t = p.tensors();
    out.insert(out.end(), t.begin(), t.end());
  };
  for (const auto& h : hops) {
    append(h.phi);
    append(h.psi);
  }
  append(readout);
  append(head);
  return out;
}

ClipModel ClipModel::init(const ClipConfig& config, Rng& rng) {
  config.validate();
  ClipModel m;
  m.config = config;
  int width = config.input_dim();
  for (int t = 0; t < config.hops; ++t) {
    HopParams hop;
    hop.phi = MlpParams::init(mlp_dims(width, config.hidden, config.mlp_layers),
                              config.activation, rng);
    hop.psi = MlpParams::init(mlp_dims(width + config.hidden, config.hidden, config.mlp_layers),
                              config.activation, rng);
    m.params.hops.push_back(std::move(hop));
    width = config.hidden;
  }
  m.params.readout = MlpParams::init(
      mlp_dims(config.readout_dim(), config.hidden, config.mlp_layers), config.activation, rng);
  const std::vector<int> head_dims{config.hidden, config.num_classes};
  m.params.head = MlpParams::init(head_dims, config.activation, rng);
  return m;
}

std::vector<double> node_aggregation(const MlpParams& phi, const MlpParams& psi,
                                     std::span<const double> x,
                                     std::span<const std::vector<double>> neighbor_xs) {
  if (static_cast<int>(x.size()) + phi.out_dim() != psi.in_dim()) {
    throw Error(Errc::DimensionMismatch, "psi input width must equal |x| + phi output width");
  }
  std::vector<std::vector<double>> sorted(neighbor_xs.begin(), neighbor_xs.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> u(x.begin(), x.end());
  u.resize(x.size() + static_cast<std::size_t>(phi.out_dim()), 0.0);
  if (!sorted.empty()) {
    Matrix ys(sorted.size(), x.size());
    for (std::size_t r = 0; r < sorted.size(); ++r) {
      if (sorted[r].size() != x.size()) {
        throw Error(Errc::DimensionMismatch, "neighbor width differs from node width");
      }
      std::copy(sorted[r].begin(), sorted[r].end(), ys.row(r).begin());
    }
    const Matrix phis = mlp_forward_rows(phi, ys);
    add_column_sums(phis, std::span<double>(u).subspan(x.size()));
  }
  return mlp_forward(psi, u);
}

namespace {

struct ForwardSetup {
  bool colored = false;
  Partition part;
  std::size_t branches = 1;
};

ForwardSetup prepare(const ClipModel& model, const Graph& g, const ColoringSample& sample) {
  const ClipConfig& cfg = model.config;
  if (g.attr_dim() != cfg.attr_dim) {
    throw Error(Errc::DimensionMismatch, "graph attribute width " + std::to_string(g.attr_dim()) +
                                             " != model " + std::to_string(cfg.attr_dim));
  }
  ForwardSetup s;
  s.colored = cfg.colorings != 0;
  if (s.colored) {
    if (sample.colorings.empty()) throw Error(Errc::ColoringMismatch, "empty coloring sample");
    s.part = attribute_groups(g);
    if (cfg.color_dim < s.part.max_group_size()) {
      throw Error(Errc::ColorDimTooSmall, "color_dim " + std::to_string(cfg.color_dim) +
                                              " < largest attribute group " +
                                              std::to_string(s.part.max_group_size()));
    }
    s.branches = sample.colorings.size();
  }
  return s;
}

}  // namespace

// One coloring branch: colored initialization, T rounds, node sums into `r`.
// `hop_tapes` is null or sized cfg.hops.
template <class HopTape>
static void run_branch(const ClipModel& model, const Graph& g, const Matrix& x0,
                       std::span<double> r, HopTape* hop_tapes) {
  const ClipConfig& cfg = model.config;
  const int n = g.size();
  std::fill(r.begin(), r.end(), 0.0);
  if (cfg.jumping_knowledge) {
    const Slice s = readout_slice(cfg, 0);
    add_column_sums(x0, r.subspan(s.offset, s.width));
  }
  Matrix x = x0;
  Matrix u;
  for (int t = 0; t < cfg.hops; ++t) {
    const HopParams& hop = model.params.hops[t];
    HopTape* ht = hop_tapes ? &hop_tapes[t] : nullptr;
    const Matrix phi = mlp_forward_rows(hop.phi, x, ht ? &ht->phi : nullptr);
    const std::size_t width = x.cols();
    const std::size_t h = phi.cols();
    u.reset(static_cast<std::size_t>(n), width + h);
    for (int i = 0; i < n; ++i) {
      double* ui = u.row(i).data();
      const auto xi = x.row(i);
      std::copy(xi.begin(), xi.end(), ui);
      double* si = ui + width;
      for (int j : g.neighbors_of(i)) {
        const double* pj = phi.row(j).data();
        for (std::size_t c = 0; c < h; ++c) si[c] += pj[c];
      }
    }
    x = mlp_forward_rows(hop.psi, u, ht ? &ht->psi : nullptr);
    if (cfg.jumping_knowledge) {
      const Slice s = readout_slice(cfg, t + 1);
      add_column_sums(x, r.subspan(s.offset, s.width));
    }
  }
  if (!cfg.jumping_knowledge) add_column_sums(x, r);
}

std::vector<double> clip_forward(const ClipModel& model, const Graph& g,
                                 const ColoringSample& sample, ClipTape* tape) {
  const ClipConfig& cfg = model.config;
  const ForwardSetup setup = prepare(model, g, sample);
  if (tape) {
    tape->model_ = &model;
    tape->graph_ = &g;
    tape->branches_.assign(setup.branches, {});
    tape->recorded_ = false;
  }

  const std::size_t rdim = static_cast<std::size_t>(cfg.readout_dim());
  std::vector<double> best(rdim, 0.0);
  std::vector<int> winner(rdim, 0);
  std::vector<double> r(rdim);
  for (std::size_t b = 0; b < setup.branches; ++b) {
    const Matrix x0 = setup.colored
                          ? apply_coloring(g, setup.part, sample.colorings[b], cfg.color_dim)
                          : g.attrs();
    ClipTape::Hop* hop_tapes = nullptr;
    if (tape) {
      tape->branches_[b].hops.resize(static_cast<std::size_t>(cfg.hops));
      hop_tapes = tape->branches_[b].hops.data();
    }
    run_branch(model, g, x0, r, hop_tapes);

    if (b == 0) {
      best = r;
    } else {
      for (std::size_t j = 0; j < rdim; ++j) {
        if (r[j] > best[j]) {
          best[j] = r[j];
          winner[j] = static_cast<int>(b);
        }
      }
    }
  }

  Matrix pooled(1, rdim);
  std::copy(best.begin(), best.end(), pooled.row(0).begin());
  const Matrix y =
      mlp_forward_rows(model.params.readout, pooled, tape ? &tape->readout_ : nullptr);
  const Matrix logits = mlp_forward_rows(model.params.head, y, tape ? &tape->head_ : nullptr);
  if (tape) {
    tape->winner_ = std::move(winner);
    tape->recorded_ = true;
  }
  return {logits.values().begin(), logits.values().end()};
}

std::vector<std::vector<double>> colored_readouts(const ClipModel& model, const Graph& g,
                                                  const ColoringSample& sample) {
  const ClipConfig& cfg = model.config;
  const ForwardSetup setup = prepare(model, g, sample);
  std::vector<std::vector<double>> out;
  for (std::size_t b = 0; b < setup.branches; ++b) {
    const Matrix x0 = setup.colored
                          ? apply_coloring(g, setup.part, sample.colorings[b], cfg.color_dim)
                          : g.attrs();
    std::vector<double> r(static_cast<std::size_t>(cfg.readout_dim()));
    run_branch<ClipTape::Hop>(model, g, x0, r, nullptr);
    out.push_back(std::move(r));
  }
  return out;
}

void clip_backward(ClipTape& tape, std::span<const double> logit_grad, ClipParams& grads) {
  if (!tape.recorded_) throw Error(Errc::TapeAlreadyConsumed, "tape holds no forward pass");
  tape.recorded_ = false;
  const ClipConfig& cfg = tape.model_->config;
  const Graph& g = *tape.graph_;
  const int n = g.size();

  Matrix dlogits(1, logit_grad.size());
  std::copy(logit_grad.begin(), logit_grad.end(), dlogits.row(0).begin());
  const Matrix dy = backward_rows(tape.head_, dlogits, grads.head, true);
  const Matrix dpooled = backward_rows(tape.readout_, dy, grads.readout, true);
  const auto dr = dpooled.row(0);

  std::vector<double> routed(dr.size());
  Matrix dx;
  Matrix dphi;
  for (std::size_t b = 0; b < tape.branches_.size(); ++b) {
    bool wins = false;
    for (std::size_t j = 0; j < dr.size(); ++j) {
      const bool mine = tape.winner_[j] == static_cast<int>(b);
      routed[j] = mine ? dr[j] : 0.0;
      wins = wins || mine;
    }
    if (!wins) continue;

    auto broadcast_into = [&](Matrix& target, int t) {
      const Slice s = readout_slice(cfg, t);
      for (int i = 0; i < n; ++i) {
        auto row = target.row(i);
        for (std::size_t c = 0; c < s.width; ++c) row[c] += routed[s.offset + c];
      }
    };

    dx.reset(static_cast<std::size_t>(n), static_cast<std::size_t>(cfg.hidden));
    broadcast_into(dx, cfg.hops);
    auto& hops = tape.branches_[b].hops;
    for (int t = cfg.hops - 1; t >= 0; --t) {
      const Matrix du = backward_rows(hops[t].psi, dx, grads.hops[t].psi, true);
      const std::size_t h = static_cast<std::size_t>(cfg.hidden);
      const std::size_t width = du.cols() - h;
      dphi.reset(static_cast<std::size_t>(n), h);
      for (int j = 0; j < n; ++j) {
        double* dj = dphi.row(j).data();
        for (int i : g.neighbors_of(j)) {
          const double* dsi = du.row(i).data() + width;
          for (std::size_t c = 0; c < h; ++c) dj[c] += dsi[c];
        }
      }
      const bool need_input = t > 0;
      const Matrix dx_phi = backward_rows(hops[t].phi, dphi, grads.hops[t].phi, need_input);
      if (!need_input) break;
      dx.reset(static_cast<std::size_t>(n), width);
      for (int i = 0; i < n; ++i) {
        auto row = dx.row(i);
        const auto a = du.row(i);
        const auto p = dx_phi.row(i);
        for (std::size_t c = 0; c < width; ++c) row[c] = a[c] + p[c];
      }
      if (cfg.jumping_knowledge) broadcast_into(dx, t);
    }
  }
}

ColoringSample draw_colorings(const ClipConfig& config, const Partition& p, Rng& rng) {
  if (config.colorings == 0) return {};
  if (config.colorings == kAllColorings) return exhaustive_colorings(p, config.enumeration_cap);
  return sample_colorings(p, config.colorings, rng);
}

LossAndGrads loss_and_grads(const ClipModel& model, std::span<const Example> batch,
                            std::span<const ColoringSample> samples) {
  if (samples.size() != batch.size()) {
    throw Error(Errc::ShapeMismatch, "one coloring sample per example is required");
  }
  LossAndGrads out;
  out.grads = model.params.zeros_like();
  if (batch.empty()) return out;
  const double scale = 1.0 / static_cast<double>(batch.size());
  ClipTape tape;
  for (std::size_t e = 0; e < batch.size(); ++e) {
    const auto logits = clip_forward(model, *batch[e].graph, samples[e], &tape);
    auto [loss, grad] = softmax_cross_entropy(logits, batch[e].label);
    out.loss += loss;
    for (double& v : grad) v *= scale;
    clip_backward(tape, grad, out.grads);
  }
  out.loss *= scale;
  return out;
}

LossAndGrads loss_and_grads(const ClipModel& model, std::span<const Example> batch, Rng& rng) {
  LossAndGrads out;
  out.grads = model.params.zeros_like();
  if (batch.empty()) return out;
  const double scale = 1.0 / static_cast<double>(batch.size());
  ClipTape tape;
  for (const Example& ex : batch) {
    const ColoringSample sample =
        model.config.colorings == 0
            ? ColoringSample{}
            : draw_colorings(model.config, attribute_groups(*ex.graph), rng);
    const auto logits = clip_forward(model, *ex.graph, sample, &tape);
    auto [loss, grad] = softmax_cross_entropy(logits, ex.label);
    out.loss += loss;
    for (double& v : grad) v *= scale;
    clip_backward(tape, grad, out.grads);
  }
  out.loss *= scale;
  return out;
}

std::vector<double> predict_logits(const ClipModel& model, const Graph& g, int eval_samples,
                                   Rng& rng) {
  if (eval_samples < 1) throw Error(Errc::InvalidConfig, "eval_samples must be positive");
  const bool colored = model.config.colorings != 0;
  const Partition part = colored ? attribute_groups(g) : Partition{};
  std::vector<double> total;
  for (int s = 0; s < eval_samples; ++s) {
    const ColoringSample sample = colored ? draw_colorings(model.config, part, rng)
                                          : ColoringSample{};
    auto logits = clip_forward(model, g, sample, nullptr);
    if (s == 0 && (!colored || sample.exhaustive)) return logits;
    if (total.empty()) {
      total = std::move(logits);
    } else {
      for (std::size_t c = 0; c < total.size(); ++c) total[c] += logits[c];
    }
  }
  for (double& v : total) v /= static_cast<double>(eval_samples);
  return total;
}

int argmax_lowest(std::span<const double> v) {
  int best = 0;
  for (std::size_t c = 1; c < v.size(); ++c) {
    if (v[c] > v[best]) best = static_cast<int>(c);
  }
  return best;
}

int predict(const ClipModel& model, const Graph& g, int eval_samples, Rng& rng) {
  return argmax_lowest(predict_logits(model, g, eval_samples, rng));
}

}  // namespace clip
