#include "clip/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "clip/model.hpp"

namespace clip {

namespace {

struct Case {
  Graph graph;
  ClipModel model;
  ColoringSample sample;
  int label = 0;
};

Case random_case(const GradcheckOptions& o, Rng& rng) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const int n = pick(1, o.max_nodes);
  const int attr_dim = pick(1, 2);
  const int labels = pick(1, 3);
  Matrix attrs(static_cast<std::size_t>(n), static_cast<std::size_t>(attr_dim));
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < attr_dim; ++a) attrs(i, a) = (a == 0) ? pick(0, labels - 1) : 0.5;
  std::bernoulli_distribution coin(0.5);
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (coin(rng)) edges.emplace_back(i, j);
  Graph g = Graph::from_edges(std::move(attrs), edges);
  const Partition part = attribute_groups(g);

  ClipConfig c;
  c.hops = pick(1, o.max_hops);
  c.hidden = pick(1, o.max_width);
  c.attr_dim = attr_dim;
  c.num_classes = pick(2, 3);
  c.mlp_layers = pick(1, 2);
  c.activation = o.activation;
  const int mode = pick(0, 3);
  c.colorings = mode == 0 ? 0 : mode == 3 ? kAllColorings : mode;
  c.color_dim = c.colorings == 0 ? 0 : part.max_group_size() + pick(0, 1);

  ClipModel model = ClipModel::init(c, rng);
  std::uniform_real_distribution<double> bias(-0.3, 0.3);
  for (auto t : model.params.tensors())
    for (double& v : t) v += 0.1 * bias(rng);
  ColoringSample sample = draw_colorings(c, part, rng);
  return {std::move(g), std::move(model), std::move(sample), pick(0, c.num_classes - 1)};
}

bool has_tie(const Case& k, double gap) {
  if (k.model.config.colorings == 0) return false;
  const auto reads = colored_readouts(k.model, k.graph, k.sample);
  if (reads.size() < 2) return false;
  for (std::size_t j = 0; j < reads[0].size(); ++j) {
    double first = -INFINITY, second = -INFINITY;
    for (const auto& r : reads) {
      if (r[j] > first) {
        second = first;
        first = r[j];
      } else if (r[j] > second) {
        second = r[j];
      }
    }
    if (first - second <= gap * (1.0 + std::abs(first))) return true;
  }
  return false;
}

}  // namespace

GradcheckReport run_gradcheck(const GradcheckOptions& o) {
  Rng rng(o.seed);
  GradcheckReport report;
  while (report.configs < o.configs) {
    Case k = random_case(o, rng);
    if (has_tie(k, o.tie_gap)) {
      ++report.skipped_ties;
      continue;
    }
    ++report.configs;
    const Example ex{&k.graph, k.label};
    const std::span<const Example> batch(&ex, 1);
    const std::span<const ColoringSample> samples(&k.sample, 1);
    const LossAndGrads analytic = loss_and_grads(k.model, batch, samples);
    const auto grads = analytic.grads.tensors();
    auto params = k.model.params.tensors();
    for (std::size_t t = 0; t < params.size(); ++t) {
      for (std::size_t i = 0; i < params[t].size(); ++i) {
        double& slot = params[t][i];
        const double orig = slot;
        slot = orig + o.step;
        const double up = loss_and_grads(k.model, batch, samples).loss;
        slot = orig - o.step;
        const double down = loss_and_grads(k.model, batch, samples).loss;
        slot = orig;
        const double numeric = (up - down) / (2 * o.step);
        const double a = grads[t][i];
        const double diff = std::abs(a - numeric);
        const double scale = std::max(std::abs(a), std::abs(numeric));
        ++report.entries;
        if (diff <= o.abs_tol) continue;
        const double rel = diff / scale;
        report.max_rel_error = std::max(report.max_rel_error, rel);
        if (rel > o.rel_tol) ++report.failures;
      }
    }
  }
  return report;
}

}  // namespace clip
