#pragma once
#include <functional>
#include <optional>
#include <vector>

#include "clip/error.hpp"
#include "clip/graph.hpp"

namespace testing {

// Code of the clip::Error thrown by f, or nullopt if f returns normally.
inline std::optional<clip::Errc> error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const clip::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline clip::Graph graph_of(int n, std::vector<clip::Edge> edges) {
  return clip::Graph::from_edges(clip::constant_attrs(n), edges);
}

inline clip::Graph cycle(int n) {
  std::vector<clip::Edge> e;
  for (int i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
  return graph_of(n, e);
}

inline clip::Graph path(int n) {
  std::vector<clip::Edge> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return graph_of(n, e);
}

inline clip::Graph complete(int n) {
  std::vector<clip::Edge> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return graph_of(n, e);
}

}  // namespace testing

#include <algorithm>
#include <cmath>

#include "clip/model.hpp"

namespace testing {

// Straight-line MLP: y_o = b_o + sum_i x_i W[i][o], activation between layers.
inline std::vector<double> oracle_mlp(const clip::MlpParams& p, std::vector<double> x) {
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const clip::Dense& d = p.layers[l];
    std::vector<double> y(d.out());
    for (int o = 0; o < d.out(); ++o) {
      long double acc = d.bias[o];
      for (int i = 0; i < d.in(); ++i) acc += static_cast<long double>(x[i]) * d.weight(i, o);
      y[o] = static_cast<double>(acc);
    }
    if (l + 1 < p.layers.size()) {
      for (double& v : y)
        v = p.activation == clip::Activation::Relu ? std::max(0.0, v) : std::tanh(v);
    }
    x = std::move(y);
  }
  return x;
}

// Plain MPNN over explicit node features followed by the readout and head;
// the model's coloring machinery is bypassed entirely.
inline std::vector<double> oracle_branch_readout(const clip::ClipModel& m, const clip::Graph& g,
                                                 std::vector<std::vector<double>> x) {
  const int n = g.size();
  for (const auto& hop : m.params.hops) {
    std::vector<std::vector<double>> phi(n), next(n);
    for (int i = 0; i < n; ++i) phi[i] = oracle_mlp(hop.phi, x[i]);
    for (int i = 0; i < n; ++i) {
      std::vector<double> s(hop.phi.out_dim(), 0.0);
      for (int j = 0; j < n; ++j)
        if (g.adjacent(i, j))
          for (std::size_t c = 0; c < s.size(); ++c) s[c] += phi[j][c];
      std::vector<double> u = x[i];
      u.insert(u.end(), s.begin(), s.end());
      next[i] = oracle_mlp(hop.psi, u);
    }
    x = std::move(next);
  }
  std::vector<double> r(x[0].size(), 0.0);
  for (const auto& row : x)
    for (std::size_t c = 0; c < r.size(); ++c) r[c] += row[c];
  return r;
}

inline std::vector<std::vector<double>> oracle_colored_input(const clip::Graph& g,
                                                             const clip::Coloring* c,
                                                             int color_dim) {
  std::vector<std::vector<double>> x(g.size());
  for (int i = 0; i < g.size(); ++i) {
    auto row = g.attrs().row(i);
    x[i].assign(row.begin(), row.end());
    if (c) {
      std::vector<double> hot(color_dim, 0.0);
      hot[c->colors[i]] = 1.0;
      x[i].insert(x[i].end(), hot.begin(), hot.end());
    }
  }
  return x;
}

inline std::vector<double> oracle_logits(const clip::ClipModel& m, const clip::Graph& g,
                                         const clip::ColoringSample& sample) {
  std::vector<double> best;
  if (m.config.colorings == 0) {
    best = oracle_branch_readout(m, g, oracle_colored_input(g, nullptr, 0));
  } else {
    for (const auto& c : sample.colorings) {
      auto r = oracle_branch_readout(m, g, oracle_colored_input(g, &c, m.config.color_dim));
      if (best.empty()) {
        best = r;
      } else {
        for (std::size_t j = 0; j < r.size(); ++j) best[j] = std::max(best[j], r[j]);
      }
    }
  }
  return oracle_mlp(m.params.head, oracle_mlp(m.params.readout, best));
}

}  // namespace testing
