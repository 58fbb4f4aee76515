#include "clip/graph.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <string>

#include "clip/error.hpp"

namespace clip {

namespace {

void check_size(std::size_t n, std::size_t max_nodes) {
  if (n == 0) throw Error(Errc::DimensionMismatch, "graph must have at least one node");
  if (n > max_nodes) {
    throw Error(Errc::SizeCapExceeded,
                std::to_string(n) + " nodes exceeds cap " + std::to_string(max_nodes));
  }
}

// Total order on attribute rows that agrees with bitwise equality: numeric
// order first, raw bits to split 0.0 from -0.0.
bool row_less(std::span<const double> a, std::span<const double> b) {
  for (std::size_t c = 0; c < a.size(); ++c) {
    if (a[c] < b[c]) return true;
    if (b[c] < a[c]) return false;
    const auto ba = std::bit_cast<std::uint64_t>(a[c]);
    const auto bb = std::bit_cast<std::uint64_t>(b[c]);
    if (ba != bb) return ba < bb;
  }
  return false;
}

bool row_bits_equal(std::span<const double> a, std::span<const double> b) {
  for (std::size_t c = 0; c < a.size(); ++c) {
    if (std::bit_cast<std::uint64_t>(a[c]) != std::bit_cast<std::uint64_t>(b[c])) return false;
  }
  return true;
}

}  // namespace

Graph Graph::from_edges(Matrix attrs, std::span<const Edge> edges, std::size_t max_nodes) {
  const std::size_t n = attrs.rows();
  check_size(n, max_nodes);
  if (!attrs.all_finite()) throw Error(Errc::NonFiniteInput, "node attributes must be finite");

  Graph g;
  g.n_ = static_cast<int>(n);
  g.attrs_ = std::move(attrs);
  g.adj_.assign(n * n, 0);
  g.nbrs_.resize(n);
  for (const auto& [i, j] : edges) {
    if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= n || static_cast<std::size_t>(j) >= n) {
      throw Error(Errc::IndexOutOfRange,
                  "edge (" + std::to_string(i) + "," + std::to_string(j) + ") outside graph");
    }
    if (i == j) throw Error(Errc::SelfLoop, "self-loop at node " + std::to_string(i));
    auto& ij = g.adj_[static_cast<std::size_t>(i) * n + j];
    if (ij) continue;
    ij = 1;
    g.adj_[static_cast<std::size_t>(j) * n + i] = 1;
    g.nbrs_[i].push_back(j);
    g.nbrs_[j].push_back(i);
    ++g.edge_count_;
  }
  for (auto& list : g.nbrs_) std::sort(list.begin(), list.end());
  return g;
}

int Graph::max_degree() const noexcept {
  int d = 0;
  for (const auto& list : nbrs_) d = std::max(d, static_cast<int>(list.size()));
  return d;
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (int i = 0; i < n_; ++i) {
    for (int j : nbrs_[i]) {
      if (j > i) out.emplace_back(i, j);
    }
  }
  return out;
}

Matrix Graph::adjacency() const {
  Matrix a(n_, n_);
  for (int i = 0; i < n_; ++i) {
    for (int j : nbrs_[i]) a(i, j) = 1.0;
  }
  return a;
}

Graph new_graph(Matrix attrs, const Matrix& adj, std::size_t max_nodes) {
  if (adj.rows() != adj.cols()) throw Error(Errc::DimensionMismatch, "adjacency must be square");
  if (attrs.rows() != adj.rows()) {
    throw Error(Errc::DimensionMismatch, "attribute rows (" + std::to_string(attrs.rows()) +
                                             ") differ from adjacency order (" +
                                             std::to_string(adj.rows()) + ")");
  }
  check_size(adj.rows(), max_nodes);
  const int n = static_cast<int>(adj.rows());
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double a = adj(i, j);
      if (a != 0.0 && a != 1.0) {
        throw Error(Errc::NonBinaryAdjacency, "adjacency entries must be 0 or 1");
      }
      if (i == j && a != 0.0) throw Error(Errc::SelfLoop, "self-loop at node " + std::to_string(i));
      if (a != adj(j, i)) {
        throw Error(Errc::AsymmetricAdjacency,
                    "entry (" + std::to_string(i) + "," + std::to_string(j) + ") unmatched");
      }
      if (a != 0.0 && i < j) edges.emplace_back(i, j);
    }
  }
  return Graph::from_edges(std::move(attrs), edges, max_nodes);
}

std::vector<int> inverse_permutation(std::span<const int> perm) {
  std::vector<int> inv(perm.size(), -1);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    const int p = perm[i];
    if (p < 0 || static_cast<std::size_t>(p) >= perm.size() || inv[p] != -1) {
      throw Error(Errc::InvalidPermutation, "not a bijection on node indices");
    }
    inv[p] = static_cast<int>(i);
  }
  return inv;
}

Graph permute(const Graph& g, std::span<const int> perm) {
  if (perm.size() != static_cast<std::size_t>(g.size())) {
    throw Error(Errc::InvalidPermutation, "permutation length differs from node count");
  }
  const auto inv = inverse_permutation(perm);
  const int n = g.size();
  Matrix attrs(n, g.attr_dim());
  for (int i = 0; i < n; ++i) {
    const auto src = g.attrs().row(inv[i]);
    std::copy(src.begin(), src.end(), attrs.row(i).begin());
  }
  std::vector<Edge> edges;
  edges.reserve(g.edge_count());
  for (const auto& [i, j] : g.edges()) edges.emplace_back(perm[i], perm[j]);
  return Graph::from_edges(std::move(attrs), edges, std::max<std::size_t>(n, kDefaultMaxNodes));
}

int Partition::max_group_size() const noexcept {
  std::size_t m = 0;
  for (const auto& grp : groups) m = std::max(m, grp.size());
  return static_cast<int>(m);
}

std::vector<int> Partition::group_sizes() const {
  std::vector<int> sizes;
  sizes.reserve(groups.size());
  for (const auto& grp : groups) sizes.push_back(static_cast<int>(grp.size()));
  return sizes;
}

Partition attribute_groups(const Graph& g) {
  const int n = g.size();
  const Matrix& a = g.attrs();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return row_less(a.row(x), a.row(y)); });

  Partition p;
  p.group_of.assign(n, -1);
  for (int idx = 0; idx < n; ++idx) {
    const int node = order[idx];
    if (idx == 0 || !row_bits_equal(a.row(order[idx - 1]), a.row(node))) p.groups.emplace_back();
    p.groups.back().push_back(node);
    p.group_of[node] = static_cast<int>(p.groups.size()) - 1;
  }
  return p;
}

Graph degree_one_hot(const Graph& g, int max_degree) {
  if (max_degree < 0) throw Error(Errc::DegreeOverflow, "max_degree must be non-negative");
  const int n = g.size();
  Matrix attrs(n, static_cast<std::size_t>(max_degree) + 1);
  for (int i = 0; i < n; ++i) {
    const int d = g.degree(i);
    if (d > max_degree) {
      throw Error(Errc::DegreeOverflow, "node " + std::to_string(i) + " has degree " +
                                            std::to_string(d) + " > " + std::to_string(max_degree));
    }
    attrs(i, d) = 1.0;
  }
  const auto edges = g.edges();
  return Graph::from_edges(std::move(attrs), edges, std::max<std::size_t>(n, kDefaultMaxNodes));
}

std::vector<int> neighbors(const Graph& g, int i) {
  if (i < 0 || i >= g.size()) {
    throw Error(Errc::IndexOutOfRange, "node " + std::to_string(i) + " not in graph of size " +
                                           std::to_string(g.size()));
  }
  const auto nb = g.neighbors_of(i);
  return {nb.begin(), nb.end()};
}

Matrix constant_attrs(int n, double value) { return Matrix(n, 1, value); }

}  // namespace clip
