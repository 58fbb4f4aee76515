#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "clip/matrix.hpp"

namespace clip {

inline constexpr std::size_t kDefaultMaxNodes = 1000;

using Edge = std::pair<int, int>;

/// Undirected simple graph with a real attribute row per node. Immutable once
/// built; node indices are 0-based.
class Graph {
 public:
  /// Builds from an attribute matrix and an undirected edge list. Each
  /// unordered pair may appear once or in both directions.
  static Graph from_edges(Matrix attrs, std::span<const Edge> edges,
                          std::size_t max_nodes = kDefaultMaxNodes);

  int size() const noexcept { return n_; }
  int attr_dim() const noexcept { return static_cast<int>(attrs_.cols()); }
  const Matrix& attrs() const noexcept { return attrs_; }

  bool adjacent(int i, int j) const noexcept { return adj_[static_cast<std::size_t>(i) * n_ + j] != 0; }
  /// Sorted ascending; no bounds check.
  std::span<const int> neighbors_of(int i) const noexcept { return nbrs_[i]; }
  int degree(int i) const noexcept { return static_cast<int>(nbrs_[i].size()); }
  int max_degree() const noexcept;
  std::size_t edge_count() const noexcept { return edge_count_; }
  /// Every edge once as (i, j) with i < j, in lexicographic order.
  std::vector<Edge> edges() const;
  /// Dense 0/1 adjacency.
  Matrix adjacency() const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.n_ == b.n_ && a.attrs_ == b.attrs_ && a.adj_ == b.adj_;
  }

 private:
  Graph() = default;

  int n_ = 0;
  std::size_t edge_count_ = 0;
  Matrix attrs_;
  std::vector<unsigned char> adj_;
  std::vector<std::vector<int>> nbrs_;
};

/// Validated graph from a dense 0/1 adjacency matrix. Asymmetric input is an
/// error; nothing is symmetrized.
Graph new_graph(Matrix attrs, const Matrix& adj, std::size_t max_nodes = kDefaultMaxNodes);

/// Relabels nodes: old node i becomes node perm[i]. Equivalent to (Pv, PAP^T).
Graph permute(const Graph& g, std::span<const int> perm);

/// Inverse of a permutation in the `permute` convention.
std::vector<int> inverse_permutation(std::span<const int> perm);

/// Groups of nodes with bitwise-identical attribute rows.
struct Partition {
  /// Groups ordered lexicographically by attribute row; members ascending.
  std::vector<std::vector<int>> groups;
  /// group_of[i] = index into `groups` of node i.
  std::vector<int> group_of;

  std::size_t node_count() const noexcept { return group_of.size(); }
  int max_group_size() const noexcept;
  std::vector<int> group_sizes() const;

  friend bool operator==(const Partition&, const Partition&) = default;
};

Partition attribute_groups(const Graph& g);

/// Same structure, attributes replaced by one-hot degree vectors of width
/// max_degree + 1.
Graph degree_one_hot(const Graph& g, int max_degree);

/// Checked neighbor lookup.
std::vector<int> neighbors(const Graph& g, int i);

/// Constant-attribute graph (every node carries the scalar 1.0).
Matrix constant_attrs(int n, double value = 1.0);

}  // namespace clip
