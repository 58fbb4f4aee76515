#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "clip/graph.hpp"
#include "clip/rng.hpp"

namespace clip {

struct DatasetMeta {
  std::string name;
  int num_classes = 0;
  int attr_dim = 0;
  /// Largest attribute-group size over all graphs; shared one-hot color width.
  int color_dim = 0;
  int max_degree = 0;
  /// Generator name, seed and parameters for synthetic data; null otherwise.
  nlohmann::json generation;

  friend bool operator==(const DatasetMeta&, const DatasetMeta&) = default;
};

struct LabeledDataset {
  std::vector<Graph> graphs;
  std::vector<int> labels;
  DatasetMeta meta;

  std::size_t size() const noexcept { return graphs.size(); }
  /// Per-class member counts, indexed by label.
  std::vector<int> class_counts() const;

  friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;
};

/// Validates the pieces and derives attr_dim, color_dim and max_degree.
LabeledDataset make_dataset(std::string name, std::vector<Graph> graphs, std::vector<int> labels,
                            int num_classes, nlohmann::json generation = nullptr);

/// Subset in the given index order; meta is carried over unchanged.
LabeledDataset subset(const LabeledDataset& d, std::span<const int> indices);

// ---------------------------------------------------------------------------
// Synthetic property datasets. Label 1 marks a positive sample (the graph has
// the property the generator builds in), 0 a negative. Positives occupy
// indices [0, per_class); negative per_class + i is positive i with edges
// added.

enum class PropertyTask { Connectivity, Bipartiteness, TriangleFreeness };

std::string_view task_name(PropertyTask t) noexcept;
PropertyTask parse_task(std::string_view name);

/// Erdos-Renyi G(n, p) with constant scalar attribute 1.0.
Graph gen_er(int n, double p, Rng& rng);

/// Positives: two disjoint connected ER(10, 0.5) components (disconnected
/// 20-node graph). Negatives: one extra edge joining the components.
LabeledDataset gen_connectivity_dataset(Rng& rng, int per_class = 500);
/// Positives: bipartite ER between two 10-node sides, p = 0.5. Negatives: one
/// same-side edge closing an odd cycle.
LabeledDataset gen_bipartiteness_dataset(Rng& rng, int per_class = 500);
/// Positives: triangle-free ER(20, 0.1). Negatives: random edges added until
/// a triangle appears.
LabeledDataset gen_trianglefree_dataset(Rng& rng, int per_class = 500);
LabeledDataset gen_property_dataset(PropertyTask task, Rng& rng, int per_class = 500);

bool oracle_connected(const Graph& g);
bool oracle_bipartite(const Graph& g);
bool oracle_triangle_free(const Graph& g);
/// Label the generator should have assigned, recomputed from the graph alone.
int oracle_label(PropertyTask task, const Graph& g);

// ---------------------------------------------------------------------------
// Circular skip links.

inline constexpr std::array<int, 10> kDefaultCslSkips = {2, 3, 4, 5, 6, 9, 11, 12, 13, 16};

/// 4-regular circulant graph: i ~ j iff |i - j| = 1 or k (mod n). Requires
/// n >= 5 and 2 <= k <= (n - 1) / 2.
Graph csl_graph(int n, int k);

/// Ascending adjacency eigenvalues.
std::vector<double> adjacency_spectrum(const Graph& g);
bool same_spectrum(std::span<const double> a, std::span<const double> b, double tol = 1e-8);

/// `copies` random relabelings of csl_graph(n, ks[c]) labeled c. Throws
/// IsomorphicSkipValues when two skip values give cospectral graphs.
LabeledDataset gen_csl_dataset(std::span<const int> ks, int copies, Rng& rng, int n = 41);

// ---------------------------------------------------------------------------
// TU text format: {name}_A.txt, {name}_graph_indicator.txt,
// {name}_graph_labels.txt, optional {name}_node_labels.txt, all 1-based, plus
// an optional {name}_meta.json written for synthetic data.

LabeledDataset parse_tu_dataset(const std::filesystem::path& root, const std::string& name);

enum class NodeLabels {
  Write,  ///< attrs must be one-hot rows; the hot index is written
  Omit,   ///< no node label file; parsing rebuilds degree one-hots
};

void serialize_tu_dataset(const LabeledDataset& d, const std::filesystem::path& root,
                          const std::string& name, NodeLabels mode = NodeLabels::Write);

/// Name of the single TU dataset stored in `root` (derived from *_A.txt).
std::string find_tu_name(const std::filesystem::path& root);

// ---------------------------------------------------------------------------

struct FoldPlan {
  /// folds[f] holds the ascending dataset indices held out in fold f.
  std::vector<std::vector<int>> folds;

  /// Everything outside fold f, ascending.
  std::vector<int> train_indices(std::size_t f) const;
};

/// Class-stratified disjoint folds; per-class counts differ by at most one
/// across folds.
FoldPlan stratified_folds(const LabeledDataset& d, int folds, Rng& rng);

}  // namespace clip
