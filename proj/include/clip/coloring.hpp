#pragma once

#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "clip/graph.hpp"
#include "clip/matrix.hpp"
#include "clip/rng.hpp"

namespace clip {

using BigInt = boost::multiprecision::cpp_int;

/// Colorings with at most this many members may be enumerated exhaustively.
inline constexpr std::uint64_t kEnumerationThreshold = 10'000;
/// Failed rejection draws tolerated before distinct sampling gives up.
inline constexpr int kRejectionBudget = 100'000;

/// colors[i] is node i's color within its attribute group, 0-based. Inside a
/// group of size s the colors form a permutation of {0..s-1}.
struct Coloring {
  std::vector<int> colors;

  friend bool operator==(const Coloring&, const Coloring&) = default;
  friend auto operator<=>(const Coloring&, const Coloring&) = default;
};

struct ColoringSample {
  std::vector<Coloring> colorings;
  /// True iff `colorings` is the complete coloring set of the graph.
  bool exhaustive = false;
};

/// Product of factorials of the group sizes.
BigInt coloring_count(const Partition& p);

bool is_valid_coloring(const Partition& p, const Coloring& c);

/// All colorings, groups varied in odometer order (last group fastest).
std::vector<Coloring> enumerate_colorings(const Partition& p,
                                          std::uint64_t cap = kEnumerationThreshold);

/// k distinct colorings drawn uniformly; the full set when it has at most k
/// members.
ColoringSample sample_colorings(const Partition& p, int k, Rng& rng);

/// The full coloring set, refused above `cap`.
ColoringSample exhaustive_colorings(const Partition& p, std::uint64_t cap = kEnumerationThreshold);

/// The identity coloring (each group colored in ascending node order).
Coloring canonical_coloring(const Partition& p);

/// Rows (attrs[i], onehot(colors[i])) with one-hot width color_dim. With
/// color_dim == 0 the attributes are returned unchanged.
Matrix apply_coloring(const Graph& g, const Partition& p, const Coloring& c, int color_dim);
Matrix apply_coloring(const Graph& g, const Coloring& c, int color_dim);

}  // namespace clip
