#include "clip/coloring.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <string>

#include "clip/error.hpp"

namespace clip {

BigInt coloring_count(const Partition& p) {
  BigInt total = 1;
  for (const auto& grp : p.groups) {
    for (std::size_t f = 2; f <= grp.size(); ++f) total *= f;
  }
  return total;
}

bool is_valid_coloring(const Partition& p, const Coloring& c) {
  if (c.colors.size() != p.node_count()) return false;
  std::vector<char> seen;
  for (const auto& grp : p.groups) {
    seen.assign(grp.size(), 0);
    for (int node : grp) {
      const int color = c.colors[node];
      if (color < 0 || static_cast<std::size_t>(color) >= grp.size() || seen[color]) return false;
      seen[color] = 1;
    }
  }
  return true;
}

Coloring canonical_coloring(const Partition& p) {
  Coloring c;
  c.colors.assign(p.node_count(), 0);
  for (const auto& grp : p.groups) {
    for (std::size_t r = 0; r < grp.size(); ++r) c.colors[grp[r]] = static_cast<int>(r);
  }
  return c;
}

std::vector<Coloring> enumerate_colorings(const Partition& p, std::uint64_t cap) {
  const BigInt count = coloring_count(p);
  if (count > cap) {
    throw Error(Errc::EnumerationCapExceeded,
                "coloring set has " + count.str() + " members, cap is " + std::to_string(cap));
  }
  std::vector<std::vector<int>> perms;
  perms.reserve(p.groups.size());
  for (const auto& grp : p.groups) {
    std::vector<int> id(grp.size());
    std::iota(id.begin(), id.end(), 0);
    perms.push_back(std::move(id));
  }

  std::vector<Coloring> out;
  out.reserve(count.convert_to<std::size_t>());
  while (true) {
    Coloring c;
    c.colors.assign(p.node_count(), 0);
    for (std::size_t g = 0; g < p.groups.size(); ++g) {
      for (std::size_t r = 0; r < p.groups[g].size(); ++r) c.colors[p.groups[g][r]] = perms[g][r];
    }
    out.push_back(std::move(c));

    // Odometer step; next_permutation wraps to identity when it returns false.
    std::size_t g = perms.size();
    while (g > 0) {
      --g;
      if (std::next_permutation(perms[g].begin(), perms[g].end())) break;
      if (g == 0) return out;
    }
    if (perms.empty()) return out;
  }
}

ColoringSample exhaustive_colorings(const Partition& p, std::uint64_t cap) {
  return {enumerate_colorings(p, cap), true};
}

ColoringSample sample_colorings(const Partition& p, int k, Rng& rng) {
  if (k < 1) throw Error(Errc::InvalidConfig, "sample size k must be at least 1");
  if (coloring_count(p) <= static_cast<unsigned>(k)) {
    return exhaustive_colorings(p, static_cast<std::uint64_t>(k));
  }

  ColoringSample sample;
  sample.colorings.reserve(k);
  std::set<std::vector<int>> drawn;
  std::vector<int> perm;
  int failures = 0;
  while (static_cast<int>(sample.colorings.size()) < k) {
    Coloring c;
    c.colors.assign(p.node_count(), 0);
    for (const auto& grp : p.groups) {
      perm.resize(grp.size());
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      for (std::size_t r = 0; r < grp.size(); ++r) c.colors[grp[r]] = perm[r];
    }
    if (drawn.insert(c.colors).second) {
      sample.colorings.push_back(std::move(c));
    } else if (++failures >= kRejectionBudget) {
      throw Error(Errc::RejectionBudgetExhausted,
                  "could not draw " + std::to_string(k) + " distinct colorings");
    }
  }
  return sample;
}

Matrix apply_coloring(const Graph& g, const Partition& p, const Coloring& c, int color_dim) {
  if (color_dim == 0) return g.attrs();
  if (color_dim < p.max_group_size()) {
    throw Error(Errc::ColorDimTooSmall, "color_dim " + std::to_string(color_dim) +
                                            " < largest attribute group " +
                                            std::to_string(p.max_group_size()));
  }
  if (!is_valid_coloring(p, c)) throw Error(Errc::ColoringMismatch, "coloring not valid for graph");
  const int n = g.size();
  const int m = g.attr_dim();
  Matrix x(n, static_cast<std::size_t>(m + color_dim));
  for (int i = 0; i < n; ++i) {
    const auto src = g.attrs().row(i);
    std::copy(src.begin(), src.end(), x.row(i).begin());
    x(i, m + c.colors[i]) = 1.0;
  }
  return x;
}

Matrix apply_coloring(const Graph& g, const Coloring& c, int color_dim) {
  return apply_coloring(g, attribute_groups(g), c, color_dim);
}

}  // namespace clip
