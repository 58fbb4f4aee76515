#include "doctest.h"

#include <algorithm>
#include <numeric>
#include <random>

#include "clip/graph.hpp"
#include "clip/rng.hpp"
#include "support.hpp"

using namespace clip;
using testing::error_of;

namespace {

Graph random_graph(int n, double p, int labels, Rng& rng) {
  std::bernoulli_distribution coin(p);
  std::uniform_int_distribution<int> lab(0, labels - 1);
  Matrix attrs(n, 2);
  for (int i = 0; i < n; ++i) {
    attrs(i, 0) = lab(rng);
    attrs(i, 1) = 0.5;
  }
  std::vector<Edge> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (coin(rng)) e.emplace_back(i, j);
  return Graph::from_edges(attrs, e);
}

std::vector<int> random_perm(int n, Rng& rng) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

}  // namespace

TEST_CASE("new_graph validates its input") {
  Graph g = new_graph(Matrix{{1.0}, {1.0}}, Matrix{{0, 1}, {1, 0}});
  CHECK(g.size() == 2);
  CHECK(g.edge_count() == 1);
  CHECK(g.adjacent(0, 1));
  CHECK(g.adjacent(1, 0));

  CHECK(error_of([] { new_graph(Matrix{{1.0}, {1.0}}, Matrix{{0, 1}, {0, 0}}); }) ==
        Errc::AsymmetricAdjacency);
  CHECK(error_of([] { new_graph(Matrix{{1.0}}, Matrix{{1}}); }) == Errc::SelfLoop);
  CHECK(error_of([] { new_graph(Matrix{{1.0}}, Matrix{{0, 1}, {1, 0}}); }) ==
        Errc::DimensionMismatch);
  CHECK(error_of([] { new_graph(Matrix{{1.0}, {1.0}}, Matrix{{0, 2}, {2, 0}}); }) ==
        Errc::NonBinaryAdjacency);
  CHECK(error_of([] { new_graph(constant_attrs(5), Matrix(5, 5), 4); }) ==
        Errc::SizeCapExceeded);
  CHECK(error_of([] { new_graph(Matrix(0, 1), Matrix(0, 0)); }).has_value());
}

TEST_CASE("from_edges deduplicates and sorts neighbors") {
  std::vector<Edge> e = {{2, 0}, {0, 1}, {1, 0}, {0, 2}};
  Graph g = Graph::from_edges(constant_attrs(3), e);
  CHECK(g.edge_count() == 2);
  CHECK(std::vector<int>(g.neighbors_of(0).begin(), g.neighbors_of(0).end()) ==
        std::vector<int>{1, 2});
  CHECK(g.edges() == std::vector<Edge>{{0, 1}, {0, 2}});
  CHECK(g.adjacency() == Matrix{{0, 1, 1}, {1, 0, 0}, {1, 0, 0}});
  CHECK(error_of([] {
          std::vector<Edge> bad = {{0, 3}};
          Graph::from_edges(constant_attrs(3), bad);
        }) == Errc::IndexOutOfRange);
  CHECK(error_of([] {
          std::vector<Edge> bad = {{1, 1}};
          Graph::from_edges(constant_attrs(3), bad);
        }) == Errc::SelfLoop);
}

TEST_CASE("permute") {
  Matrix attrs{{1.0}, {2.0}, {3.0}};
  std::vector<Edge> e = {{0, 1}, {1, 2}};
  Graph g = Graph::from_edges(attrs, e);

  std::vector<int> id = {0, 1, 2};
  CHECK(permute(g, id) == g);

  // path a-b-c reversed
  std::vector<int> rev = {2, 1, 0};
  Graph r = permute(g, rev);
  CHECK(r.attrs() == Matrix{{3.0}, {2.0}, {1.0}});
  CHECK(r.adjacent(2, 1));
  CHECK(r.adjacent(1, 0));
  CHECK_FALSE(r.adjacent(0, 2));

  std::vector<int> dup = {0, 0, 1};
  CHECK(error_of([&] { permute(g, dup); }) == Errc::InvalidPermutation);
  std::vector<int> shortp = {0, 1};
  CHECK(error_of([&] { permute(g, shortp); }) == Errc::InvalidPermutation);
  std::vector<int> out = {0, 1, 3};
  CHECK(error_of([&] { permute(g, out); }) == Errc::InvalidPermutation);
}

TEST_CASE("permute is a group action") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 9;
    Graph g = random_graph(n, 0.4, 3, rng);
    auto p = random_perm(n, rng);
    auto q = random_perm(n, rng);
    std::vector<int> qp(n);
    for (int i = 0; i < n; ++i) qp[i] = q[p[i]];
    CHECK(permute(permute(g, p), q) == permute(g, qp));
    CHECK(permute(permute(g, p), inverse_permutation(p)) == g);
    // relabeling leaves adjacency structure intact
    Graph h = permute(g, p);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) CHECK(g.adjacent(i, j) == h.adjacent(p[i], p[j]));
  }
}

TEST_CASE("attribute_groups") {
  Graph g = Graph::from_edges(Matrix{{1.0}, {2.0}, {1.0}}, {});
  Partition p = attribute_groups(g);
  REQUIRE(p.groups.size() == 2);
  CHECK(p.groups[0] == std::vector<int>{0, 2});
  CHECK(p.groups[1] == std::vector<int>{1});
  CHECK(p.group_of == std::vector<int>{0, 1, 0});

  CHECK(attribute_groups(testing::path(5)).groups.size() == 1);
  CHECK(attribute_groups(testing::path(5)).max_group_size() == 5);

  Graph distinct = Graph::from_edges(Matrix{{3.0}, {1.0}, {2.0}, {0.0}}, {});
  Partition d = attribute_groups(distinct);
  CHECK(d.groups.size() == 4);
  CHECK(d.max_group_size() == 1);
  // lexicographic by attribute row
  CHECK(d.groups[0] == std::vector<int>{3});
  CHECK(d.groups[3] == std::vector<int>{0});

  // exact equality, no tolerance
  Graph near = Graph::from_edges(Matrix{{1.0}, {1.0 + 1e-15}}, {});
  CHECK(attribute_groups(near).groups.size() == 2);
}

TEST_CASE("attribute_groups under permutation") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 10;
    Graph g = random_graph(n, 0.3, 3, rng);
    auto p = random_perm(n, rng);
    Partition a = attribute_groups(g);
    Partition b = attribute_groups(permute(g, p));
    CHECK(a.group_sizes() == b.group_sizes());
    REQUIRE(a.groups.size() == b.groups.size());
    for (std::size_t k = 0; k < a.groups.size(); ++k) {
      std::vector<int> mapped;
      for (int i : a.groups[k]) mapped.push_back(p[i]);
      std::sort(mapped.begin(), mapped.end());
      CHECK(mapped == b.groups[k]);
    }
  }
}

TEST_CASE("degree_one_hot") {
  Graph tri = degree_one_hot(testing::complete(3), 2);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::vector<double>(tri.attrs().row(i).begin(), tri.attrs().row(i).end()) ==
          std::vector<double>{0, 0, 1});
  }
  Graph star = degree_one_hot(testing::graph_of(4, {{0, 1}, {0, 2}, {0, 3}}), 3);
  CHECK(star.attrs() == Matrix{{0, 0, 0, 1}, {0, 1, 0, 0}, {0, 1, 0, 0}, {0, 1, 0, 0}});
  CHECK(error_of([] { degree_one_hot(testing::path(2), 0); }) == Errc::DegreeOverflow);

  Rng rng(3);
  Graph g = degree_one_hot(random_graph(12, 0.3, 1, rng), 11);
  for (int i = 0; i < g.size(); ++i) {
    double s = 0;
    for (double v : g.attrs().row(i)) s += v;
    CHECK(s == 1.0);
  }
}

TEST_CASE("neighbors") {
  CHECK(neighbors(testing::cycle(4), 0) == std::vector<int>{1, 3});
  CHECK(neighbors(testing::graph_of(2, {}), 1).empty());
  CHECK(neighbors(testing::complete(3), 1) == std::vector<int>{0, 2});
  CHECK(error_of([] { neighbors(testing::cycle(4), 4); }) == Errc::IndexOutOfRange);
  CHECK(error_of([] { neighbors(testing::cycle(4), -1); }) == Errc::IndexOutOfRange);
}
