#include "clip/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "clip/error.hpp"

namespace clip {

namespace fs = std::filesystem;

std::vector<int> LabeledDataset::class_counts() const {
  std::vector<int> counts(static_cast<std::size_t>(meta.num_classes), 0);
  for (int l : labels) ++counts[l];
  return counts;
}

LabeledDataset make_dataset(std::string name, std::vector<Graph> graphs, std::vector<int> labels,
                            int num_classes, nlohmann::json generation) {
  if (graphs.size() != labels.size()) {
    throw Error(Errc::DimensionMismatch, "graph and label counts differ");
  }
  LabeledDataset d;
  d.meta.name = std::move(name);
  d.meta.num_classes = num_classes;
  d.meta.generation = std::move(generation);
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) {
      throw Error(Errc::LabelOutOfRange, "label " + std::to_string(labels[i]) + " of graph " +
                                             std::to_string(i));
    }
    const Graph& g = graphs[i];
    if (i == 0) {
      d.meta.attr_dim = g.attr_dim();
    } else if (g.attr_dim() != d.meta.attr_dim) {
      throw Error(Errc::DimensionMismatch, "graphs disagree on attribute width");
    }
    d.meta.color_dim = std::max(d.meta.color_dim, attribute_groups(g).max_group_size());
    d.meta.max_degree = std::max(d.meta.max_degree, g.max_degree());
  }
  d.graphs = std::move(graphs);
  d.labels = std::move(labels);
  return d;
}

LabeledDataset subset(const LabeledDataset& d, std::span<const int> indices) {
  LabeledDataset out;
  out.meta = d.meta;
  out.graphs.reserve(indices.size());
  out.labels.reserve(indices.size());
  for (int i : indices) {
    out.graphs.push_back(d.graphs.at(i));
    out.labels.push_back(d.labels.at(i));
  }
  return out;
}

std::string_view task_name(PropertyTask t) noexcept {
  switch (t) {
    case PropertyTask::Connectivity: return "connectivity";
    case PropertyTask::Bipartiteness: return "bipartiteness";
    case PropertyTask::TriangleFreeness: return "triangle-free";
  }
  return "unknown";
}

PropertyTask parse_task(std::string_view name) {
  if (name == "connectivity") return PropertyTask::Connectivity;
  if (name == "bipartiteness" || name == "bipartite") return PropertyTask::Bipartiteness;
  if (name == "triangle-free" || name == "trianglefree" || name == "triangle-freeness") {
    return PropertyTask::TriangleFreeness;
  }
  throw Error(Errc::InvalidConfig, "unknown property task '" + std::string(name) + "'");
}

namespace {

std::vector<Edge> er_edges(int n, double p, Rng& rng, int offset = 0) {
  std::bernoulli_distribution coin(p);
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (coin(rng)) edges.emplace_back(i + offset, j + offset);
    }
  }
  return edges;
}

Graph constant_graph(int n, std::span<const Edge> edges) {
  return Graph::from_edges(constant_attrs(n), edges);
}

Graph with_edge(const Graph& g, Edge e) {
  auto edges = g.edges();
  edges.push_back(e);
  return Graph::from_edges(g.attrs(), edges);
}

// Component id per node, by BFS in ascending start order.
std::vector<int> components(const Graph& g) {
  std::vector<int> comp(g.size(), -1);
  int next = 0;
  std::queue<int> q;
  for (int s = 0; s < g.size(); ++s) {
    if (comp[s] != -1) continue;
    comp[s] = next;
    q.push(s);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v : g.neighbors_of(u)) {
        if (comp[v] == -1) {
          comp[v] = next;
          q.push(v);
        }
      }
    }
    ++next;
  }
  return comp;
}

LabeledDataset assemble(std::string name, std::vector<Graph> pos, std::vector<Graph> neg,
                        nlohmann::json generation) {
  std::vector<Graph> graphs = std::move(pos);
  std::vector<int> labels(graphs.size(), 1);
  for (auto& g : neg) {
    graphs.push_back(std::move(g));
    labels.push_back(0);
  }
  return make_dataset(std::move(name), std::move(graphs), std::move(labels), 2,
                      std::move(generation));
}

}  // namespace

Graph gen_er(int n, double p, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(Errc::InvalidConfig, "edge probability outside [0,1]");
  const auto edges = er_edges(n, p, rng);
  return constant_graph(n, edges);
}

LabeledDataset gen_connectivity_dataset(Rng& rng, int per_class) {
  constexpr int kHalf = 10;
  constexpr double kP = 0.5;
  auto connected_component = [&](int offset) {
    while (true) {
      auto edges = er_edges(kHalf, kP, rng);
      if (oracle_connected(constant_graph(kHalf, edges))) {
        for (auto& [a, b] : edges) {
          a += offset;
          b += offset;
        }
        return edges;
      }
    }
  };
  std::uniform_int_distribution<int> side(0, kHalf - 1);
  std::vector<Graph> pos, neg;
  for (int s = 0; s < per_class; ++s) {
    auto edges = connected_component(0);
    const auto second = connected_component(kHalf);
    edges.insert(edges.end(), second.begin(), second.end());
    pos.push_back(constant_graph(2 * kHalf, edges));
  }
  for (const Graph& g : pos) neg.push_back(with_edge(g, {side(rng), kHalf + side(rng)}));
  return assemble("connectivity", std::move(pos), std::move(neg),
                  {{"task", "connectivity"}, {"per_class", per_class}, {"component_nodes", kHalf},
                   {"p", kP}});
}

LabeledDataset gen_bipartiteness_dataset(Rng& rng, int per_class) {
  constexpr int kSide = 10;
  constexpr double kP = 0.5;
  constexpr int kPairAttempts = 1000;
  std::bernoulli_distribution coin(kP);
  std::uniform_int_distribution<int> pick(0, kSide - 1);
  std::uniform_int_distribution<int> which(0, 1);

  std::vector<Graph> pos, neg;
  while (static_cast<int>(pos.size()) < per_class) {
    std::vector<Edge> edges;
    for (int i = 0; i < kSide; ++i) {
      for (int j = 0; j < kSide; ++j) {
        if (coin(rng)) edges.emplace_back(i, kSide + j);
      }
    }
    Graph g = constant_graph(2 * kSide, edges);
    // Two same-side nodes in one component are joined by an even path, so the
    // extra edge closes an odd cycle.
    const auto comp = components(g);
    bool placed = false;
    for (int attempt = 0; attempt < kPairAttempts && !placed; ++attempt) {
      const int offset = which(rng) * kSide;
      const int u = offset + pick(rng);
      const int v = offset + pick(rng);
      if (u == v || comp[u] != comp[v]) continue;
      Graph bad = with_edge(g, {std::min(u, v), std::max(u, v)});
      if (oracle_bipartite(bad)) continue;
      neg.push_back(std::move(bad));
      placed = true;
    }
    if (placed) pos.push_back(std::move(g));
  }
  return assemble("bipartiteness", std::move(pos), std::move(neg),
                  {{"task", "bipartiteness"}, {"per_class", per_class}, {"side_nodes", kSide},
                   {"p", kP}});
}

LabeledDataset gen_trianglefree_dataset(Rng& rng, int per_class) {
  constexpr int kNodes = 20;
  constexpr double kP = 0.1;
  std::uniform_int_distribution<int> pick(0, kNodes - 1);
  std::vector<Graph> pos, neg;
  while (static_cast<int>(pos.size()) < per_class) {
    Graph g = gen_er(kNodes, kP, rng);
    if (oracle_triangle_free(g)) pos.push_back(std::move(g));
  }
  for (const Graph& g : pos) {
    Graph cur = g;
    while (oracle_triangle_free(cur)) {
      const int u = pick(rng);
      const int v = pick(rng);
      if (u == v || cur.adjacent(u, v)) continue;
      cur = with_edge(cur, {std::min(u, v), std::max(u, v)});
    }
    neg.push_back(std::move(cur));
  }
  return assemble("triangle-free", std::move(pos), std::move(neg),
                  {{"task", "triangle-free"}, {"per_class", per_class}, {"nodes", kNodes},
                   {"p", kP}});
}

LabeledDataset gen_property_dataset(PropertyTask task, Rng& rng, int per_class) {
  switch (task) {
    case PropertyTask::Connectivity: return gen_connectivity_dataset(rng, per_class);
    case PropertyTask::Bipartiteness: return gen_bipartiteness_dataset(rng, per_class);
    case PropertyTask::TriangleFreeness: return gen_trianglefree_dataset(rng, per_class);
  }
  throw Error(Errc::InvalidConfig, "unknown property task");
}

bool oracle_connected(const Graph& g) {
  std::vector<char> seen(g.size(), 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int v : g.neighbors_of(u)) {
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        q.push(v);
      }
    }
  }
  return reached == g.size();
}

bool oracle_bipartite(const Graph& g) {
  std::vector<int> side(g.size(), -1);
  std::queue<int> q;
  for (int s = 0; s < g.size(); ++s) {
    if (side[s] != -1) continue;
    side[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v : g.neighbors_of(u)) {
        if (side[v] == -1) {
          side[v] = 1 - side[u];
          q.push(v);
        } else if (side[v] == side[u]) {
          return false;
        }
      }
    }
  }
  return true;
}

bool oracle_triangle_free(const Graph& g) {
  const int n = g.size();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (!g.adjacent(i, j)) continue;
      for (int l = j + 1; l < n; ++l) {
        if (g.adjacent(j, l) && g.adjacent(i, l)) return false;
      }
    }
  }
  return true;
}

int oracle_label(PropertyTask task, const Graph& g) {
  switch (task) {
    case PropertyTask::Connectivity: return oracle_connected(g) ? 0 : 1;
    case PropertyTask::Bipartiteness: return oracle_bipartite(g) ? 1 : 0;
    case PropertyTask::TriangleFreeness: return oracle_triangle_free(g) ? 1 : 0;
  }
  return -1;
}

Graph csl_graph(int n, int k) {
  if (n < 5 || k < 2 || k > (n - 1) / 2) {
    throw Error(Errc::DegenerateSkipLink, "skip " + std::to_string(k) + " invalid for n = " +
                                              std::to_string(n) + " (need 2 <= k <= (n-1)/2)");
  }
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    edges.emplace_back(i, (i + 1) % n);
    edges.emplace_back(i, (i + k) % n);
  }
  return constant_graph(n, edges);
}

std::vector<double> adjacency_spectrum(const Graph& g) {
  const int n = g.size();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j : g.neighbors_of(i)) a(i, j) = 1.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  std::vector<double> out(ev.data(), ev.data() + ev.size());
  std::sort(out.begin(), out.end());
  return out;
}

bool same_spectrum(std::span<const double> a, std::span<const double> b, double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > tol) return false;
  }
  return true;
}

LabeledDataset gen_csl_dataset(std::span<const int> ks, int copies, Rng& rng, int n) {
  if (copies < 1) throw Error(Errc::InvalidConfig, "copies must be positive");
  std::vector<Graph> bases;
  std::vector<std::vector<double>> spectra;
  for (int k : ks) {
    bases.push_back(csl_graph(n, k));
    spectra.push_back(adjacency_spectrum(bases.back()));
  }
  for (std::size_t a = 0; a < ks.size(); ++a) {
    for (std::size_t b = a + 1; b < ks.size(); ++b) {
      if (same_spectrum(spectra[a], spectra[b])) {
        throw Error(Errc::IsomorphicSkipValues, "skips " + std::to_string(ks[a]) + " and " +
                                                    std::to_string(ks[b]) + " are cospectral");
      }
    }
  }
  std::vector<Graph> graphs;
  std::vector<int> labels;
  std::vector<int> perm(n);
  for (std::size_t c = 0; c < bases.size(); ++c) {
    for (int copy = 0; copy < copies; ++copy) {
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      graphs.push_back(permute(bases[c], perm));
      labels.push_back(static_cast<int>(c));
    }
  }
  return make_dataset("csl", std::move(graphs), std::move(labels), static_cast<int>(ks.size()),
                      {{"task", "csl"},
                       {"nodes", n},
                       {"skips", std::vector<int>(ks.begin(), ks.end())},
                       {"copies", copies}});
}

// ---------------------------------------------------------------------------
// TU format

namespace {

fs::path tu_file(const fs::path& root, const std::string& name, const char* suffix) {
  return root / (name + suffix);
}

struct LineReader {
  explicit LineReader(const fs::path& p) : path(p), in(p) {
    if (!in) throw Error(Errc::MissingFile, "cannot open " + p.string());
  }

  // Next non-blank line split on commas/whitespace into integers.
  bool next(std::vector<long long>& values) {
    std::string line;
    while (std::getline(in, line)) {
      ++number;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      values.clear();
      for (char& ch : line) {
        if (ch == ',') ch = ' ';
      }
      std::istringstream ss(line);
      long long v;
      while (ss >> v) values.push_back(v);
      ss >> std::ws;
      if (!ss.eof() || values.empty()) fail("not a list of integers");
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw Error(Errc::MalformedLine, path.filename().string() + ":" + std::to_string(number) +
                                         ": " + why);
  }

  fs::path path;
  std::ifstream in;
  int number = 0;
};

std::vector<long long> read_column(const fs::path& p) {
  LineReader r(p);
  std::vector<long long> out;
  std::vector<long long> values;
  while (r.next(values)) out.push_back(values.front());
  return out;
}

}  // namespace

LabeledDataset parse_tu_dataset(const fs::path& root, const std::string& name) {
  const auto indicator_path = tu_file(root, name, "_graph_indicator.txt");
  const auto indicator = read_column(indicator_path);
  const auto graph_labels = read_column(tu_file(root, name, "_graph_labels.txt"));
  const std::size_t num_nodes = indicator.size();
  const std::size_t num_graphs = graph_labels.size();

  // Graph ids must run 1..G in node order without gaps.
  std::vector<std::size_t> first_node(num_graphs + 1, num_nodes);
  long long prev = 0;
  for (std::size_t v = 0; v < num_nodes; ++v) {
    const long long gid = indicator[v];
    if (gid < 1 || (gid != prev && gid != prev + 1)) {
      throw Error(Errc::NonContiguousGraphIds,
                  "node " + std::to_string(v + 1) + " jumps from graph " + std::to_string(prev) +
                      " to " + std::to_string(gid));
    }
    if (gid != prev) first_node[gid - 1] = v;
    prev = gid;
  }
  if (static_cast<std::size_t>(prev) != num_graphs) {
    throw Error(Errc::NonContiguousGraphIds, "indicator names " + std::to_string(prev) +
                                                 " graphs, labels file has " +
                                                 std::to_string(num_graphs));
  }

  std::vector<std::vector<Edge>> edges(num_graphs);
  {
    LineReader r(tu_file(root, name, "_A.txt"));
    std::vector<long long> values;
    while (r.next(values)) {
      if (values.size() != 2) r.fail("expected two node ids");
      const long long a = values[0];
      const long long b = values[1];
      if (a < 1 || b < 1 || static_cast<std::size_t>(a) > num_nodes ||
          static_cast<std::size_t>(b) > num_nodes) {
        r.fail("node id out of range");
      }
      const long long ga = indicator[a - 1];
      const long long gb = indicator[b - 1];
      if (ga != gb) {
        throw Error(Errc::DanglingEdge, "edge (" + std::to_string(a) + "," + std::to_string(b) +
                                            ") joins graphs " + std::to_string(ga) + " and " +
                                            std::to_string(gb));
      }
      const auto base = static_cast<long long>(first_node[ga - 1]);
      edges[ga - 1].emplace_back(static_cast<int>(a - 1 - base), static_cast<int>(b - 1 - base));
    }
  }

  const auto node_labels_path = tu_file(root, name, "_node_labels.txt");
  const bool labeled = fs::exists(node_labels_path);
  std::vector<long long> node_labels;
  long long max_label = 0;
  if (labeled) {
    node_labels = read_column(node_labels_path);
    if (node_labels.size() != num_nodes) {
      throw Error(Errc::MalformedLine, node_labels_path.filename().string() + ": " +
                                           std::to_string(node_labels.size()) +
                                           " labels for " + std::to_string(num_nodes) + " nodes");
    }
    for (long long l : node_labels) {
      if (l < 0) throw Error(Errc::MalformedLine, "negative node label");
      max_label = std::max(max_label, l);
    }
  }

  std::vector<Graph> graphs;
  graphs.reserve(num_graphs);
  for (std::size_t gi = 0; gi < num_graphs; ++gi) {
    const std::size_t begin = first_node[gi];
    const std::size_t end = first_node[gi + 1];
    const std::size_t n = end - begin;
    Matrix attrs(n, labeled ? static_cast<std::size_t>(max_label) + 1 : 1, 0.0);
    if (labeled) {
      for (std::size_t v = 0; v < n; ++v) attrs(v, node_labels[begin + v]) = 1.0;
    }
    graphs.push_back(Graph::from_edges(std::move(attrs), edges[gi]));
  }
  if (!labeled) {
    int max_degree = 0;
    for (const auto& g : graphs) max_degree = std::max(max_degree, g.max_degree());
    for (auto& g : graphs) g = degree_one_hot(g, max_degree);
  }

  std::map<long long, int> classes;
  for (long long l : graph_labels) classes.emplace(l, 0);
  int next = 0;
  for (auto& [raw, idx] : classes) idx = next++;
  std::vector<int> labels;
  labels.reserve(num_graphs);
  for (long long l : graph_labels) labels.push_back(classes.at(l));

  std::string dataset_name = name;
  nlohmann::json generation = nullptr;
  const auto meta_path = tu_file(root, name, "_meta.json");
  if (fs::exists(meta_path)) {
    std::ifstream in(meta_path);
    nlohmann::json meta;
    try {
      in >> meta;
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::MalformedLine, meta_path.filename().string() + ": " + e.what());
    }
    if (meta.contains("name")) dataset_name = meta.at("name").get<std::string>();
    if (meta.contains("generation")) generation = meta.at("generation");
  }
  return make_dataset(std::move(dataset_name), std::move(graphs), std::move(labels), next,
                      std::move(generation));
}

void serialize_tu_dataset(const LabeledDataset& d, const fs::path& root, const std::string& name,
                          NodeLabels mode) {
  fs::create_directories(root);
  auto open = [&](const char* suffix) {
    std::ofstream out(tu_file(root, name, suffix));
    if (!out) throw Error(Errc::MissingFile, "cannot write " + tu_file(root, name, suffix).string());
    return out;
  };

  std::vector<int> hot;
  if (mode == NodeLabels::Write) {
    for (const Graph& g : d.graphs) {
      for (int v = 0; v < g.size(); ++v) {
        const auto row = g.attrs().row(v);
        int index = -1;
        for (std::size_t c = 0; c < row.size(); ++c) {
          if (row[c] == 1.0 && index == -1) {
            index = static_cast<int>(c);
          } else if (row[c] != 0.0) {
            index = -2;
            break;
          }
        }
        if (index < 0) {
          throw Error(Errc::UnsupportedAttributes, "node attributes are not one-hot rows");
        }
        hot.push_back(index);
      }
    }
  }

  auto a = open("_A.txt");
  auto ind = open("_graph_indicator.txt");
  auto gl = open("_graph_labels.txt");
  std::size_t base = 0;
  for (std::size_t gi = 0; gi < d.graphs.size(); ++gi) {
    const Graph& g = d.graphs[gi];
    for (int v = 0; v < g.size(); ++v) {
      ind << gi + 1 << '\n';
      for (int u : g.neighbors_of(v)) a << base + v + 1 << ", " << base + u + 1 << '\n';
    }
    gl << d.labels[gi] << '\n';
    base += static_cast<std::size_t>(g.size());
  }
  if (mode == NodeLabels::Write) {
    auto nl = open("_node_labels.txt");
    for (int h : hot) nl << h << '\n';
  }
  if (!d.meta.generation.is_null()) {
    auto meta = open("_meta.json");
    meta << nlohmann::json{{"name", d.meta.name}, {"generation", d.meta.generation}}.dump(2)
         << '\n';
  }
}

std::string find_tu_name(const fs::path& root) {
  if (!fs::is_directory(root)) throw Error(Errc::MissingFile, root.string() + " is not a directory");
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(root)) {
    const std::string file = entry.path().filename().string();
    constexpr std::string_view kSuffix = "_A.txt";
    if (file.size() > kSuffix.size() && file.ends_with(kSuffix)) {
      names.push_back(file.substr(0, file.size() - kSuffix.size()));
    }
  }
  if (names.size() != 1) {
    throw Error(Errc::MissingFile, root.string() + " must hold exactly one *_A.txt, found " +
                                       std::to_string(names.size()));
  }
  return names.front();
}

std::vector<int> FoldPlan::train_indices(std::size_t f) const {
  std::vector<int> out;
  for (std::size_t g = 0; g < folds.size(); ++g) {
    if (g != f) out.insert(out.end(), folds[g].begin(), folds[g].end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

FoldPlan stratified_folds(const LabeledDataset& d, int folds, Rng& rng) {
  if (folds < 2) throw Error(Errc::InvalidConfig, "need at least two folds");
  std::vector<std::vector<int>> by_class(static_cast<std::size_t>(d.meta.num_classes));
  for (std::size_t i = 0; i < d.size(); ++i) by_class[d.labels[i]].push_back(static_cast<int>(i));
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    if (static_cast<int>(by_class[c].size()) < folds) {
      throw Error(Errc::ClassTooSmall, "class " + std::to_string(c) + " has " +
                                           std::to_string(by_class[c].size()) +
                                           " members for " + std::to_string(folds) + " folds");
    }
  }
  FoldPlan plan;
  plan.folds.resize(static_cast<std::size_t>(folds));
  std::size_t cursor = 0;
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    for (int idx : members) {
      plan.folds[cursor % plan.folds.size()].push_back(idx);
      ++cursor;
    }
  }
  for (auto& f : plan.folds) std::sort(f.begin(), f.end());
  return plan;
}

}  // namespace clip
