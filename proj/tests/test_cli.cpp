#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "cli.hpp"
#include "clip/checkpoint.hpp"
#include "clip/datasets.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "clip");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = clip::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

struct Workspace {
  fs::path root = fs::temp_directory_path() / ("clip_cli_" + std::to_string(::getpid()));
  Workspace() {
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~Workspace() { fs::remove_all(root); }
  std::string operator/(const std::string& leaf) const { return (root / leaf).string(); }
};

}  // namespace

TEST_CASE("gen writes a TU dataset with its seed") {
  Workspace ws;
  auto r = run({"gen", "--task", "connectivity", "--seed", "7", "--out", ws / "d", "--per-class", "40"});
  REQUIRE(r.code == 0);
  for (const char* f : {"_A.txt", "_graph_indicator.txt", "_graph_labels.txt", "_node_labels.txt", "_meta.json"})
    CHECK(fs::exists(ws.root / "d" / (std::string("connectivity") + f)));
  auto meta = read_json(ws.root / "d" / "connectivity_meta.json");
  CHECK(meta["generation"]["seed"] == 7);
  CHECK(meta["generation"]["task"] == "connectivity");

  auto d = clip::parse_tu_dataset(ws.root / "d", "connectivity");
  clip::Rng rng(7);
  auto direct = clip::gen_connectivity_dataset(rng, 40);
  CHECK(d.graphs == direct.graphs);
  CHECK(d.labels == direct.labels);

  auto check = run({"oracle-check", "--dataset", ws / "d"});
  CHECK(check.code == 0);
  CHECK(check.out.find("80/80") != std::string::npos);

  CHECK(run({"gen", "--task", "csl", "--copies", "2", "--out", ws / "csl"}).code == 0);
  CHECK(clip::parse_tu_dataset(ws.root / "csl", "csl").size() == 20);
}

TEST_CASE("oracle-check flags wrong labels") {
  Workspace ws;
  REQUIRE(run({"gen", "--task", "bipartiteness", "--out", ws / "d", "--per-class", "10"}).code == 0);
  auto labels = ws.root / "d" / "bipartiteness_graph_labels.txt";
  std::string text;
  {
    std::ifstream in(labels);
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  text[0] = text[0] == '1' ? '0' : '1';
  std::ofstream(labels) << text;
  CHECK(run({"oracle-check", "--dataset", ws / "d"}).code == 1);
  CHECK(run({"oracle-check", "--task", "triangle-free", "--per-class", "20"}).code == 0);
}

TEST_CASE("cv output is reproducible") {
  Workspace ws;
  REQUIRE(run({"gen", "--task", "triangle-free", "--seed", "3", "--out", ws / "d", "--per-class", "20"}).code == 0);
  std::vector<std::string> args = {"cv", "--dataset", ws / "d", "--k", "2", "--T", "2", "--hidden", "6",
                                   "--epochs", "3", "--folds", "4", "--seed", "5"};
  auto a = args, b = args;
  a.insert(a.end(), {"--out", ws / "a"});
  b.insert(b.end(), {"--out", ws / "b", "--threads", "2"});
  REQUIRE(run(a).code == 0);
  REQUIRE(run(b).code == 0);
  auto ja = read_json(ws.root / "a" / "results.json"), jb = read_json(ws.root / "b" / "results.json");
  CHECK(ja["seconds"].is_number());
  ja.erase("seconds");
  jb.erase("seconds");
  CHECK(ja.dump() == jb.dump());
  CHECK(ja["fold_curves"].size() == 4);
  CHECK(ja["config"]["colorings"] == 2);
  CHECK(fs::exists(ws.root / "a" / "results.csv"));
}

TEST_CASE("train writes a loadable model") {
  Workspace ws;
  REQUIRE(run({"gen", "--task", "connectivity", "--out", ws / "d", "--per-class", "20"}).code == 0);
  auto r = run({"train", "--dataset", ws / "d", "--k", "inf", "--T", "1", "--hidden", "4", "--epochs", "2",
                "--holdout-fold", "3", "--out", ws / "t"});
  // 20! colorings cannot be enumerated
  CHECK(r.code == 1);
  r = run({"train", "--dataset", ws / "d", "--k", "1", "--T", "1", "--hidden", "4", "--epochs", "2",
           "--holdout-fold", "3", "--out", ws / "t"});
  REQUIRE(r.code == 0);
  auto m = clip::load_model(ws.root / "t" / "model.json");
  CHECK(m.config.hidden == 4);
  auto res = read_json(ws.root / "t" / "results.json");
  CHECK(res["holdout_fold"] == 3);
  CHECK(res["eval_curve"].size() == 2);
  CHECK(run({"train", "--dataset", ws / "d", "--holdout-fold", "10", "--epochs", "1"}).code == 2);
}

TEST_CASE("grid reads a JSON config and ranks every cell") {
  Workspace ws;
  REQUIRE(run({"gen", "--task", "connectivity", "--out", ws / "d", "--per-class", "15"}).code == 0);
  std::ofstream(ws / "grid.json") << R"({"k": [0, 1], "T": 1, "hidden": [3, 5], "epochs": 2, "folds": 3})";
  auto r = run({"grid", "--dataset", ws / "d", "--config", ws / "grid.json", "--hidden", "4", "--out", ws / "g"});
  REQUIRE(r.code == 0);
  auto j = read_json(ws.root / "g" / "results.json");
  REQUIRE(j["rows"].size() == 2);  // --hidden on the command line wins
  for (const auto& row : j["rows"]) {
    CHECK(row["result"]["config"]["hidden"] == 4);
    CHECK(row["result"]["schedule"]["epochs"] == 2);
    CHECK(row["result"]["fold_curves"].size() == 3);
  }
  std::ofstream(ws / "bad.json") << R"({"colours": 3})";
  CHECK(run({"grid", "--dataset", ws / "d", "--config", ws / "bad.json"}).code == 2);
}

TEST_CASE("usage errors exit with 2") {
  Workspace ws;
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  auto r = run({"gen", "--task", "connectivity", "--out", ws / "d", "--bogus"});
  CHECK(r.code == 2);
  CHECK_FALSE(r.err.empty());
  CHECK(run({"gen", "--task", "planarity", "--out", ws / "d"}).code == 2);
  CHECK(run({"cv", "--dataset", ws.root.string(), "--k", "0,1"}).code == 2);
  CHECK(run({"cv", "--dataset", ws / "missing"}).code == 2);
  CHECK(run({"--help"}).code == 0);
  // runtime failures exit with 1
  CHECK(run({"cv", "--dataset", ws.root.string()}).code == 1);
}

TEST_CASE("gradcheck") {
  auto r = run({"gradcheck", "--configs", "10", "--seed", "3"});
  CHECK(r.code == 0);
  auto j = json::parse(r.out);
  CHECK(j["configs"] == 10);
  CHECK(j["failures"] == 0);
}
