#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "clip/checkpoint.hpp"
#include "clip/datasets.hpp"
#include "clip/error.hpp"
#include "clip/gradcheck.hpp"
#include "clip/harness.hpp"

namespace clip {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Fills options of `sub` not given on the command line from a flat JSON
// object keyed by long option name; arrays supply several values.
void apply_config(CLI::App* sub, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw UsageError("config file is not valid JSON: " + std::string(e.what()));
  }
  if (!j.is_object()) throw UsageError("config file must hold a JSON object");
  auto text = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
  for (const auto& [key, value] : j.items()) {
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config") throw UsageError("unknown config key '" + key + "'");
    if (opt->count() > 0) continue;
    if (value.is_array()) {
      for (const auto& v : value) opt->add_result(text(v));
    } else {
      opt->add_result(text(value));
    }
    opt->run_callback();
  }
}

struct Options {
  // dataset
  std::string dataset;
  std::string name;
  std::string out = ".";
  std::uint64_t seed = 1;
  int threads = 1;
  int folds = 10;
  int holdout_fold = 0;
  std::string config;
  // model and schedule; commands other than grid take one value per list
  std::vector<std::string> k{"16"};
  std::vector<int> hops{3};
  std::vector<int> hidden{16};
  std::vector<int> batch_size{32};
  std::vector<int> epochs{400};
  std::vector<double> lr{1e-3};
  int eval_samples = 1;
  int mlp_layers = 2;
  int halving_period = 50;
  int patience = 50;
  std::string activation = "relu";
  bool jumping_knowledge = false;
  // gen
  std::string task;
  int per_class = 500;
  int copies = 15;
  int nodes = 41;
  std::vector<int> skips{kDefaultCslSkips.begin(), kDefaultCslSkips.end()};
  // gradcheck
  GradcheckOptions gradcheck;
  std::string gradcheck_activation = "tanh";
};

int parse_k(const std::string& s) {
  if (s == "inf" || s == "all") return kAllColorings;
  try {
    std::size_t used = 0;
    const int k = std::stoi(s, &used);
    if (used == s.size() && k >= 0) return k;
  } catch (const std::exception&) {
  }
  throw UsageError("--k expects a non-negative integer or 'inf', got '" + s + "'");
}

template <class T>
const T& single(const std::vector<T>& v, const char* flag) {
  if (v.size() != 1) {
    throw UsageError(std::string("--") + flag + " takes a single value here; use `grid` for lists");
  }
  return v.front();
}

void add_dataset_options(CLI::App* sub, Options& o) {
  sub->add_option("--dataset", o.dataset, "Directory holding a TU-format dataset")
      ->required()
      ->check(CLI::ExistingDirectory);
  sub->add_option("--name", o.name, "Dataset name (file prefix); detected when omitted");
}

void add_model_options(CLI::App* sub, Options& o, bool lists) {
  auto list = [&](CLI::Option* opt) {
    if (lists) opt->delimiter(',');
    return opt;
  };
  list(sub->add_option("--k", o.k, "Colorings per forward pass: 0, a count, or inf"))
      ->capture_default_str();
  list(sub->add_option("--T", o.hops, "Aggregation rounds"))->capture_default_str();
  list(sub->add_option("--hidden", o.hidden, "MLP width"))->capture_default_str();
  list(sub->add_option("--batch-size", o.batch_size, "Mini-batch size"))->capture_default_str();
  list(sub->add_option("--epochs", o.epochs, "Training epochs"))->capture_default_str();
  list(sub->add_option("--lr", o.lr, "Initial Adam learning rate"))->capture_default_str();
  sub->add_option("--eval-samples", o.eval_samples, "Coloring samples averaged at evaluation")
      ->capture_default_str();
  sub->add_option("--mlp-layers", o.mlp_layers, "Weight layers per MLP")->capture_default_str();
  sub->add_option("--halving-period", o.halving_period, "Epochs between learning-rate halvings")
      ->capture_default_str();
  sub->add_option("--patience", o.patience, "Early-stopping patience in epochs (0 disables)")
      ->capture_default_str();
  sub->add_option("--activation", o.activation, "relu or tanh")
      ->check(CLI::IsMember({"relu", "tanh"}))
      ->capture_default_str();
  sub->add_flag("--jk", o.jumping_knowledge, "Read out node sums of every hop");
  sub->add_option("--seed", o.seed, "Master seed")->capture_default_str();
  sub->add_option("--threads", o.threads, "Worker threads (default $CLIP_THREADS or 1)");
  sub->add_option("--folds", o.folds, "Cross-validation folds")->capture_default_str();
  sub->add_option("--out", o.out, "Output directory")->capture_default_str();
  sub->add_option("--config", o.config, "JSON file with option values (flags take precedence)")
      ->check(CLI::ExistingFile);
}

LabeledDataset load(const Options& o) {
  const std::string name = o.name.empty() ? find_tu_name(o.dataset) : o.name;
  return parse_tu_dataset(o.dataset, name);
}

std::vector<GridCell> cells(const Options& o, const DatasetMeta& meta) {
  std::vector<GridCell> grid;
  for (const auto& k : o.k) {
    for (int hops : o.hops) {
      for (int hidden : o.hidden) {
        for (int batch : o.batch_size) {
          for (int epochs : o.epochs) {
            for (double lr : o.lr) {
              ClipConfig c;
              c.colorings = parse_k(k);
              c.hops = hops;
              c.hidden = hidden;
              c.eval_samples = o.eval_samples;
              c.mlp_layers = o.mlp_layers;
              c.activation = parse_activation(o.activation);
              c.jumping_knowledge = o.jumping_knowledge;
              TrainSchedule s;
              s.epochs = epochs;
              s.batch_size = batch;
              s.base_lr = lr;
              s.halving_period = o.halving_period;
              s.patience = o.patience;
              grid.push_back({configure_for(c, meta), s});
            }
          }
        }
      }
    }
  }
  return grid;
}

void require_single(const Options& o) {
  parse_k(single(o.k, "k"));
  single(o.hops, "T");
  single(o.hidden, "hidden");
  single(o.batch_size, "batch-size");
  single(o.epochs, "epochs");
  single(o.lr, "lr");
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::MissingFile, "cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

int cmd_gen(const Options& o, std::ostream& out) {
  Rng rng(o.seed);
  LabeledDataset d;
  if (o.task == "csl") {
    d = gen_csl_dataset(o.skips, o.copies, rng, o.nodes);
  } else {
    d = gen_property_dataset(parse_task(o.task), rng, o.per_class);
  }
  d.meta.generation["seed"] = o.seed;
  d.meta.generation["rng"] = "mt19937_64";
  const std::string name = o.name.empty() ? d.meta.name : o.name;
  serialize_tu_dataset(d, o.out, name);
  out << "wrote " << d.size() << " graphs to " << (fs::path(o.out) / (name + "_*.txt")).string()
      << "\n";
  return 0;
}

int cmd_train(const Options& o, std::ostream& out) {
  require_single(o);
  const LabeledDataset d = load(o);
  const GridCell cell = cells(o, d.meta).front();
  Rng rng(o.seed);
  const FoldPlan plan = stratified_folds(d, o.folds, rng);
  if (o.holdout_fold < 0 || o.holdout_fold >= o.folds) {
    throw UsageError("--holdout-fold must lie in [0, folds)");
  }
  const auto f = static_cast<std::size_t>(o.holdout_fold);
  const auto train_idx = plan.train_indices(f);
  const TrainOutcome t = train(cell.config, cell.schedule, d, train_idx, plan.folds[f], rng);

  fs::create_directories(o.out);
  json j = {{"dataset", d.meta.name},
            {"config", config_to_json(cell.config)},
            {"schedule", schedule_to_json(cell.schedule)},
            {"seed", o.seed},
            {"holdout_fold", o.holdout_fold},
            {"eval_indices", plan.folds[f]},
            {"initial_accuracy", t.initial_accuracy},
            {"eval_curve", t.eval_curve},
            {"train_loss", t.train_loss},
            {"stopped_early", t.stopped_early},
            {"final_accuracy", t.eval_curve.back()}};
  write_json(fs::path(o.out) / "results.json", j);
  std::string csv = "epoch,train_loss,eval_accuracy\n";
  for (std::size_t e = 0; e < t.eval_curve.size(); ++e) {
    csv += std::to_string(e + 1) + "," + json(t.train_loss[e]).dump() + "," +
           json(t.eval_curve[e]).dump() + "\n";
  }
  write_file(fs::path(o.out) / "results.csv", csv);
  save_model(t.model, fs::path(o.out) / "model.json");
  out << "fold " << o.holdout_fold << ": final accuracy " << t.eval_curve.back() << " after "
      << t.eval_curve.size() << " epochs\n";
  return 0;
}

int cmd_cv(const Options& o, std::ostream& out) {
  require_single(o);
  const LabeledDataset d = load(o);
  const GridCell cell = cells(o, d.meta).front();
  Rng rng(o.seed);
  const CvResult r = cross_validate(cell.config, cell.schedule, d, rng, o.folds, o.threads);
  fs::create_directories(o.out);
  json j = cv_to_json(r);
  j["seed"] = o.seed;
  write_json(fs::path(o.out) / "results.json", j);
  const std::vector<GridRow> rows = {{0, r}};
  write_file(fs::path(o.out) / "results.csv", grid_csv(rows));
  out << "mean " << r.mean << " std " << r.std << " at epoch " << r.selected_epoch << "\n";
  return 0;
}

int cmd_grid(const Options& o, std::ostream& out) {
  for (const auto& k : o.k) parse_k(k);
  const LabeledDataset d = load(o);
  const auto grid = cells(o, d.meta);
  Rng rng(o.seed);
  const auto rows = grid_search(grid, d, rng, o.folds, o.threads);
  fs::create_directories(o.out);
  json j = {{"dataset", d.meta.name}, {"seed", o.seed}, {"rows", json::array()}};
  for (const auto& row : rows) j["rows"].push_back({{"cell", row.cell}, {"result", cv_to_json(row.result)}});
  write_json(fs::path(o.out) / "results.json", j);
  write_file(fs::path(o.out) / "results.csv", grid_csv(rows));
  out << grid_csv(rows);
  return 0;
}

int cmd_oracle_check(const Options& o, std::ostream& out) {
  LabeledDataset d;
  std::string task = o.task;
  if (!o.dataset.empty()) {
    d = load(o);
    if (task.empty() && d.meta.generation.is_object() && d.meta.generation.contains("task")) {
      task = d.meta.generation.at("task").get<std::string>();
    }
  }
  if (task.empty()) throw UsageError("--task is required when the dataset does not record one");
  if (task == "csl") throw UsageError("oracle-check covers the property tasks only");
  const PropertyTask t = parse_task(task);
  if (o.dataset.empty()) {
    Rng rng(o.seed);
    d = gen_property_dataset(t, rng, o.per_class);
  }
  std::size_t disagree = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (oracle_label(t, d.graphs[i]) != d.labels[i]) {
      if (disagree < 10) out << "graph " << i << ": label " << d.labels[i] << " disagrees\n";
      ++disagree;
    }
  }
  out << task << ": " << d.size() - disagree << "/" << d.size() << " labels agree with the oracle\n";
  return disagree == 0 ? 0 : 1;
}

int cmd_gradcheck(Options o, std::ostream& out) {
  o.gradcheck.activation = parse_activation(o.gradcheck_activation);
  o.gradcheck.seed = o.seed;
  const GradcheckReport r = run_gradcheck(o.gradcheck);
  out << json{{"configs", r.configs},
              {"skipped_ties", r.skipped_ties},
              {"entries", r.entries},
              {"failures", r.failures},
              {"max_rel_error", r.max_rel_error},
              {"passed", r.passed()}}
             .dump(2)
      << "\n";
  return r.passed() ? 0 : 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"CLIP: colored local iterative procedure graph networks"};
  app.name("clip");
  app.require_subcommand(1);
  Options o;
  o.threads = default_thread_count();

  auto* gen = app.add_subcommand("gen", "Write a synthetic dataset in TU layout");
  gen->add_option("--task", o.task, "connectivity, bipartiteness, triangle-free or csl")
      ->required()
      ->check(CLI::IsMember({"connectivity", "bipartiteness", "triangle-free", "csl"}));
  gen->add_option("--seed", o.seed, "Generator seed")->capture_default_str();
  gen->add_option("--out", o.out, "Output directory")->required();
  gen->add_option("--name", o.name, "File prefix (default: task name)");
  gen->add_option("--per-class", o.per_class, "Graphs per class (property tasks)")
      ->capture_default_str();
  gen->add_option("--copies", o.copies, "Relabelings per skip value (csl)")->capture_default_str();
  gen->add_option("--nodes", o.nodes, "Cycle length (csl)")->capture_default_str();
  gen->add_option("--skips", o.skips, "Skip values, one class each (csl)")->delimiter(',');

  auto* tr = app.add_subcommand("train", "Train on all folds but one and evaluate on it");
  add_dataset_options(tr, o);
  add_model_options(tr, o, false);
  tr->add_option("--holdout-fold", o.holdout_fold, "Fold used for evaluation")
      ->capture_default_str();

  auto* cv = app.add_subcommand("cv", "Stratified k-fold cross-validation");
  add_dataset_options(cv, o);
  add_model_options(cv, o, false);

  auto* grid = app.add_subcommand("grid", "Cross-validate every combination of list options");
  add_dataset_options(grid, o);
  add_model_options(grid, o, true);

  auto* oracle = app.add_subcommand("oracle-check", "Compare dataset labels with brute-force oracles");
  oracle->add_option("--dataset", o.dataset, "TU dataset directory (generated when omitted)")
      ->check(CLI::ExistingDirectory);
  oracle->add_option("--name", o.name, "Dataset name (file prefix)");
  oracle->add_option("--task", o.task, "Property task; read from the dataset metadata if omitted");
  oracle->add_option("--seed", o.seed, "Seed when generating")->capture_default_str();
  oracle->add_option("--per-class", o.per_class, "Graphs per class when generating")
      ->capture_default_str();

  auto* grad = app.add_subcommand("gradcheck", "Finite-difference check of end-to-end gradients");
  grad->add_option("--configs", o.gradcheck.configs, "Configurations to compare")
      ->capture_default_str();
  grad->add_option("--seed", o.seed, "Seed")->capture_default_str();
  grad->add_option("--max-nodes", o.gradcheck.max_nodes)->capture_default_str();
  grad->add_option("--max-hops", o.gradcheck.max_hops)->capture_default_str();
  grad->add_option("--max-width", o.gradcheck.max_width)->capture_default_str();
  grad->add_option("--rel-tol", o.gradcheck.rel_tol)->capture_default_str();
  grad->add_option("--activation", o.gradcheck_activation)
      ->check(CLI::IsMember({"relu", "tanh"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    for (CLI::App* sub : {tr, cv, grid}) {
      if (*sub && !o.config.empty()) apply_config(sub, o.config);
    }
    if (*gen) return cmd_gen(o, out);
    if (*tr) return cmd_train(o, out);
    if (*cv) return cmd_cv(o, out);
    if (*grid) return cmd_grid(o, out);
    if (*oracle) return cmd_oracle_check(o, out);
    if (*grad) return cmd_gradcheck(o, out);
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace clip
