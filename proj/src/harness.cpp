#include "clip/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <thread>

#include "clip/checkpoint.hpp"
#include "clip/error.hpp"

namespace clip {

void TrainSchedule::validate() const {
  if (epochs < 1) throw Error(Errc::InvalidConfig, "epochs must be positive");
  if (batch_size < 1) throw Error(Errc::InvalidConfig, "batch size must be positive");
  if (!(base_lr > 0.0)) throw Error(Errc::InvalidConfig, "learning rate must be positive");
  if (halving_period < 1) throw Error(Errc::InvalidConfig, "halving period must be positive");
  if (patience < 0) throw Error(Errc::InvalidConfig, "patience must be non-negative");
}

ClipConfig configure_for(ClipConfig base, const DatasetMeta& meta) {
  base.attr_dim = meta.attr_dim;
  base.num_classes = meta.num_classes;
  base.color_dim = base.colorings == 0 ? 0 : meta.color_dim;
  return base;
}

double accuracy(const ClipModel& model, const LabeledDataset& d, std::span<const int> indices,
                int eval_samples, Rng& rng) {
  if (indices.empty()) return 0.0;
  std::size_t hits = 0;
  for (int i : indices) {
    if (predict(model, d.graphs[i], eval_samples, rng) == d.labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(indices.size());
}

namespace {

void check_compatible(const ClipConfig& c, const DatasetMeta& meta) {
  c.validate();
  if (c.attr_dim != meta.attr_dim) {
    throw Error(Errc::InvalidConfig, "config attribute width differs from dataset");
  }
  if (c.num_classes < meta.num_classes) {
    throw Error(Errc::InvalidConfig, "config has fewer classes than the dataset");
  }
  if (c.colorings != 0 && c.color_dim < meta.color_dim) {
    throw Error(Errc::ColorDimTooSmall, "color_dim " + std::to_string(c.color_dim) +
                                            " below dataset requirement " +
                                            std::to_string(meta.color_dim));
  }
}

}  // namespace

TrainOutcome train(const ClipConfig& config, const TrainSchedule& schedule,
                   const LabeledDataset& data, std::span<const int> train_idx,
                   std::span<const int> eval_idx, Rng& rng) {
  check_compatible(config, data.meta);
  schedule.validate();
  Rng init_rng(rng());
  Rng train_rng(rng());
  Rng eval_rng(rng());

  TrainOutcome out;
  out.model = ClipModel::init(config, init_rng);
  out.initial_accuracy = accuracy(out.model, data, eval_idx, config.eval_samples, eval_rng);

  AdamState adam;
  adam.base_lr = schedule.base_lr;
  std::vector<int> order(train_idx.begin(), train_idx.end());
  std::vector<Example> batch;
  double best = -1.0;
  int since_best = 0;
  for (int epoch = 0; epoch < schedule.epochs; ++epoch) {
    const double lr = lr_at(epoch, schedule.base_lr, schedule.halving_period);
    std::shuffle(order.begin(), order.end(), train_rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(schedule.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(schedule.batch_size));
      batch.clear();
      for (std::size_t b = start; b < stop; ++b) {
        batch.push_back({&data.graphs[order[b]], data.labels[order[b]]});
      }
      auto step = loss_and_grads(out.model, batch, train_rng);
      loss_sum += step.loss * static_cast<double>(batch.size());
      const auto params = out.model.params.tensors();
      const auto grads = std::as_const(step.grads).tensors();
      adam_step(adam, params, grads, lr);
    }
    out.train_loss.push_back(order.empty() ? 0.0 : loss_sum / static_cast<double>(order.size()));
    const double acc = accuracy(out.model, data, eval_idx, config.eval_samples, eval_rng);
    out.eval_curve.push_back(acc);

    if (acc > best) {
      best = acc;
      since_best = 0;
    } else if (schedule.patience > 0 && ++since_best >= schedule.patience) {
      out.stopped_early = epoch + 1 < schedule.epochs;
      break;
    }
  }
  return out;
}

TrainOutcome train(const ClipConfig& config, const TrainSchedule& schedule,
                   const LabeledDataset& train_set, const LabeledDataset& eval_set, Rng& rng) {
  if (train_set.meta.attr_dim != eval_set.meta.attr_dim) {
    throw Error(Errc::DimensionMismatch, "train and eval sets disagree on attribute width");
  }
  LabeledDataset joined = train_set;
  joined.meta.color_dim = std::max(train_set.meta.color_dim, eval_set.meta.color_dim);
  joined.meta.num_classes = std::max(train_set.meta.num_classes, eval_set.meta.num_classes);
  joined.graphs.insert(joined.graphs.end(), eval_set.graphs.begin(), eval_set.graphs.end());
  joined.labels.insert(joined.labels.end(), eval_set.labels.begin(), eval_set.labels.end());
  std::vector<int> tr(train_set.size()), ev(eval_set.size());
  std::iota(tr.begin(), tr.end(), 0);
  std::iota(ev.begin(), ev.end(), static_cast<int>(train_set.size()));
  return train(config, schedule, joined, tr, ev, rng);
}

int default_thread_count() {
  if (const char* env = std::getenv("CLIP_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

namespace {

// Runs job(i) for i in [0, count) on up to `threads` workers.
template <class Job>
void run_parallel(std::size_t count, int threads, Job job) {
  const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          job(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

CvResult cross_validate(const ClipConfig& config, const TrainSchedule& schedule,
                        const LabeledDataset& data, Rng& rng, int folds, int threads) {
  const auto t0 = std::chrono::steady_clock::now();
  check_compatible(config, data.meta);
  schedule.validate();
  const FoldPlan plan = stratified_folds(data, folds, rng);
  std::vector<std::uint64_t> seeds(plan.folds.size());
  for (auto& s : seeds) s = rng();

  CvResult r;
  r.dataset = data.meta.name;
  r.config = config;
  r.schedule = schedule;
  r.test_folds = plan.folds;
  r.fold_curves.resize(plan.folds.size());
  run_parallel(plan.folds.size(), threads, [&](std::size_t f) {
    Rng fold_rng(seeds[f]);
    const auto train_idx = plan.train_indices(f);
    r.fold_curves[f] = train(config, schedule, data, train_idx, plan.folds[f], fold_rng).eval_curve;
  });

  std::size_t longest = 0;
  for (const auto& c : r.fold_curves) longest = std::max(longest, c.size());
  r.mean_curve.assign(longest, 0.0);
  for (std::size_t e = 0; e < longest; ++e) {
    double sum = 0.0;
    for (const auto& c : r.fold_curves) sum += c.empty() ? 0.0 : c[std::min(e, c.size() - 1)];
    r.mean_curve[e] = sum / static_cast<double>(r.fold_curves.size());
  }
  const auto best = std::max_element(r.mean_curve.begin(), r.mean_curve.end());
  const std::size_t sel = static_cast<std::size_t>(best - r.mean_curve.begin());
  r.selected_epoch = static_cast<int>(sel) + 1;
  for (const auto& c : r.fold_curves) {
    r.fold_accuracies.push_back(c.empty() ? 0.0 : c[std::min(sel, c.size() - 1)]);
  }
  r.mean = *best;
  double var = 0.0;
  for (double a : r.fold_accuracies) var += (a - r.mean) * (a - r.mean);
  r.std = std::sqrt(var / static_cast<double>(r.fold_accuracies.size()));
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::vector<GridRow> grid_search(std::span<const GridCell> grid, const LabeledDataset& data,
                                 Rng& rng, int folds, int threads) {
  if (grid.empty()) throw Error(Errc::InvalidConfig, "empty grid");
  const std::uint64_t seed = rng();
  std::vector<GridRow> rows(grid.size());
  // Parallelism goes to the cells; each cell's folds then run sequentially.
  run_parallel(grid.size(), threads, [&](std::size_t c) {
    Rng cell_rng(seed);
    rows[c].cell = c;
    rows[c].result = cross_validate(grid[c].config, grid[c].schedule, data, cell_rng, folds, 1);
  });
  std::stable_sort(rows.begin(), rows.end(), [](const GridRow& a, const GridRow& b) {
    return a.result.mean > b.result.mean;
  });
  return rows;
}

nlohmann::json schedule_to_json(const TrainSchedule& s) {
  return {{"epochs", s.epochs},
          {"batch_size", s.batch_size},
          {"base_lr", s.base_lr},
          {"halving_period", s.halving_period},
          {"patience", s.patience}};
}

TrainSchedule schedule_from_json(const nlohmann::json& j, TrainSchedule s) {
  try {
    s.epochs = j.value("epochs", s.epochs);
    s.batch_size = j.value("batch_size", s.batch_size);
    s.base_lr = j.value("base_lr", s.base_lr);
    s.halving_period = j.value("halving_period", s.halving_period);
    s.patience = j.value("patience", s.patience);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidConfig, e.what());
  }
  return s;
}

nlohmann::json cv_to_json(const CvResult& r, bool with_timing) {
  nlohmann::json j = {{"dataset", r.dataset},
                      {"config", config_to_json(r.config)},
                      {"schedule", schedule_to_json(r.schedule)},
                      {"test_folds", r.test_folds},
                      {"fold_curves", r.fold_curves},
                      {"mean_curve", r.mean_curve},
                      {"selected_epoch", r.selected_epoch},
                      {"fold_accuracies", r.fold_accuracies},
                      {"mean", r.mean},
                      {"std", r.std}};
  if (with_timing) j["seconds"] = r.seconds;
  return j;
}

std::string grid_csv(std::span<const GridRow> rows) {
  std::ostringstream out;
  out.precision(17);
  out << "cell,colorings,hops,hidden,batch_size,epochs,mean,std,selected_epoch,seconds\n";
  for (const auto& row : rows) {
    const auto& r = row.result;
    out << row.cell << ',' << r.config.colorings << ',' << r.config.hops << ','
        << r.config.hidden << ',' << r.schedule.batch_size << ',' << r.schedule.epochs << ','
        << r.mean << ',' << r.std << ',' << r.selected_epoch << ',' << r.seconds << '\n';
  }
  return out.str();
}

}  // namespace clip
