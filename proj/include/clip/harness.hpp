#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "clip/datasets.hpp"
#include "clip/model.hpp"
#include "clip/rng.hpp"

namespace clip {

struct TrainSchedule {
  int epochs = 400;
  int batch_size = 32;
  double base_lr = 1e-3;
  int halving_period = 50;
  /// Stop once validation accuracy has not improved for this many epochs;
  /// 0 trains for the full schedule.
  int patience = 50;

  void validate() const;
  friend bool operator==(const TrainSchedule&, const TrainSchedule&) = default;
};

struct TrainOutcome {
  ClipModel model;
  /// Accuracy on the evaluation set of the untrained model.
  double initial_accuracy = 0.0;
  /// Evaluation accuracy after each completed epoch.
  std::vector<double> eval_curve;
  /// Mean training loss of each epoch.
  std::vector<double> train_loss;
  bool stopped_early = false;
};

/// Fills in the dataset-dependent fields (attribute width, classes, color
/// width) of a configuration.
ClipConfig configure_for(ClipConfig base, const DatasetMeta& meta);

double accuracy(const ClipModel& model, const LabeledDataset& d, std::span<const int> indices,
                int eval_samples, Rng& rng);

/// Mini-batch Adam on `train_idx` with the halving learning-rate schedule;
/// evaluates on `eval_idx` after every epoch.
TrainOutcome train(const ClipConfig& config, const TrainSchedule& schedule,
                   const LabeledDataset& data, std::span<const int> train_idx,
                   std::span<const int> eval_idx, Rng& rng);

TrainOutcome train(const ClipConfig& config, const TrainSchedule& schedule,
                   const LabeledDataset& train_set, const LabeledDataset& eval_set, Rng& rng);

struct CvResult {
  std::string dataset;
  ClipConfig config;
  TrainSchedule schedule;
  /// Held-out indices of each fold.
  std::vector<std::vector<int>> test_folds;
  /// Validation accuracy per fold per recorded epoch (shorter when stopped).
  std::vector<std::vector<double>> fold_curves;
  /// Mean over folds per epoch; a stopped fold contributes its last value.
  std::vector<double> mean_curve;
  /// 1-based epoch maximizing mean_curve (earliest on ties).
  int selected_epoch = 0;
  std::vector<double> fold_accuracies;
  double mean = 0.0;
  /// Population standard deviation of fold_accuracies.
  double std = 0.0;
  double seconds = 0.0;
};

/// Worker threads for fold and grid parallelism: $CLIP_THREADS, default 1.
int default_thread_count();

CvResult cross_validate(const ClipConfig& config, const TrainSchedule& schedule,
                        const LabeledDataset& data, Rng& rng, int folds = 10, int threads = 1);

struct GridCell {
  ClipConfig config;
  TrainSchedule schedule;
};

struct GridRow {
  std::size_t cell = 0;  ///< index into the input grid
  CvResult result;
};

/// Cross-validates every cell on the same folds and seeds; rows sorted by
/// mean accuracy, descending (input order on ties).
std::vector<GridRow> grid_search(std::span<const GridCell> grid, const LabeledDataset& data,
                                 Rng& rng, int folds = 10, int threads = 1);

nlohmann::json schedule_to_json(const TrainSchedule& s);
TrainSchedule schedule_from_json(const nlohmann::json& j, TrainSchedule base = {});
/// `with_timing` false drops wall-clock fields so equal runs dump equal bytes.
nlohmann::json cv_to_json(const CvResult& r, bool with_timing = true);
/// One header line plus one line per row.
std::string grid_csv(std::span<const GridRow> rows);

}  // namespace clip
