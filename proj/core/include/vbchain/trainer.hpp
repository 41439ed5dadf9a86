// core/include/vbchain/trainer.hpp

// Copyright 2026  The vbchain Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef VBCHAIN_TRAINER_HPP_
#define VBCHAIN_TRAINER_HPP_

// Optimization loop with multi-task loss, early stopping and resumable
// checkpoints. Run directory layout:
//   artifact.bin      best-validation model
//   state.bin         last finished epoch (parameters, optimizer, counters)
//   record.jsonl      one EpochRecord per line
//   config.json       the experiment configuration
//   report.json/.csv  validation MetricsReport of the best model
//   diagnostics/      layer_weights.csv, attention_epoch_<n>.csv

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vbchain/config.hpp"
#include "vbchain/manifest.hpp"
#include "vbchain/model.hpp"
#include "vbchain/objective.hpp"
#include "vbchain/provider.hpp"

namespace vbchain {

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  std::size_t steps = 0;  // cumulative optimizer steps
  double train_loss = 0.0;
  std::map<Task, double> val_metric;  // mean CCC, or UAR for classification
  double monitored = 0.0;
  bool improved = false;
  double wall_seconds = 0.0;
  std::string config_hash;

  std::string ToJson() const;
  static EpochRecord FromJson(const std::string &line);
};

struct TrainHooks {
  /// Replaces the monitored validation metric of an epoch.
  std::function<double(std::size_t epoch, double metric)> override_metric;
  /// Stop (as if interrupted) once this epoch is checkpointed; 0 disables.
  std::size_t halt_after_epoch = 0;
};

struct TrainOptions {
  /// Training-time augmentation, used when the config enables it and the
  /// provider is audio-backed.
  bool augment = true;
  TrainHooks hooks;
};

struct TrainState {
  std::size_t epoch = 0;
  std::size_t steps = 0;
  double best_metric = 0.0;
  std::size_t best_epoch = 0;
  std::size_t since_improvement = 0;
  std::string config_hash;
  std::vector<EpochRecord> record;
};

struct TrainResult {
  Model model;  // best-validation checkpoint
  std::vector<EpochRecord> record;
  std::size_t best_epoch = 0;
  double best_metric = 0.0;
  std::size_t steps = 0;
  bool early_stopped = false;
  bool halted = false;
  MetricsReport val_report;
};

/// `run_dir` may be empty to train without writing anything.
TrainResult Train(const Manifest &manifest, const FeatureProvider &provider,
                  const ExperimentConfig &config, const std::filesystem::path &run_dir,
                  const TrainOptions &options = {});
/// Continues the run checkpointed in `run_dir`. The config hash must match.
TrainResult Resume(const std::filesystem::path &run_dir, const Manifest &manifest,
                   const FeatureProvider &provider, const ExperimentConfig &config,
                   const TrainOptions &options = {});
TrainState LoadTrainState(const std::filesystem::path &run_dir);

/// Evaluation-mode predictions; only FeatureProvider::Load() is used.
std::vector<TaskPredictions> PredictSamples(Model &model, std::span<const Sample *const> samples,
                                            const FeatureProvider &provider,
                                            std::size_t batch_size = 64);
MetricsReport EvaluateSplit(Model &model, const Manifest &manifest, Split split,
                            const FeatureProvider &provider,
                            std::vector<TaskPredictions> *predictions = nullptr);

/// Label matrix (rows with the label, normalized) of a regression task over
/// the given split; used to derive chain orders.
Matrix SplitLabelMatrix(const Manifest &manifest, const LabelSchema &schema, Task task,
                        Split split);
/// Column names as they appear in the manifest for `task`.
std::string TaskColumns(Task task);

/// Loader parallelism: VBCHAIN_NUM_WORKERS if set (>= 1), else the
/// hardware concurrency.
/// Train-row indices of every batch of an epoch; a pure function of its
/// arguments. A trailing batch of one is dropped.
std::vector<std::vector<std::size_t>> EpochBatches(std::size_t n, std::size_t batch_size,
                                                   std::uint64_t seed, std::size_t epoch);
std::size_t NumWorkers();

}  // namespace vbchain

#endif  // VBCHAIN_TRAINER_HPP_
