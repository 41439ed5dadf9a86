// core/include/vbchain/schema.hpp

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

#ifndef VBCHAIN_SCHEMA_HPP_
#define VBCHAIN_SCHEMA_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace vbchain {

inline constexpr std::size_t kNumTwo = 2;
inline constexpr std::size_t kNumEmotions = 10;
inline constexpr std::size_t kNumCountries = 4;
inline constexpr std::size_t kNumVbTypes = 8;
inline constexpr std::size_t kNumCulture = kNumCountries * kNumEmotions;

enum class Task { kTwo, kHigh, kCountry, kCulture, kType };
inline constexpr std::array<Task, 5> kAllTasks = {Task::kTwo, Task::kHigh, Task::kCountry,
                                                  Task::kCulture, Task::kType};

std::string_view TaskName(Task task);
/// Accepts the lower-case names two/high/country/culture/type.
std::optional<Task> ParseTask(std::string_view name);
bool IsRegressionTask(Task task);
std::size_t TaskArity(Task task);

struct ValueRange {
  double lo = 0.0;
  double hi = 1.0;
  bool operator==(const ValueRange &) const = default;
};

/// Names and raw value scales of every label. The emotion list is
/// configuration-driven; the default names seven emotions and three
/// placeholders meant to be replaced.
struct LabelSchema {
  std::vector<std::string> emotions;
  std::vector<std::string> countries;
  std::vector<std::string> vb_types;
  ValueRange two_range{1.0, 9.0};
  ValueRange high_range{1.0, 100.0};

  static LabelSchema Default();
  /// Throws Error(kInvalidArgument) naming the violated invariant.
  void Validate() const;
  /// "<country>_<emotion>" in country-major order.
  std::vector<std::string> CultureLabels() const;
  std::optional<std::size_t> CountryIndex(std::string_view name) const;
  std::optional<std::size_t> VbTypeIndex(std::string_view name) const;
  bool operator==(const LabelSchema &) const = default;
};

/// (raw - lo) / (hi - lo) clipped to [0, 1]. Rejects non-finite input.
double NormalizeTarget(double raw, ValueRange range);
/// Inverse of NormalizeTarget; accepts v in [0, 1] with 1e-9 slack.
double DenormalizeTarget(double v, ValueRange range);
/// Country-major position of a (country, emotion) pair in the 40-dim block.
std::size_t CultureIndex(std::size_t country_idx, std::size_t emotion_idx);

struct ModelConfig {
  std::size_t num_layers = 25;  // 24 transformer layers + the conv feature map
  std::size_t feature_dim = 1024;
  std::size_t attention_dim = 128;
  std::size_t projection_dim = 128;
  std::size_t shared_dim = 64;
  double dropout_rate = 0.25;
  std::size_t chain_hidden = 0;  // 0: each chain predictor is a single affine map
  bool use_chains = true;        // false: independent sigmoid heads for HIGH/CULTURE
  Task target_task = Task::kHigh;
  double loss_lambda = 0.9;

  void Validate() const;
  bool operator==(const ModelConfig &) const = default;
};

struct TrainConfig {
  double lr_encoder = 1e-5;
  double lr_downstream = 1e-3;
  double weight_decay = 1e-3;
  std::size_t batch_size = 64;  // 1024 at full scale
  std::size_t patience = 10;
  std::size_t max_epochs = 25;
  std::size_t max_steps = 0;  // 0: unlimited
  double min_improvement = 1e-5;
  std::uint64_t seed = 0;

  void Validate() const;
  bool operator==(const TrainConfig &) const = default;
};

/// Outputs of all five tasks for one sample, in normalized [0, 1] space.
class TaskPredictions {
 public:
  TaskPredictions(std::vector<double> two, std::vector<double> high,
                  std::vector<double> country_probs, std::vector<double> culture,
                  std::vector<double> vb_type_probs);

  const std::vector<double> &two() const { return two_; }
  const std::vector<double> &high() const { return high_; }
  const std::vector<double> &country_probs() const { return country_probs_; }
  const std::vector<double> &culture() const { return culture_; }
  const std::vector<double> &vb_type_probs() const { return vb_type_probs_; }
  const std::vector<double> &ForTask(Task task) const;

 private:
  std::vector<double> two_, high_, country_probs_, culture_, vb_type_probs_;
};

/// Per-sample ground truth in normalized space; absent tasks are nullopt.
struct TaskTargets {
  std::optional<std::array<double, kNumTwo>> two;
  std::optional<std::vector<double>> high;
  std::optional<std::size_t> country;
  std::optional<std::vector<double>> culture;
  std::optional<std::size_t> vb_type;

  bool Has(Task task) const;
};

}  // namespace vbchain

#endif  // VBCHAIN_SCHEMA_HPP_
