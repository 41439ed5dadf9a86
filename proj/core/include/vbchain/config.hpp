// core/include/vbchain/config.hpp

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

#ifndef VBCHAIN_CONFIG_HPP_
#define VBCHAIN_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "vbchain/augment.hpp"
#include "vbchain/schema.hpp"

namespace vbchain {

enum class FeatureSource { kPrecomputed, kSynthetic, kExternal };

struct DataConfig {
  FeatureSource features = FeatureSource::kPrecomputed;
  /// Training-time waveform augmentation; only audio-backed sources use it.
  std::optional<AugmentPolicy> augment = AugmentPolicy{};
  std::string adapter_cmd;  // kExternal only
  std::string audio_dir;    // kExternal only; relative to the data dir

  bool operator==(const DataConfig &) const = default;
};

/// Experiment configuration file: {"schema", "model", "train", "data"}.
/// Every section and key is optional; unknown keys are rejected.
struct ExperimentConfig {
  LabelSchema schema = LabelSchema::Default();
  ModelConfig model;
  TrainConfig train;
  DataConfig data;

  void Validate() const;
  bool operator==(const ExperimentConfig &) const = default;
};

ExperimentConfig ParseExperimentConfig(const std::string &json_text);
ExperimentConfig LoadExperimentConfig(const std::filesystem::path &path);
std::string ExperimentConfigToJson(const ExperimentConfig &config);

/// Stable hash of the schema, model and train sections (the parts that must
/// not change across a resumed run).
std::string ConfigHash(const ExperimentConfig &config);

// JSON fragments reused by the model artifact header.
std::string SchemaToJson(const LabelSchema &schema);
LabelSchema SchemaFromJson(const std::string &json_text);
std::string ModelConfigToJson(const ModelConfig &config);
ModelConfig ModelConfigFromJson(const std::string &json_text);

}  // namespace vbchain

#endif  // VBCHAIN_CONFIG_HPP_
