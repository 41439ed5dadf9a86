// core/include/vbchain/model.hpp

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

#ifndef VBCHAIN_MODEL_HPP_
#define VBCHAIN_MODEL_HPP_

// Full network (encoder + task graph) and its self-describing artifact:
//   "VBMA" | u32 version | u64 header bytes | JSON header | float64 payload
// The header carries the label schema, model config, frozen chain orders and
// a tensor table {name, rows, cols, offset}; payload values are little-endian.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vbchain/encoder.hpp"
#include "vbchain/heads.hpp"
#include "vbchain/schema.hpp"

namespace vbchain {

inline constexpr std::uint32_t kModelArtifactVersion = 1;

struct TensorArchive {
  std::string meta_json = "{}";  // JSON object
  std::vector<std::pair<std::string, Matrix>> tensors;

  const Matrix &Get(const std::string &name) const;
};
/// `magic` must be four characters.
void WriteTensorArchive(const std::filesystem::path &path, std::string_view magic,
                        const TensorArchive &archive);
TensorArchive ReadTensorArchive(const std::filesystem::path &path, std::string_view magic);

struct ModelForward {
  Var z;
  HeadOutputs heads;
  std::vector<Var> attention;
};

class Model {
 public:
  Model(LabelSchema schema, ModelConfig config, std::uint64_t init_seed);

  ModelForward Run(Tape &tape, std::span<const FeatureStack *const> stacks, bool train,
                   Rng *dropout_rng, const HeadHooks *hooks = nullptr,
                   std::span<const std::vector<bool>> masks = {});
  /// Evaluation-mode predictions, one per stack.
  std::vector<TaskPredictions> Predict(std::span<const FeatureStack *const> stacks,
                                       const HeadHooks *hooks = nullptr);

  Encoder &encoder() { return encoder_; }
  TaskGraph &heads() { return heads_; }
  const LabelSchema &schema() const { return schema_; }
  const ModelConfig &config() const { return config_; }

  /// Trainable parameters of the pooling/projection front end.
  std::vector<Parameter *> EncoderParameters();
  std::vector<Parameter *> HeadParameters();
  std::vector<Parameter *> Parameters();
  /// Parameters and non-trainable buffers, by unique name.
  std::vector<std::pair<std::string, Matrix *>> NamedTensors();

 private:
  LabelSchema schema_;
  ModelConfig config_;
  Encoder encoder_;
  TaskGraph heads_;
};

/// Splits B x k head outputs into per-sample predictions.
std::vector<TaskPredictions> ToPredictions(const HeadOutputs &outputs);

void SaveModel(Model &model, const std::filesystem::path &path);
/// With `expected` set, a differing label schema is rejected with
/// Errc::kSchemaMismatch.
Model LoadModel(const std::filesystem::path &path, const LabelSchema *expected = nullptr);

}  // namespace vbchain

#endif  // VBCHAIN_MODEL_HPP_
