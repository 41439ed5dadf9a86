// core/include/vbchain/synth.hpp

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

#ifndef VBCHAIN_SYNTH_HPP_
#define VBCHAIN_SYNTH_HPP_

// Desk-scale stand-in for a labelled vocal-burst corpus. Every sample is a
// pure function of (spec, schema, index):
//   country ~ U{0..3}, (a, v) ~ U[0,1]^2
//   e_k     = sigmoid(M_k . [a, v, 1]) + country_offset[country][k] + N(0, noise)
//   type    = quadrant rule on (a, v)
//   culture = e + culture_offset[c] + N(0, noise) for every country block c
//   layer l, frame t = gain_l * (A [a, v, onehot(country), onehot(type)] + b
//                      + N(0, noise)) + N(0, layer_noise * l / (L - 1))
// All labels are clipped to [0, 1] and stored on the schema's raw scales.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vbchain/autograd.hpp"
#include "vbchain/feature_store.hpp"
#include "vbchain/manifest.hpp"
#include "vbchain/schema.hpp"

namespace vbchain {

struct SynthSpec {
  std::size_t n_samples = 512;
  std::uint64_t seed = 0;
  double noise_std = 0.02;
  std::size_t num_layers = 5;
  std::size_t feature_dim = 32;
  std::size_t min_frames = 8;
  std::size_t max_frames = 16;
  double mixing_gain = 4.0;
  double country_offset = 0.05;
  double culture_offset = 0.05;
  double layer_noise = 0.2;
  double train_fraction = 0.7;
  double val_fraction = 0.15;

  void Validate() const;
  bool operator==(const SynthSpec &) const = default;
};

/// Quantities fixed by the seed and shared by all samples.
struct SynthTruth {
  Matrix mixing;          // 10 x 3, rows act on [a, v, 1]
  Matrix country_offset;  // 4 x 10
  Matrix culture_offset;  // 4 x 10
  Matrix feature_map;     // D x 14
  std::vector<double> feature_bias;  // D
  std::vector<double> layer_gain;    // num_layers
};

struct SynthLatent {
  double arousal = 0.0;  // normalized
  double valence = 0.0;
  std::size_t country = 0;
  std::size_t vb_type = 0;
};

inline constexpr std::size_t kSynthFeatureInputs = 2 + kNumCountries + kNumVbTypes;

SynthTruth MakeSynthTruth(const SynthSpec &spec);
/// Index in schema order assigned to an (arousal, valence) point.
std::size_t SynthQuadrantType(double arousal, double valence);
std::string SynthFileId(std::size_t index);
/// Parses ids produced by SynthFileId; throws kNotFound otherwise.
std::size_t SynthIndexFromId(const std::string &file_id, std::size_t n_samples);

SynthLatent SynthesizeLatent(const SynthSpec &spec, std::size_t index);
Sample SynthesizeSample(const SynthSpec &spec, const SynthTruth &truth, const LabelSchema &schema,
                        std::size_t index);
FeatureStack SynthesizeFeatures(const SynthSpec &spec, const SynthTruth &truth,
                                std::size_t index);
/// Noise-free emotion vector implied by the mixing matrix and country offset.
std::vector<double> SynthCleanEmotions(const SynthTruth &truth, double arousal, double valence,
                                       std::size_t country);

struct SynthDataset {
  Manifest manifest;
  std::vector<FeatureStack> features;
  SynthTruth truth;
};

SynthDataset GenerateSynthetic(const SynthSpec &spec, const LabelSchema &schema);

/// Writes manifest.csv, features/<id>.vbfs, index.jsonl and synth_spec.json.
void WriteSyntheticDataset(const SynthDataset &data, const SynthSpec &spec,
                           const LabelSchema &schema, const std::filesystem::path &dir);

std::string SynthSpecToJson(const SynthSpec &spec, const SynthTruth *truth);
SynthSpec SynthSpecFromJson(const std::string &text);

}  // namespace vbchain

#endif  // VBCHAIN_SYNTH_HPP_
