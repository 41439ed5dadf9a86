// core/include/vbchain/feature_store.hpp

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

#ifndef VBCHAIN_FEATURE_STORE_HPP_
#define VBCHAIN_FEATURE_STORE_HPP_

// On-disk unit of encoder output. Layout (little-endian):
//   "VBFS" | u32 version=1 | u32 num_layers | u32 frames | u32 dim |
//   num_layers*frames*dim float32, layer-major then frame-major.
// Layer 0 is the convolutional feature map, layers 1..L the transformer
// layers bottom-up.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace vbchain {

inline constexpr std::uint32_t kFeatureStackVersion = 1;
inline constexpr std::size_t kFeatureStackHeaderBytes = 20;

struct FeatureStack {
  std::string file_id;
  std::size_t num_layers = 0;
  std::size_t frames = 0;
  std::size_t dim = 0;
  std::vector<float> values;

  FeatureStack() = default;
  FeatureStack(std::string id, std::size_t layers, std::size_t t, std::size_t d)
      : file_id(std::move(id)), num_layers(layers), frames(t), dim(d), values(layers * t * d) {}

  float &at(std::size_t layer, std::size_t t, std::size_t d) {
    return values[(layer * frames + t) * dim + d];
  }
  float at(std::size_t layer, std::size_t t, std::size_t d) const {
    return values[(layer * frames + t) * dim + d];
  }
  std::span<const float> Layer(std::size_t layer) const {
    return {values.data() + layer * frames * dim, frames * dim};
  }
  /// frames >= 1, dims consistent, all values finite.
  void Validate() const;
};

void WriteFeatureStack(const FeatureStack &stack, const std::filesystem::path &path);
/// `file_id` of the result is the file stem.
FeatureStack ReadFeatureStack(const std::filesystem::path &path);

struct FeatureIndexEntry {
  std::string file_id;
  std::string path;  // relative to the index directory
  std::size_t frames = 0;
  std::size_t dim = 0;
};

/// `index.jsonl`: one {"file_id", "path", "T", "D"} object per line.
void WriteFeatureIndex(const std::filesystem::path &path,
                       const std::vector<FeatureIndexEntry> &entries);
std::map<std::string, FeatureIndexEntry> ReadFeatureIndex(const std::filesystem::path &path);

}  // namespace vbchain

#endif  // VBCHAIN_FEATURE_STORE_HPP_
