// core/include/vbchain/manifest.hpp

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

#ifndef VBCHAIN_MANIFEST_HPP_
#define VBCHAIN_MANIFEST_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vbchain/schema.hpp"

namespace vbchain {

enum class Split { kTrain, kVal, kTest };
std::string_view SplitName(Split split);
std::optional<Split> ParseSplit(std::string_view name);

/// One manifest row. Labels are kept on their raw scales; absent cells are
/// nullopt.
struct Sample {
  std::string file_id;
  Split split = Split::kTrain;
  std::optional<std::string> country;
  std::optional<std::string> vb_type;
  std::optional<double> arousal;
  std::optional<double> valence;
  std::optional<std::vector<double>> high;
  std::optional<std::vector<double>> culture;

  bool operator==(const Sample &) const = default;
};

struct Manifest {
  std::vector<Sample> rows;

  std::vector<const Sample *> InSplit(Split split) const;
  const Sample *Find(std::string_view file_id) const;
  /// Checks id uniqueness and label domains. Errors name the 1-based row.
  void Validate(const LabelSchema &schema) const;
  bool operator==(const Manifest &) const = default;
};

/// CSV columns: file_id,split,country,vb_type,arousal,valence,high_0..high_9,
/// culture_0..culture_39. Lines starting with '#' are comments; the writer
/// emits one naming the high/culture columns with schema labels.
Manifest ReadManifest(const std::filesystem::path &path, const LabelSchema &schema);
void WriteManifest(const Manifest &manifest, const std::filesystem::path &path,
                   const LabelSchema &schema);
std::string ManifestHeader();

/// Normalizes the present labels of `sample` into [0, 1] / class indices.
TaskTargets ToTargets(const Sample &sample, const LabelSchema &schema);

}  // namespace vbchain

#endif  // VBCHAIN_MANIFEST_HPP_
