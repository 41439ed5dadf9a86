// core/include/vbchain/analysis.hpp

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

#ifndef VBCHAIN_ANALYSIS_HPP_
#define VBCHAIN_ANALYSIS_HPP_

// Read-only dataset diagnostics: label correlations, arousal-valence
// structure per burst type, per-country counts and the chain-order table.

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "vbchain/heads.hpp"
#include "vbchain/manifest.hpp"

namespace vbchain {

/// Pearson matrix of the label columns; see PearsonMatrix.
Matrix CorrelationMatrix(const Matrix &labels, const std::vector<std::string> *names = nullptr);
/// label,<names...> rows.
std::string CorrelationCsv(const Matrix &r, const std::vector<std::string> &names);

struct TypeScatter {
  std::string vb_type;
  std::size_t count = 0;
  double mean_arousal = 0.0;  // normalized
  double mean_valence = 0.0;
  std::vector<std::size_t> grid;  // bins x bins, row = arousal bin
};

struct AvScatterSummary {
  std::size_t bins = 10;
  std::vector<TypeScatter> types;  // schema order, types without samples skipped
  std::vector<std::string> notes;

  /// vb_type,count,mean_arousal,mean_valence
  std::string CentroidCsv() const;
  /// vb_type,arousal_bin,valence_bin,count
  std::string GridCsv() const;
};
/// Uses every sample carrying arousal, valence and vb_type.
AvScatterSummary SummarizeAvScatter(const Manifest &manifest, const LabelSchema &schema,
                                    std::size_t bins = 10);

struct CountryDistribution {
  std::vector<std::string> columns;  // schema countries, then "(none)"
  std::map<std::string, std::vector<std::size_t>> per_split;
  std::vector<std::size_t> totals;
  std::size_t total = 0;

  /// split,<columns...>,total
  std::string ToCsv() const;
};
CountryDistribution CountCountries(const Manifest &manifest, const LabelSchema &schema);

struct ChainOrderReport {
  ChainOrder order;
  std::vector<std::string> labels;
  /// rank,label,index,accumulated_abs_r, sorted by rank
  std::string ToCsv() const;
  std::string ToText() const;
};
/// Ordering of the HIGH (or CULTURE) labels from the train split.
ChainOrderReport MakeChainOrderReport(const Manifest &manifest, const LabelSchema &schema,
                                      Task task = Task::kHigh);

}  // namespace vbchain

#endif  // VBCHAIN_ANALYSIS_HPP_
