// core/src/schema.cpp

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

#include "vbchain/schema.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "vbchain/error.hpp"

namespace vbchain {

namespace {

void CheckUnique(const std::vector<std::string> &names, std::size_t expected,
                 const char *what) {
  Require(names.size() == expected, Errc::kInvalidArgument,
          std::string("schema must list exactly ") + std::to_string(expected) + " " + what +
              ", got " + std::to_string(names.size()));
  std::set<std::string> seen;
  for (const auto &n : names) {
    Require(!n.empty(), Errc::kInvalidArgument, std::string("empty name in schema ") + what);
    Require(n.find(',') == std::string::npos, Errc::kInvalidArgument,
            "schema name contains a comma: " + n);
    Require(seen.insert(n).second, Errc::kInvalidArgument,
            std::string("duplicate name in schema ") + what + ": " + n);
  }
}

std::optional<std::size_t> Find(const std::vector<std::string> &names, std::string_view n) {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == n) return i;
  return std::nullopt;
}

void CheckProbabilities(const std::vector<double> &p, const char *what) {
  double s = 0.0;
  for (double x : p) {
    Require(std::isfinite(x) && x >= 0.0, Errc::kInvalidArgument,
            std::string(what) + " holds a negative or non-finite probability");
    s += x;
  }
  Require(std::abs(s - 1.0) <= 1e-6, Errc::kInvalidArgument,
          std::string(what) + " does not sum to 1");
}

void CheckUnit(const std::vector<double> &v, const char *what) {
  for (double x : v)
    Require(std::isfinite(x) && x >= 0.0 && x <= 1.0, Errc::kInvalidArgument,
            std::string(what) + " output outside [0, 1]");
}

}  // namespace

std::string_view TaskName(Task task) {
  switch (task) {
    case Task::kTwo: return "two";
    case Task::kHigh: return "high";
    case Task::kCountry: return "country";
    case Task::kCulture: return "culture";
    case Task::kType: return "type";
  }
  return "?";
}

std::optional<Task> ParseTask(std::string_view name) {
  for (Task t : kAllTasks)
    if (TaskName(t) == name) return t;
  return std::nullopt;
}

bool IsRegressionTask(Task task) {
  return task == Task::kTwo || task == Task::kHigh || task == Task::kCulture;
}

std::size_t TaskArity(Task task) {
  switch (task) {
    case Task::kTwo: return kNumTwo;
    case Task::kHigh: return kNumEmotions;
    case Task::kCountry: return kNumCountries;
    case Task::kCulture: return kNumCulture;
    case Task::kType: return kNumVbTypes;
  }
  return 0;
}

LabelSchema LabelSchema::Default() {
  LabelSchema s;
  s.emotions = {"amusement", "awkward",  "excitement",    "fear",          "horror",
                "sadness",   "surprise", "placeholder_1", "placeholder_2", "placeholder_3"};
  s.countries = {"United States", "China", "Venezuela", "South Africa"};
  s.vb_types = {"cry", "gasp", "groan", "grunt", "laugh", "pant", "scream", "other"};
  return s;
}

void LabelSchema::Validate() const {
  CheckUnique(emotions, kNumEmotions, "emotions");
  CheckUnique(countries, kNumCountries, "countries");
  CheckUnique(vb_types, kNumVbTypes, "vb_types");
  Require(std::isfinite(two_range.lo) && std::isfinite(two_range.hi) &&
              two_range.lo < two_range.hi,
          Errc::kInvalidArgument, "two_range must satisfy lo < hi");
  Require(std::isfinite(high_range.lo) && std::isfinite(high_range.hi) &&
              high_range.lo < high_range.hi,
          Errc::kInvalidArgument, "high_range must satisfy lo < hi");
}

std::vector<std::string> LabelSchema::CultureLabels() const {
  std::vector<std::string> out;
  out.reserve(countries.size() * emotions.size());
  for (const auto &c : countries)
    for (const auto &e : emotions) out.push_back(c + "_" + e);
  return out;
}

std::optional<std::size_t> LabelSchema::CountryIndex(std::string_view name) const {
  return Find(countries, name);
}

std::optional<std::size_t> LabelSchema::VbTypeIndex(std::string_view name) const {
  return Find(vb_types, name);
}

double NormalizeTarget(double raw, ValueRange range) {
  Require(std::isfinite(raw), Errc::kNonFinite, "cannot normalize a non-finite target");
  Require(range.lo < range.hi, Errc::kInvalidArgument, "target range needs lo < hi");
  const double v = (raw - range.lo) / (range.hi - range.lo);
  return std::clamp(v, 0.0, 1.0);
}

double DenormalizeTarget(double v, ValueRange range) {
  Require(std::isfinite(v) && v >= -1e-9 && v <= 1.0 + 1e-9, Errc::kOutOfRange,
          "normalized value " + std::to_string(v) + " outside [0, 1]");
  Require(range.lo < range.hi, Errc::kInvalidArgument, "target range needs lo < hi");
  return range.lo + std::clamp(v, 0.0, 1.0) * (range.hi - range.lo);
}

std::size_t CultureIndex(std::size_t country_idx, std::size_t emotion_idx) {
  Require(country_idx < kNumCountries, Errc::kOutOfRange,
          "country index " + std::to_string(country_idx) + " out of range");
  Require(emotion_idx < kNumEmotions, Errc::kOutOfRange,
          "emotion index " + std::to_string(emotion_idx) + " out of range");
  return country_idx * kNumEmotions + emotion_idx;
}

void ModelConfig::Validate() const {
  Require(num_layers > 0 && feature_dim > 0 && attention_dim > 0 && projection_dim > 0 &&
              shared_dim > 0,
          Errc::kInvalidArgument, "model dimensions must be positive");
  Require(dropout_rate >= 0.0 && dropout_rate < 1.0, Errc::kInvalidArgument,
          "dropout_rate must lie in [0, 1)");
  Require(loss_lambda >= 0.0 && loss_lambda <= 1.0, Errc::kInvalidArgument,
          "loss_lambda must lie in [0, 1]");
}

void TrainConfig::Validate() const {
  Require(patience >= 1, Errc::kInvalidArgument, "patience must be >= 1");
  Require(max_epochs >= 1, Errc::kInvalidArgument, "max_epochs must be >= 1");
  Require(lr_encoder > 0.0 && lr_downstream > 0.0, Errc::kInvalidArgument,
          "learning rates must be positive");
  Require(weight_decay >= 0.0, Errc::kInvalidArgument, "weight_decay must be >= 0");
  Require(batch_size >= 2, Errc::kInvalidArgument, "batch_size must be >= 2");
  Require(min_improvement >= 0.0, Errc::kInvalidArgument, "min_improvement must be >= 0");
}

TaskPredictions::TaskPredictions(std::vector<double> two, std::vector<double> high,
                                 std::vector<double> country_probs, std::vector<double> culture,
                                 std::vector<double> vb_type_probs)
    : two_(std::move(two)),
      high_(std::move(high)),
      country_probs_(std::move(country_probs)),
      culture_(std::move(culture)),
      vb_type_probs_(std::move(vb_type_probs)) {
  Require(two_.size() == kNumTwo && high_.size() == kNumEmotions &&
              country_probs_.size() == kNumCountries && culture_.size() == kNumCulture &&
              vb_type_probs_.size() == kNumVbTypes,
          Errc::kInvalidArgument, "task prediction arity must be 2/10/4/40/8");
  CheckUnit(two_, "TWO");
  CheckUnit(high_, "HIGH");
  CheckUnit(culture_, "CULTURE");
  CheckProbabilities(country_probs_, "COUNTRY");
  CheckProbabilities(vb_type_probs_, "TYPE");
}

const std::vector<double> &TaskPredictions::ForTask(Task task) const {
  switch (task) {
    case Task::kTwo: return two_;
    case Task::kHigh: return high_;
    case Task::kCountry: return country_probs_;
    case Task::kCulture: return culture_;
    case Task::kType: return vb_type_probs_;
  }
  return two_;
}

bool TaskTargets::Has(Task task) const {
  switch (task) {
    case Task::kTwo: return two.has_value();
    case Task::kHigh: return high.has_value();
    case Task::kCountry: return country.has_value();
    case Task::kCulture: return culture.has_value();
    case Task::kType: return vb_type.has_value();
  }
  return false;
}

}  // namespace vbchain
