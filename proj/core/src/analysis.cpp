// core/src/analysis.cpp

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

#include "vbchain/analysis.hpp"

#include <algorithm>
#include <cstdio>

#include "vbchain/error.hpp"
#include "vbchain/stats.hpp"
#include "vbchain/trainer.hpp"

namespace vbchain {

namespace {

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

Matrix CorrelationMatrix(const Matrix &labels, const std::vector<std::string> *names) {
  return PearsonMatrix(labels, names);
}

std::string CorrelationCsv(const Matrix &r, const std::vector<std::string> &names) {
  Require(r.rows == names.size() && r.cols == names.size(), Errc::kInvalidArgument,
          "correlation matrix and label names disagree");
  std::string out = "label";
  for (const auto &n : names) out += "," + n;
  out += "\n";
  for (std::size_t i = 0; i < r.rows; ++i) {
    out += names[i];
    for (std::size_t j = 0; j < r.cols; ++j) out += "," + Num(r(i, j));
    out += "\n";
  }
  return out;
}

AvScatterSummary SummarizeAvScatter(const Manifest &manifest, const LabelSchema &schema,
                                    std::size_t bins) {
  Require(bins >= 1, Errc::kInvalidArgument, "histogram needs at least one bin");
  AvScatterSummary out;
  out.bins = bins;
  std::vector<TypeScatter> acc(schema.vb_types.size());
  for (std::size_t k = 0; k < acc.size(); ++k) {
    acc[k].vb_type = schema.vb_types[k];
    acc[k].grid.assign(bins * bins, 0);
  }
  auto bin = [bins](double v) {
    return std::min(bins - 1, static_cast<std::size_t>(v * static_cast<double>(bins)));
  };
  for (const Sample &s : manifest.rows) {
    const TaskTargets t = ToTargets(s, schema);
    if (!t.two || !t.vb_type) continue;
    TypeScatter &ts = acc[*t.vb_type];
    const double a = (*t.two)[0], v = (*t.two)[1];
    ++ts.count;
    ts.mean_arousal += a;
    ts.mean_valence += v;
    ++ts.grid[bin(a) * bins + bin(v)];
  }
  for (TypeScatter &ts : acc) {
    if (ts.count == 0) {
      out.notes.push_back("type '" + ts.vb_type + "' has no samples with arousal and valence");
      continue;
    }
    ts.mean_arousal /= static_cast<double>(ts.count);
    ts.mean_valence /= static_cast<double>(ts.count);
    out.types.push_back(std::move(ts));
  }
  if (out.types.empty()) out.notes.push_back("no sample carries arousal, valence and vb_type");
  return out;
}

std::string AvScatterSummary::CentroidCsv() const {
  std::string out = "vb_type,count,mean_arousal,mean_valence\n";
  for (const auto &t : types)
    out += t.vb_type + "," + std::to_string(t.count) + "," + Num(t.mean_arousal) + "," +
           Num(t.mean_valence) + "\n";
  return out;
}

std::string AvScatterSummary::GridCsv() const {
  std::string out = "vb_type,arousal_bin,valence_bin,count\n";
  for (const auto &t : types)
    for (std::size_t a = 0; a < bins; ++a)
      for (std::size_t v = 0; v < bins; ++v)
        out += t.vb_type + "," + std::to_string(a) + "," + std::to_string(v) + "," +
               std::to_string(t.grid[a * bins + v]) + "\n";
  return out;
}

CountryDistribution CountCountries(const Manifest &manifest, const LabelSchema &schema) {
  CountryDistribution out;
  out.columns = schema.countries;
  out.columns.push_back("(none)");
  out.totals.assign(out.columns.size(), 0);
  for (Split split : {Split::kTrain, Split::kVal, Split::kTest})
    out.per_split[std::string(SplitName(split))].assign(out.columns.size(), 0);
  for (const Sample &s : manifest.rows) {
    std::size_t col = schema.countries.size();
    if (s.country) {
      const auto idx = schema.CountryIndex(*s.country);
      Require(idx.has_value(), Errc::kInvalidArgument, "unknown country '" + *s.country + "'");
      col = *idx;
    }
    ++out.per_split[std::string(SplitName(s.split))][col];
    ++out.totals[col];
    ++out.total;
  }
  return out;
}

std::string CountryDistribution::ToCsv() const {
  std::string out = "split";
  for (const auto &c : columns) out += "," + c;
  out += ",total\n";
  auto line = [&](const std::string &name, const std::vector<std::size_t> &counts) {
    std::size_t sum = 0;
    out += name;
    for (std::size_t c : counts) {
      out += "," + std::to_string(c);
      sum += c;
    }
    out += "," + std::to_string(sum) + "\n";
  };
  for (Split split : {Split::kTrain, Split::kVal, Split::kTest}) {
    const std::string name(SplitName(split));
    line(name, per_split.at(name));
  }
  line("all", totals);
  return out;
}

ChainOrderReport MakeChainOrderReport(const Manifest &manifest, const LabelSchema &schema,
                                      Task task) {
  Require(task == Task::kHigh || task == Task::kCulture, Errc::kInvalidArgument,
          "chain orders exist for high and culture only");
  ChainOrderReport out;
  out.labels = task == Task::kHigh ? schema.emotions : schema.CultureLabels();
  const Matrix labels = SplitLabelMatrix(manifest, schema, task, Split::kTrain);
  Require(labels.rows >= 3, Errc::kInvalidArgument,
          "chain order needs at least 3 labelled train samples for " +
              std::string(TaskName(task)) + ", found " + std::to_string(labels.rows));
  out.order = DeriveChainOrder(labels, &out.labels);
  return out;
}

std::string ChainOrderReport::ToCsv() const {
  std::string out = "rank,label,index,accumulated_abs_r\n";
  for (std::size_t r = 0; r < order.order.size(); ++r) {
    const std::size_t i = order.order[r];
    out += std::to_string(r + 1) + "," + labels[i] + "," + std::to_string(i) + "," +
           Num(order.accumulated[i]) + "\n";
  }
  return out;
}

std::string ChainOrderReport::ToText() const {
  std::size_t w = 5;
  for (const auto &l : labels) w = std::max(w, l.size());
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-4s  %-*s  %s\n", "rank", static_cast<int>(w), "label",
                "accumulated |r|");
  out += buf;
  for (std::size_t r = 0; r < order.order.size(); ++r) {
    const std::size_t i = order.order[r];
    std::snprintf(buf, sizeof buf, "%-4zu  %-*s  %.6f\n", r + 1, static_cast<int>(w),
                  labels[i].c_str(), order.accumulated[i]);
    out += buf;
  }
  return out;
}

}  // namespace vbchain
