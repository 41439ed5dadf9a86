// core/src/manifest.cpp

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

#include "vbchain/manifest.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "vbchain/error.hpp"

namespace vbchain {

namespace {

constexpr std::size_t kNumColumns = 6 + kNumEmotions + kNumCulture;

std::vector<std::string> SplitCsv(const std::string &line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  cells.push_back(cur);
  return cells;
}

std::string RowTag(std::size_t row) { return "manifest row " + std::to_string(row) + ": "; }

double ParseNumber(const std::string &cell, std::size_t row, const std::string &column) {
  double v = 0.0;
  const char *first = cell.data();
  const char *last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  Require(ec == std::errc() && ptr == last && std::isfinite(v), Errc::kParse,
          RowTag(row) + "malformed number '" + cell + "' in column " + column);
  return v;
}

void CheckRange(double v, ValueRange r, std::size_t row, const std::string &column) {
  Require(v >= r.lo && v <= r.hi, Errc::kOutOfRange,
          RowTag(row) + column + "=" + std::to_string(v) + " outside range [" +
              std::to_string(r.lo) + ", " + std::to_string(r.hi) + "]");
}

std::string FormatNumber(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::optional<std::vector<double>> ParseBlock(const std::vector<std::string> &cells,
                                              std::size_t start, std::size_t count,
                                              const char *prefix, std::size_t row) {
  std::size_t filled = 0;
  for (std::size_t i = 0; i < count; ++i) filled += cells[start + i].empty() ? 0 : 1;
  if (filled == 0) return std::nullopt;
  Require(filled == count, Errc::kParse,
          RowTag(row) + "partially filled " + prefix + "_* columns (need all or none)");
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = ParseNumber(cells[start + i], row, prefix + ("_" + std::to_string(i)));
  return out;
}

void ValidateRow(const Sample &s, const LabelSchema &schema, std::size_t row) {
  Require(!s.file_id.empty(), Errc::kParse, RowTag(row) + "empty file_id");
  if (s.country)
    Require(schema.CountryIndex(*s.country).has_value(), Errc::kParse,
            RowTag(row) + "unknown country '" + *s.country + "'");
  if (s.vb_type)
    Require(schema.VbTypeIndex(*s.vb_type).has_value(), Errc::kParse,
            RowTag(row) + "unknown vb_type '" + *s.vb_type + "'");
  if (s.arousal) CheckRange(*s.arousal, schema.two_range, row, "arousal");
  if (s.valence) CheckRange(*s.valence, schema.two_range, row, "valence");
  if (s.high) {
    Require(s.high->size() == kNumEmotions, Errc::kParse, RowTag(row) + "high needs 10 values");
    for (std::size_t i = 0; i < kNumEmotions; ++i)
      CheckRange((*s.high)[i], schema.high_range, row, "high_" + std::to_string(i));
  }
  if (s.culture) {
    Require(s.culture->size() == kNumCulture, Errc::kParse,
            RowTag(row) + "culture needs 40 values");
    for (std::size_t i = 0; i < kNumCulture; ++i)
      CheckRange((*s.culture)[i], schema.high_range, row, "culture_" + std::to_string(i));
  }
}

}  // namespace

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

std::optional<Split> ParseSplit(std::string_view name) {
  for (Split s : {Split::kTrain, Split::kVal, Split::kTest})
    if (SplitName(s) == name) return s;
  return std::nullopt;
}

std::vector<const Sample *> Manifest::InSplit(Split split) const {
  std::vector<const Sample *> out;
  for (const auto &r : rows)
    if (r.split == split) out.push_back(&r);
  return out;
}

const Sample *Manifest::Find(std::string_view file_id) const {
  for (const auto &r : rows)
    if (r.file_id == file_id) return &r;
  return nullptr;
}

void Manifest::Validate(const LabelSchema &schema) const {
  std::set<std::string> ids;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ValidateRow(rows[i], schema, i + 1);
    Require(ids.insert(rows[i].file_id).second, Errc::kParse,
            RowTag(i + 1) + "duplicate file_id '" + rows[i].file_id + "'");
  }
}

std::string ManifestHeader() {
  std::ostringstream os;
  os << "file_id,split,country,vb_type,arousal,valence";
  for (std::size_t i = 0; i < kNumEmotions; ++i) os << ",high_" << i;
  for (std::size_t i = 0; i < kNumCulture; ++i) os << ",culture_" << i;
  return os.str();
}

Manifest ReadManifest(const std::filesystem::path &path, const LabelSchema &schema) {
  std::ifstream in(path);
  Require(in.good(), Errc::kNotFound, "manifest not found: " + path.string());
  std::string line;
  bool have_header = false;
  std::size_t row = 0;
  Manifest m;
  std::set<std::string> ids;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!have_header) {
      Require(line == ManifestHeader(), Errc::kParse,
              "manifest " + path.string() + " has an unexpected header");
      have_header = true;
      continue;
    }
    ++row;
    const auto cells = SplitCsv(line);
    Require(cells.size() == kNumColumns, Errc::kParse,
            RowTag(row) + "expected " + std::to_string(kNumColumns) + " columns, got " +
                std::to_string(cells.size()));
    Sample s;
    s.file_id = cells[0];
    const auto split = ParseSplit(cells[1]);
    Require(split.has_value(), Errc::kParse, RowTag(row) + "unknown split '" + cells[1] + "'");
    s.split = *split;
    if (!cells[2].empty()) s.country = cells[2];
    if (!cells[3].empty()) s.vb_type = cells[3];
    if (!cells[4].empty()) s.arousal = ParseNumber(cells[4], row, "arousal");
    if (!cells[5].empty()) s.valence = ParseNumber(cells[5], row, "valence");
    s.high = ParseBlock(cells, 6, kNumEmotions, "high", row);
    s.culture = ParseBlock(cells, 6 + kNumEmotions, kNumCulture, "culture", row);
    ValidateRow(s, schema, row);
    Require(ids.insert(s.file_id).second, Errc::kParse,
            RowTag(row) + "duplicate file_id '" + s.file_id + "'");
    m.rows.push_back(std::move(s));
  }
  Require(have_header, Errc::kParse, "manifest " + path.string() + " is missing its header");
  return m;
}

void WriteManifest(const Manifest &manifest, const std::filesystem::path &path,
                   const LabelSchema &schema) {
  manifest.Validate(schema);
  std::ofstream os(path, std::ios::trunc);
  Require(os.good(), Errc::kIo, "cannot write manifest " + path.string());
  os << "# high_0..high_9 =";
  for (const auto &e : schema.emotions) os << ' ' << e << ';';
  os << " culture_0..culture_39 =";
  for (const auto &c : schema.CultureLabels()) os << ' ' << c << ';';
  os << '\n' << ManifestHeader() << '\n';
  for (const auto &s : manifest.rows) {
    os << s.file_id << ',' << SplitName(s.split) << ',' << s.country.value_or("") << ','
       << s.vb_type.value_or("") << ',' << (s.arousal ? FormatNumber(*s.arousal) : "") << ','
       << (s.valence ? FormatNumber(*s.valence) : "");
    for (std::size_t i = 0; i < kNumEmotions; ++i)
      os << ',' << (s.high ? FormatNumber((*s.high)[i]) : "");
    for (std::size_t i = 0; i < kNumCulture; ++i)
      os << ',' << (s.culture ? FormatNumber((*s.culture)[i]) : "");
    os << '\n';
  }
  Require(os.good(), Errc::kIo, "failed writing manifest " + path.string());
}

TaskTargets ToTargets(const Sample &sample, const LabelSchema &schema) {
  TaskTargets t;
  if (sample.arousal && sample.valence)
    t.two = std::array<double, kNumTwo>{NormalizeTarget(*sample.arousal, schema.two_range),
                                        NormalizeTarget(*sample.valence, schema.two_range)};
  if (sample.high) {
    std::vector<double> v(sample.high->size());
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] = NormalizeTarget((*sample.high)[i], schema.high_range);
    t.high = std::move(v);
  }
  if (sample.culture) {
    std::vector<double> v(sample.culture->size());
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] = NormalizeTarget((*sample.culture)[i], schema.high_range);
    t.culture = std::move(v);
  }
  if (sample.country) t.country = schema.CountryIndex(*sample.country);
  if (sample.vb_type) t.vb_type = schema.VbTypeIndex(*sample.vb_type);
  return t;
}

}  // namespace vbchain
