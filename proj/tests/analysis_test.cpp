// tests/analysis_test.cpp

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

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "test_support.hpp"
#include "vbchain/analysis.hpp"
#include "vbchain/error.hpp"
#include "vbchain/synth.hpp"
#include "vbchain/trainer.hpp"

namespace vbchain {
namespace {

using testing::Column;
using testing::OraclePearson;
using testing::RandomMatrix;

TEST(CorrelationMatrix, AffineDependence) {
  Rng rng(1);
  Matrix y(20, 2);
  for (std::size_t i = 0; i < 20; ++i) {
    y(i, 0) = rng.Normal();
    y(i, 1) = 2.0 * y(i, 0) + 1.0;
  }
  EXPECT_NEAR(CorrelationMatrix(y)(0, 1), 1.0, 1e-12);
}

TEST(CorrelationMatrix, IndependentColumnsNearZero) {
  Rng rng(2);
  const Matrix r = CorrelationMatrix(RandomMatrix(10000, 5, rng));
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j)
      if (i != j) EXPECT_LT(std::abs(r(i, j)), 0.05);
}

TEST(CorrelationMatrix, MatchesOracleAndIsSymmetric) {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix y = RandomMatrix(50, 4, rng);
    for (std::size_t i = 0; i < 50; ++i) y(i, 2) += 0.5 * y(i, 0) - y(i, 3);
    const Matrix r = CorrelationMatrix(y);
    for (std::size_t i = 0; i < 4; ++i) {
      EXPECT_EQ(r(i, i), 1.0);
      for (std::size_t j = 0; j < 4; ++j) {
        EXPECT_EQ(r(i, j), r(j, i));
        EXPECT_LE(std::abs(r(i, j)), 1.0);
        if (i != j) EXPECT_NEAR(r(i, j), OraclePearson(Column(y, i), Column(y, j)), 1e-9);
      }
    }
  }
}

TEST(CorrelationMatrix, ConstantColumnIsNamed) {
  Rng rng(4);
  Matrix y = RandomMatrix(10, 2, rng);
  for (std::size_t i = 0; i < 10; ++i) y(i, 0) = 3.0;
  const std::vector<std::string> names = {"Horror", "Joy"};
  try {
    CorrelationMatrix(y, &names);
    FAIL();
  } catch (const Error &e) {
    EXPECT_NE(std::string(e.what()).find("Horror"), std::string::npos);
  }
}

TEST(CorrelationMatrix, CsvLayout) {
  const Matrix r = Matrix::FromRows({{1.0, 0.5}, {0.5, 1.0}});
  const std::string csv = CorrelationCsv(r, {"a", "b"});
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "label,a,b");
  std::getline(in, line);
  EXPECT_EQ(line.rfind("a,1", 0), 0u);
  EXPECT_THROW(CorrelationCsv(r, {"a"}), Error);
}

Manifest SyntheticManifest(std::size_t n, std::uint64_t seed = 0) {
  SynthSpec spec;
  spec.n_samples = n;
  spec.seed = seed;
  return GenerateSynthetic(spec, LabelSchema::Default()).manifest;
}

TEST(AvScatter, CentroidsFallInGeneratingRegions) {
  const LabelSchema schema = LabelSchema::Default();
  const AvScatterSummary s = SummarizeAvScatter(SyntheticManifest(2000), schema);
  EXPECT_EQ(s.types.size(), 8u);
  std::size_t total = 0;
  for (const TypeScatter &t : s.types) {
    const std::size_t idx = *schema.VbTypeIndex(t.vb_type);
    EXPECT_EQ(SynthQuadrantType(t.mean_arousal, t.mean_valence), idx) << t.vb_type;
    std::size_t cells = 0;
    for (std::size_t c : t.grid) cells += c;
    EXPECT_EQ(cells, t.count);
    EXPECT_EQ(t.grid.size(), s.bins * s.bins);
    total += t.count;
  }
  EXPECT_EQ(total, 2000u);
  EXPECT_TRUE(s.notes.empty());
}

TEST(AvScatter, SingleSampleCentroidIsTheSample) {
  const LabelSchema schema = LabelSchema::Default();
  Manifest m;
  Sample s;
  s.file_id = "a";
  s.vb_type = "laugh";
  s.arousal = 7.0;
  s.valence = 3.0;
  m.rows.push_back(s);
  const AvScatterSummary sum = SummarizeAvScatter(m, schema);
  ASSERT_EQ(sum.types.size(), 1u);
  EXPECT_EQ(sum.types[0].count, 1u);
  EXPECT_NEAR(sum.types[0].mean_arousal, NormalizeTarget(7.0, schema.two_range), 1e-15);
  EXPECT_NEAR(sum.types[0].mean_valence, NormalizeTarget(3.0, schema.two_range), 1e-15);
  EXPECT_EQ(sum.notes.size(), 7u);
  EXPECT_NE(sum.CentroidCsv().find("laugh,1,"), std::string::npos);
}

TEST(AvScatter, EmptyIntersectionGivesNote) {
  Manifest m;
  Sample s;
  s.file_id = "a";
  s.vb_type = "cry";
  m.rows.push_back(s);
  s.file_id = "b";
  s.vb_type.reset();
  s.arousal = 2.0;
  s.valence = 2.0;
  m.rows.push_back(s);
  const AvScatterSummary sum = SummarizeAvScatter(m, LabelSchema::Default());
  EXPECT_TRUE(sum.types.empty());
  EXPECT_FALSE(sum.notes.empty());
  EXPECT_EQ(sum.GridCsv(), "vb_type,arousal_bin,valence_bin,count\n");
}

TEST(CountryDistribution, OnePerCountry) {
  const LabelSchema schema = LabelSchema::Default();
  Manifest m;
  for (std::size_t c = 0; c < 4; ++c) {
    Sample s;
    s.file_id = "s" + std::to_string(c);
    s.country = schema.countries[c];
    m.rows.push_back(s);
  }
  const CountryDistribution d = CountCountries(m, schema);
  EXPECT_EQ(d.columns.back(), "(none)");
  for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(d.totals[c], 1u);
  EXPECT_EQ(d.totals[4], 0u);
  EXPECT_EQ(d.total, 4u);
}

TEST(CountryDistribution, CountsSumToManifestSize) {
  Manifest m = SyntheticManifest(300, 4);
  for (std::size_t i = 0; i < m.rows.size(); i += 7) m.rows[i].country.reset();
  const CountryDistribution d = CountCountries(m, LabelSchema::Default());
  std::size_t sum = 0;
  for (std::size_t t : d.totals) sum += t;
  EXPECT_EQ(sum, 300u);
  EXPECT_EQ(d.total, 300u);
  std::size_t split_sum = 0;
  for (const auto &[split, counts] : d.per_split)
    for (std::size_t c : counts) split_sum += c;
  EXPECT_EQ(split_sum, 300u);
  EXPECT_EQ(d.totals.back(), 43u);
}

TEST(CountryDistribution, UniformGeneratorWithinBinomialBound) {
  const CountryDistribution d = CountCountries(SyntheticManifest(4000, 9), LabelSchema::Default());
  for (std::size_t c = 0; c < 4; ++c) {
    EXPECT_GE(d.totals[c], 900u);
    EXPECT_LE(d.totals[c], 1100u);
  }
}

TEST(ChainOrderReport, DelegatesToChainOrderDerivation) {
  const LabelSchema schema = LabelSchema::Default();
  const Manifest m = SyntheticManifest(200, 5);
  for (Task task : {Task::kHigh, Task::kCulture}) {
    const ChainOrderReport r = MakeChainOrderReport(m, schema, task);
    EXPECT_EQ(r.order, DeriveChainOrder(SplitLabelMatrix(m, schema, task, Split::kTrain)));
    EXPECT_EQ(r.labels.size(), TaskArity(task));
  }
  EXPECT_THROW(MakeChainOrderReport(m, schema, Task::kTwo), Error);
}

TEST(ChainOrderReport, RowsSortedByRank) {
  const ChainOrderReport r = MakeChainOrderReport(SyntheticManifest(200, 6), LabelSchema::Default());
  std::istringstream in(r.ToCsv());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "rank,label,index,accumulated_abs_r");
  double prev = 1e9;
  for (std::size_t rank = 1; std::getline(in, line); ++rank) {
    std::istringstream row(line);
    std::string f[4];
    for (auto &x : f) std::getline(row, x, ',');
    EXPECT_EQ(std::stoul(f[0]), rank);
    EXPECT_EQ(std::stoul(f[2]), r.order.order[rank - 1]);
    EXPECT_EQ(f[1], r.labels[r.order.order[rank - 1]]);
    EXPECT_LE(std::stod(f[3]), prev);
    prev = std::stod(f[3]);
  }
  EXPECT_FALSE(r.ToText().empty());
}

TEST(ChainOrderReport, PlantedPairLeads) {
  // Independent emotion scores except for one strongly coupled pair.
  const LabelSchema schema = LabelSchema::Default();
  Rng rng(7);
  Manifest m;
  for (int i = 0; i < 500; ++i) {
    Sample s;
    s.file_id = "p" + std::to_string(i);
    std::vector<double> h(10);
    for (double &x : h) x = rng.Uniform(1.0, 100.0);
    h[6] = std::clamp(h[2] + rng.Normal(0.0, 5.0), 1.0, 100.0);
    s.high = h;
    m.rows.push_back(s);
  }
  const ChainOrderReport r = MakeChainOrderReport(m, schema);
  const std::vector<std::size_t> head(r.order.order.begin(), r.order.order.begin() + 2);
  EXPECT_TRUE((head == std::vector<std::size_t>{2, 6}) || (head == std::vector<std::size_t>{6, 2}));
}

}  // namespace
}  // namespace vbchain
