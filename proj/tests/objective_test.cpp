// tests/objective_test.cpp

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

#include "test_support.hpp"
#include "vbchain/error.hpp"
#include "vbchain/objective.hpp"

namespace vbchain {
namespace {

using testing::Column;
using testing::NumericGradient;
using testing::OracleCcc;
using testing::OraclePearson;
using testing::RandomMatrix;
using testing::RelativeError;

using Vec = std::vector<double>;

TEST(Ccc, HandExamples) {
  EXPECT_NEAR(Ccc(Vec{1, 2, 3}, Vec{1, 2, 3}), 1.0, 1e-15);
  EXPECT_NEAR(Ccc(Vec{1, 2, 3}, Vec{3, 2, 1}), -1.0, 1e-15);
  EXPECT_NEAR(Ccc(Vec{1, 2, 3}, Vec{2, 3, 4}), 4.0 / 7.0, 1e-15);
  EXPECT_EQ(Ccc(Vec{2, 2, 2}, Vec{5, 5, 5}), 0.0);
  EXPECT_EQ(Ccc(Vec{2, 2, 2}, Vec{2, 2, 2}), 1.0);
}

TEST(Ccc, MatchesOracle) {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    Vec x(20), y(20);
    for (std::size_t i = 0; i < 20; ++i) {
      x[i] = rng.Normal(0.3, 1.0);
      y[i] = 0.5 * x[i] + rng.Normal(0.1, 0.7);
    }
    EXPECT_NEAR(Ccc(x, y), OracleCcc(x, y), 1e-12);
  }
}

TEST(Ccc, Preconditions) {
  EXPECT_THROW(Ccc(Vec{1.0}, Vec{1.0}), Error);
  EXPECT_THROW(Ccc(Vec{1, 2}, Vec{1, 2, 3}), Error);
  try {
    Ccc(Vec{1, NAN}, Vec{1, 2});
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), Errc::kNonFinite);
  }
}

TEST(Ccc, Properties) {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 2 + rng.Index(30);
    Vec x(m), y(m);
    for (std::size_t i = 0; i < m; ++i) {
      x[i] = rng.Normal(rng.Normal(), 2.0);
      y[i] = rng.Normal() + (trial % 2 ? x[i] : -x[i]);
    }
    const double c = Ccc(x, y);
    EXPECT_NEAR(c, Ccc(y, x), 1e-12);
    EXPECT_LE(std::abs(c), 1.0 + 1e-12);
    EXPECT_NEAR(Ccc(x, x), 1.0, 1e-12);
    EXPECT_LE(std::abs(c), std::abs(OraclePearson(x, y)) + 1e-9);
    const double a = rng.Uniform(0.1, 10.0), b = rng.Normal(0.0, 5.0);
    Vec ax(m), ay(m);
    for (std::size_t i = 0; i < m; ++i) {
      ax[i] = a * x[i] + b;
      ay[i] = a * y[i] + b;
    }
    EXPECT_NEAR(Ccc(ax, ay), c, 1e-9);
  }
}

TEST(MeanCcc, Examples) {
  const Matrix x = Matrix::FromRows({{1, 1}, {2, 2}, {3, 3}});
  const Matrix y = Matrix::FromRows({{1, 3}, {2, 2}, {3, 1}});
  const MeanCcc m = MeanCccOf(x, y);
  EXPECT_NEAR(m.mean, 0.0, 1e-15);
  EXPECT_NEAR(m.per_label[0], 1.0, 1e-15);
  EXPECT_NEAR(m.per_label[1], -1.0, 1e-15);
  const MeanCcc same = MeanCccOf(x, x);
  EXPECT_EQ(same.mean, 1.0);
  const MeanCcc single = MeanCccOf(Matrix::FromRows({{1}, {2}, {3}}), Matrix::FromRows({{2}, {3}, {4}}));
  EXPECT_NEAR(single.mean, 4.0 / 7.0, 1e-15);
  EXPECT_THROW(MeanCccOf(x, Matrix(3, 1)), Error);
}

TEST(CccLoss, Examples) {
  const Matrix x = Matrix::FromRows({{1}, {2}, {3}});
  EXPECT_EQ(CccLoss(x, x), 0.0);
  EXPECT_NEAR(CccLoss(x, Matrix::FromRows({{3}, {2}, {1}})), 2.0, 1e-15);
}

TEST(CccLoss, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    Matrix x = RandomMatrix(8, 3, rng);
    const Matrix y = RandomMatrix(8, 3, rng);
    const Matrix analytic = CccLossGradient(x, y);
    const auto numeric = NumericGradient(x.data, [&] { return CccLoss(x, y); }, 1e-5);
    for (std::size_t i = 0; i < numeric.size(); ++i)
      EXPECT_LT(RelativeError(analytic.data[i], numeric[i]), 1e-4) << "seed " << seed << " i " << i;
    // The tape op agrees with the closed form.
    Parameter p("x", x);
    Tape tape;
    tape.Backward(CccLossOp(tape.Leaf(p), y));
    for (std::size_t i = 0; i < numeric.size(); ++i) EXPECT_NEAR(p.grad.data[i], analytic.data[i], 1e-12);
  }
}

TEST(CrossEntropy, Examples) {
  EXPECT_EQ(CrossEntropy(Vec{0, 1, 0}, 1), 0.0);
  EXPECT_NEAR(CrossEntropy(Vec{0.25, 0.25, 0.25, 0.25}, 3), std::log(4.0), 1e-12);
  EXPECT_NEAR(CrossEntropy(Vec{0.7, 0.2, 0.1}, 1), -std::log(0.2), 1e-12);
  EXPECT_NEAR(CrossEntropy(Vec{1, 0}, 1), -std::log(kProbabilityFloor), 1e-12);
  EXPECT_THROW(CrossEntropy(Vec{0.5, 0.6}, 0), Error);
  EXPECT_THROW(CrossEntropy(Vec{0.5, 0.5}, 2), Error);
  EXPECT_THROW(CrossEntropy(Vec{1.5, -0.5}, 0), Error);
}

TEST(CrossEntropy, OpMatchesValueAndGradient) {
  Rng rng(3);
  Matrix logits = RandomMatrix(5, 4, rng);
  Parameter p("p", logits);
  const std::size_t targets[] = {0, 3, 1, 1, 2};
  auto loss = [&](Tape &t) { return CrossEntropyOp(SoftmaxRows(t.Leaf(p)), targets); };
  Tape tape;
  const Var l = loss(tape);
  const Matrix probs = SoftmaxRows(tape.Leaf(p)).value();
  double expect = 0.0;
  for (std::size_t i = 0; i < 5; ++i) expect += CrossEntropy(probs.row(i), targets[i]);
  EXPECT_NEAR(l.value().data[0], expect / 5.0, 1e-12);
  tape.Backward(l);
  const auto numeric = NumericGradient(p.value.data, [&] {
    Tape t;
    return loss(t).value().data[0];
  }, 1e-6);
  for (std::size_t i = 0; i < numeric.size(); ++i) EXPECT_LT(RelativeError(p.grad.data[i], numeric[i]), 1e-5);
}

TEST(CombinedLoss, Examples) {
  EXPECT_EQ(CombinedLoss(0.7, Vec{0.3, 0.9}, 1.0), 0.7);
  EXPECT_NEAR(CombinedLoss(0.5, Vec{0.2, 0.3}, 0.9), 0.5, 1e-15);
  EXPECT_NEAR(CombinedLoss(0.5, Vec{}, 0.9), 0.45, 1e-15);
  EXPECT_THROW(CombinedLoss(0.5, Vec{}, 1.1), Error);
  EXPECT_THROW(CombinedLoss(0.5, Vec{}, -0.1), Error);
}

TEST(CombinedLoss, MonotoneInEachArgument) {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const double lambda = rng.Uniform(0.01, 0.99);
    const double target = rng.Uniform(0.0, 2.0);
    Vec aux = {rng.Uniform(0.0, 2.0), rng.Uniform(0.0, 2.0), rng.Uniform(0.0, 2.0)};
    const double base = CombinedLoss(target, aux, lambda);
    EXPECT_GT(CombinedLoss(target + 0.01, aux, lambda), base);
    for (std::size_t k = 0; k < 3; ++k) {
      Vec bumped = aux;
      bumped[k] += 0.01;
      EXPECT_GT(CombinedLoss(target, bumped, lambda), base);
    }
  }
}

TEST(CombinedLoss, OpMatchesValue) {
  Tape t;
  const Var aux[] = {t.Constant(Matrix(1, 1, 0.2)), t.Constant(Matrix(1, 1, 0.3))};
  EXPECT_NEAR(CombinedLossOp(t.Constant(Matrix(1, 1, 0.5)), aux, 0.9).value().data[0], 0.5, 1e-15);
}

// Draws a random, valid per-sample prediction.
TaskPredictions RandomPrediction(Rng &rng) {
  auto unit = [&](std::size_t n) {
    Vec v(n);
    for (double &x : v) x = rng.Uniform();
    return v;
  };
  auto simplex = [&](std::size_t n) {
    Vec v = unit(n);
    double s = 0.0;
    for (double x : v) s += x;
    for (double &x : v) x /= s;
    return v;
  };
  return TaskPredictions(unit(2), unit(10), simplex(4), unit(40), simplex(8));
}

TaskTargets RandomTargets(Rng &rng) {
  TaskTargets t;
  t.two = std::array<double, 2>{rng.Uniform(), rng.Uniform()};
  t.high = Vec(10);
  for (double &x : *t.high) x = rng.Uniform();
  t.culture = Vec(40);
  for (double &x : *t.culture) x = rng.Uniform();
  t.country = rng.Index(4);
  t.vb_type = rng.Index(8);
  return t;
}

TaskPredictions Perfect(const TaskTargets &t) {
  Vec country(4, 0.0), type(8, 0.0);
  country[*t.country] = 1.0;
  type[*t.vb_type] = 1.0;
  return TaskPredictions({(*t.two)[0], (*t.two)[1]}, *t.high, country, *t.culture, type);
}

TEST(Evaluate, PerfectPredictions) {
  Rng rng(5);
  std::vector<TaskTargets> targets;
  std::vector<TaskPredictions> preds;
  for (int i = 0; i < 30; ++i) {
    targets.push_back(RandomTargets(rng));
    preds.push_back(Perfect(targets.back()));
  }
  const MetricsReport r = Evaluate(preds, targets, LabelSchema::Default());
  for (Task task : {Task::kTwo, Task::kHigh, Task::kCulture}) {
    EXPECT_NEAR(r.regression.at(task).mean_ccc, 1.0, 1e-12);
    for (double c : r.regression.at(task).per_label) EXPECT_NEAR(c, 1.0, 1e-12);
  }
  EXPECT_EQ(r.classification.at(Task::kCountry).accuracy, 1.0);
  EXPECT_EQ(r.classification.at(Task::kType).uar, 1.0);
  EXPECT_EQ(r.regression.at(Task::kCulture).per_country.size(), 4u);
  for (Task task : kAllTasks) EXPECT_NEAR(LossForTask(task, preds, targets), 0.0, 1e-12);
}

TEST(Evaluate, RandomPredictionsAreNearNull) {
  Rng rng(6);
  std::vector<TaskTargets> targets;
  std::vector<TaskPredictions> preds;
  for (int i = 0; i < 10000; ++i) {
    targets.push_back(RandomTargets(rng));
    preds.push_back(RandomPrediction(rng));
  }
  const MetricsReport r = Evaluate(preds, targets, LabelSchema::Default());
  for (Task task : {Task::kTwo, Task::kHigh, Task::kCulture})
    EXPECT_LT(std::abs(r.regression.at(task).mean_ccc), 0.05) << TaskName(task);
}

TEST(Evaluate, ReportIsInternallyConsistent) {
  Rng rng(7);
  std::vector<TaskTargets> targets;
  std::vector<TaskPredictions> preds;
  for (int i = 0; i < 50; ++i) {
    TaskTargets t = RandomTargets(rng);
    if (i % 3 == 0) t.culture.reset();
    targets.push_back(t);
    preds.push_back(RandomPrediction(rng));
  }
  const MetricsReport r = Evaluate(preds, targets, LabelSchema::Default());
  for (const auto &[task, m] : r.regression) {
    double s = 0.0;
    for (double c : m.per_label) s += c;
    EXPECT_NEAR(m.mean_ccc, s / static_cast<double>(m.per_label.size()), 1e-9);
    EXPECT_EQ(m.labels.size(), m.per_label.size());
  }
  const auto &culture = r.regression.at(Task::kCulture);
  EXPECT_EQ(culture.count, 33u);
  const LabelSchema schema = LabelSchema::Default();
  for (std::size_t c = 0; c < 4; ++c) {
    double s = 0.0;
    for (std::size_t e = 0; e < 10; ++e) s += culture.per_label[CultureIndex(c, e)];
    EXPECT_NEAR(culture.per_country.at(schema.countries[c]), s / 10.0, 1e-12);
  }
  EXPECT_EQ(r.Headline(Task::kHigh), r.regression.at(Task::kHigh).mean_ccc);
  EXPECT_EQ(r.Headline(Task::kType), r.classification.at(Task::kType).uar);
}

TEST(Evaluate, TooFewSamples) {
  Rng rng(8);
  const std::vector<TaskTargets> targets = {RandomTargets(rng)};
  const std::vector<TaskPredictions> preds = {RandomPrediction(rng)};
  EXPECT_THROW(Evaluate(preds, targets, LabelSchema::Default()), Error);
}

TEST(LossForTask, UniformTypeProbabilities) {
  Rng rng(9);
  std::vector<TaskTargets> targets;
  std::vector<TaskPredictions> preds;
  for (int i = 0; i < 6; ++i) {
    targets.push_back(RandomTargets(rng));
    preds.emplace_back(Vec(2, 0.5), Vec(10, 0.5), Vec(4, 0.25), Vec(40, 0.5), Vec(8, 0.125));
  }
  EXPECT_NEAR(LossForTask(Task::kType, preds, targets), std::log(8.0), 1e-12);
  EXPECT_THROW(LossForTask(Task::kHigh, std::span(preds).first(1), std::span(targets).first(1)),
               Error);
}

TEST(MetricsReport, JsonRoundTrip) {
  Rng rng(10);
  std::vector<TaskTargets> targets;
  std::vector<TaskPredictions> preds;
  for (int i = 0; i < 20; ++i) {
    targets.push_back(RandomTargets(rng));
    preds.push_back(RandomPrediction(rng));
  }
  const MetricsReport r = Evaluate(preds, targets, LabelSchema::Default());
  const MetricsReport back = MetricsReport::FromJson(r.ToJson());
  EXPECT_EQ(back.ToJson(), r.ToJson());
  for (const auto &[task, m] : r.regression) {
    EXPECT_EQ(back.regression.at(task).per_label, m.per_label);
    EXPECT_EQ(back.regression.at(task).mean_ccc, m.mean_ccc);
  }
  EXPECT_NE(r.ToCsv().find("task,label,metric,value,count"), std::string::npos);
  EXPECT_THROW(MetricsReport::FromJson("{\"regression\": 3"), Error);
}

}  // namespace
}  // namespace vbchain
