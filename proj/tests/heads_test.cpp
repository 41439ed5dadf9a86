// tests/heads_test.cpp

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

#include <algorithm>
#include <cmath>
#include <fstream>

#include "test_support.hpp"
#include "vbchain/error.hpp"
#include "vbchain/heads.hpp"
#include "vbchain/model.hpp"
#include "vbchain/objective.hpp"

namespace vbchain {
namespace {

using testing::NumericGradient;
using testing::OracleChainOrder;
using testing::RandomMatrix;
using testing::RelativeError;
using testing::TempDir;

// Columns with exactly the requested Pearson matrix: orthonormal centered
// columns mixed by the Cholesky factor of `r`.
Matrix WithCorrelation(const Matrix &r, std::size_t m, Rng &rng) {
  const std::size_t n = r.rows;
  Matrix q = RandomMatrix(m, n, rng);
  for (std::size_t j = 0; j < n; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) mean += q(i, j);
    for (std::size_t i = 0; i < m; ++i) q(i, j) -= mean / m;
    for (std::size_t k = 0; k < j; ++k) {
      double dot = 0.0;
      for (std::size_t i = 0; i < m; ++i) dot += q(i, j) * q(i, k);
      for (std::size_t i = 0; i < m; ++i) q(i, j) -= dot * q(i, k);
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < m; ++i) norm += q(i, j) * q(i, j);
    for (std::size_t i = 0; i < m; ++i) q(i, j) /= std::sqrt(norm);
  }
  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = r(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = i == j ? std::sqrt(s) : s / l(j, j);
    }
  Matrix out(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k <= j; ++k) out(i, j) += q(i, k) * l(j, k);
  return out;
}

TEST(DeriveChainOrder, SingleLabel) {
  Rng rng(1);
  EXPECT_EQ(DeriveChainOrder(RandomMatrix(5, 1, rng)).order, std::vector<std::size_t>{0});
}

TEST(DeriveChainOrder, HandAccumulatedExample) {
  Rng rng(2);
  const Matrix r = Matrix::FromRows({{1, .9, .1}, {.9, 1, .2}, {.1, .2, 1}});
  const ChainOrder o = DeriveChainOrder(WithCorrelation(r, 40, rng));
  EXPECT_EQ(o.order, (std::vector<std::size_t>{1, 0, 2}));
  EXPECT_NEAR(o.accumulated[0], 1.0, 1e-9);
  EXPECT_NEAR(o.accumulated[1], 1.1, 1e-9);
  EXPECT_NEAR(o.accumulated[2], 0.3, 1e-9);
}

TEST(DeriveChainOrder, PerfectlyAnticorrelatedPairLeads) {
  Rng rng(3);
  Matrix y(60, 3);
  for (std::size_t i = 0; i < 60; ++i) {
    y(i, 0) = rng.Normal();
    y(i, 1) = -y(i, 0);
    y(i, 2) = rng.Normal();
  }
  const ChainOrder o = DeriveChainOrder(y);
  EXPECT_EQ(std::max(o.order[0], o.order[1]), 1u);
  EXPECT_EQ(o.order[2], 2u);
  const auto oracle = OracleChainOrder(y);
  EXPECT_EQ(o.order, oracle.order);
}

TEST(DeriveChainOrder, DuplicatedColumnsTieByIndex) {
  Rng rng(40);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix y = RandomMatrix(25, 4, rng);
    for (std::size_t i = 0; i < 25; ++i) y(i, 3) = y(i, 1);
    const ChainOrder o = DeriveChainOrder(y);
    const auto pos = [&](std::size_t label) {
      return std::find(o.order.begin(), o.order.end(), label) - o.order.begin();
    };
    // Labels 1 and 3 are perfectly correlated, so both lead; 1 comes first.
    EXPECT_EQ(pos(1), 0);
    EXPECT_EQ(pos(3), 1);
  }
}

TEST(DeriveChainOrder, MatchesBruteForceOracle) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix y = RandomMatrix(30, 6, rng);
    for (std::size_t i = 0; i < 30; ++i) y(i, 3) += 0.8 * y(i, 1);
    const ChainOrder o = DeriveChainOrder(y);
    const auto oracle = OracleChainOrder(y);
    EXPECT_EQ(o.order, oracle.order);
    for (std::size_t j = 0; j < 6; ++j) EXPECT_NEAR(o.accumulated[j], oracle.accumulated[j], 1e-9);
    EXPECT_NO_THROW(o.Validate(6));
  }
}

TEST(DeriveChainOrder, PermutationEquivariant) {
  Rng rng(5);
  const Matrix y = RandomMatrix(25, 5, rng);
  const std::vector<std::size_t> perm = {3, 0, 4, 1, 2};  // new column c holds old perm[c]
  Matrix p(25, 5);
  for (std::size_t i = 0; i < 25; ++i)
    for (std::size_t c = 0; c < 5; ++c) p(i, c) = y(i, perm[c]);
  const ChainOrder a = DeriveChainOrder(y), b = DeriveChainOrder(p);
  for (std::size_t c = 0; c < 5; ++c) EXPECT_NEAR(b.accumulated[c], a.accumulated[perm[c]], 1e-12);
  std::vector<std::size_t> mapped;
  for (std::size_t i : b.order) mapped.push_back(perm[i]);
  EXPECT_EQ(mapped, a.order);
}

TEST(DeriveChainOrder, ConstantColumnIsNamed) {
  Rng rng(6);
  Matrix y = RandomMatrix(10, 3, rng);
  for (std::size_t i = 0; i < 10; ++i) y(i, 1) = 0.4;
  const std::vector<std::string> names = {"Awe", "Fear", "Joy"};
  try {
    DeriveChainOrder(y, &names);
    FAIL();
  } catch (const Error &e) {
    EXPECT_NE(std::string(e.what()).find("Fear"), std::string::npos) << e.what();
  }
}

TEST(DeriveChainOrder, TooFewRows) {
  Rng rng(7);
  EXPECT_THROW(DeriveChainOrder(RandomMatrix(2, 3, rng)), Error);
}

TEST(ChainOrder, TieBreakByIndex) {
  const ChainOrder o = ChainOrder::FromAccumulated({0.5, 0.9, 0.5, 0.9});
  EXPECT_EQ(o.order, (std::vector<std::size_t>{1, 3, 0, 2}));
  EXPECT_EQ(o.Reversed(), (std::vector<std::size_t>{2, 0, 3, 1}));
  ChainOrder bad = o;
  std::swap(bad.order[0], bad.order[1]);
  EXPECT_THROW(bad.Validate(4), Error);
}

void Randomize(RegressionChain &c, Rng &rng) {
  std::vector<Parameter *> ps;
  c.AppendParameters(ps);
  for (Parameter *p : ps)
    for (double &v : p->value.data) v = rng.Normal();
}

TEST(RegressionChain, ZeroParametersGiveOneHalf) {
  Rng rng(8);
  RegressionChain c("c", 4, 5, 0, rng);
  c.ZeroParameters();
  const std::vector<double> z = {1.0, -2.0, 3.0, 0.5};
  for (double v : ChainForward(z, ChainOrder::Identity(5), c)) EXPECT_DOUBLE_EQ(v, 0.5);
  RegressionChain b("b", 4, 5, 0, rng);
  b.ZeroParameters();
  for (double v : BidirectionalChain(z, ChainOrder::Identity(5), c, b)) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(RegressionChain, SingleLabelIsOrderFree) {
  Rng rng(9);
  RegressionChain c("c", 3, 1, 0, rng);
  const std::vector<double> z = {0.2, -0.7, 1.1};
  const double expect = 1.0 / (1.0 + std::exp(-(0.2 * c.first(0).weight().value(0, 0) +
                                                 -0.7 * c.first(0).weight().value(1, 0) +
                                                 1.1 * c.first(0).weight().value(2, 0) +
                                                 c.first(0).bias().value(0, 0))));
  EXPECT_NEAR(ChainForward(z, ChainOrder::Identity(1), c)[0], expect, 1e-12);
}

TEST(RegressionChain, TwoLabelHandCase) {
  Rng rng(10);
  RegressionChain c("c", 1, 2, 0, rng);
  c.ZeroParameters();
  // Position 1 sees [z, y_0] and uses only the previous score.
  c.first(1).weight().value(1, 0) = 4.0;
  c.first(1).bias().value(0, 0) = -2.0;
  const std::vector<double> z = {3.0};
  const auto out = ChainForward(z, ChainOrder::Identity(2), c);
  EXPECT_DOUBLE_EQ(out[0], 0.5);
  EXPECT_DOUBLE_EQ(out[1], 0.5);
  // Shift position 0 so that the dependence is visible.
  c.first(0).bias().value(0, 0) = 1.0;
  const double y0 = 1.0 / (1.0 + std::exp(-1.0));
  const auto shifted = ChainForward(z, ChainOrder::Identity(2), c);
  EXPECT_NEAR(shifted[0], y0, 1e-12);
  EXPECT_NEAR(shifted[1], 1.0 / (1.0 + std::exp(-(4.0 * y0 - 2.0))), 1e-12);
  // Reported in label order: with order [1, 0] position 0 predicts label 1.
  const auto swapped = ChainForward(z, ChainOrder::FromAccumulated({0.0, 1.0}), c);
  EXPECT_NEAR(swapped[1], y0, 1e-12);
  EXPECT_NEAR(swapped[0], shifted[1], 1e-12);
}

TEST(RegressionChain, InjectionOnlyAffectsLaterPositions) {
  Rng rng(11);
  RegressionChain c("c", 3, 5, 0, rng);
  Randomize(c, rng);
  const ChainOrder order = ChainOrder::FromAccumulated({0.3, 0.9, 0.1, 0.5, 0.7});
  const std::vector<double> z = {0.4, -1.0, 0.8};
  const auto base = ChainForward(z, order, c);
  for (std::size_t j = 0; j < 4; ++j) {
    const ChainInjection inj{j, base[order.order[j]] > 0.5 ? 0.01 : 0.99};
    const auto out = ChainForward(z, order, c, &inj);
    for (std::size_t p = 0; p < j; ++p) EXPECT_EQ(out[order.order[p]], base[order.order[p]]);
    EXPECT_EQ(out[order.order[j]], inj.value);
    bool changed = false;
    for (std::size_t p = j + 1; p < 5; ++p)
      changed = changed || std::abs(out[order.order[p]] - base[order.order[p]]) > 1e-9;
    EXPECT_TRUE(changed) << "position " << j;
  }
}

TEST(RegressionChain, HiddenLayerVariant) {
  Rng rng(12);
  RegressionChain c("c", 3, 4, 6, rng);
  EXPECT_EQ(c.hidden(), 6u);
  const std::vector<double> z = {0.1, 0.2, 0.3};
  for (double v : ChainForward(z, ChainOrder::Identity(4), c)) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
  c.ZeroParameters();
  for (double v : ChainForward(z, ChainOrder::Identity(4), c)) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(RegressionChain, DimensionMismatch) {
  Rng rng(13);
  RegressionChain c("c", 3, 2, 0, rng);
  const std::vector<double> z = {1.0, 2.0};
  EXPECT_THROW(ChainForward(z, ChainOrder::Identity(2), c), Error);
  const std::vector<double> ok = {1.0, 2.0, 3.0};
  EXPECT_THROW(ChainForward(ok, ChainOrder::Identity(3), c), Error);
}

TEST(BidirectionalChain, EqualsMeanOfDirections) {
  Rng rng(14);
  for (int trial = 0; trial < 10; ++trial) {
    RegressionChain f("f", 4, 6, 0, rng), b("b", 4, 6, 0, rng);
    Randomize(f, rng);
    Randomize(b, rng);
    std::vector<double> acc(6), z(4);
    for (double &a : acc) a = rng.Uniform();
    for (double &v : z) v = rng.Normal();
    const ChainOrder order = ChainOrder::FromAccumulated(acc);
    ChainOrder rev = order;
    rev.order = order.Reversed();
    for (double &a : rev.accumulated) a = -a;
    const auto fw = ChainForward(z, order, f);
    const auto bw = ChainForward(z, rev, b);
    const auto both = BidirectionalChain(z, order, f, b);
    for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(both[i], 0.5 * (fw[i] + bw[i]), 1e-7);
    // Swapping the directions together with the order leaves the output fixed.
    const auto swapped = BidirectionalChain(z, rev, b, f);
    for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(swapped[i], both[i], 1e-12);
  }
}

TEST(BidirectionalChain, SingleLabelAveragesPredictors) {
  Rng rng(15);
  RegressionChain f("f", 2, 1, 0, rng), b("b", 2, 1, 0, rng);
  const std::vector<double> z = {0.3, -0.4};
  const double a = ChainForward(z, ChainOrder::Identity(1), f)[0];
  const double c = ChainForward(z, ChainOrder::Identity(1), b)[0];
  EXPECT_NEAR(BidirectionalChain(z, ChainOrder::Identity(1), f, b)[0], 0.5 * (a + c), 1e-15);
}

class ChainGradient : public ::testing::TestWithParam<std::size_t> {};

TEST_P(ChainGradient, MatchesFiniteDifferences) {
  Rng rng(16);
  const std::size_t hidden = GetParam();
  RegressionChain f("f", 5, 3, hidden, rng), b("b", 5, 3, hidden, rng);
  Randomize(f, rng);
  Randomize(b, rng);
  const ChainOrder order = ChainOrder::FromAccumulated({0.2, 0.8, 0.5});
  const Matrix z = RandomMatrix(2, 5, rng);
  const Matrix probe = RandomMatrix(2, 3, rng);
  auto loss = [&](Tape &t) {
    return Sum(MulConst(BidirectionalChainOp(t, t.Constant(z), order, f, b), probe));
  };
  std::vector<Parameter *> ps;
  f.AppendParameters(ps);
  b.AppendParameters(ps);
  for (Parameter *p : ps) p->ZeroGrad();
  Tape tape;
  tape.Backward(loss(tape));
  for (Parameter *p : ps) {
    const auto numeric = NumericGradient(p->value.data, [&] {
      Tape t;
      return loss(t).value().data[0];
    }, 1e-6);
    for (std::size_t i = 0; i < numeric.size(); ++i) {
      if (std::abs(numeric[i]) < 1e-9 && std::abs(p->grad.data[i]) < 1e-9) continue;
      EXPECT_LT(RelativeError(p->grad.data[i], numeric[i]), 1e-4) << p->name << "[" << i << "]";
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Widths, ChainGradient, ::testing::Values(0u, 4u));

ModelConfig SmallModel() {
  ModelConfig c;
  c.num_layers = 3;
  c.feature_dim = 6;
  c.attention_dim = 4;
  c.projection_dim = 12;
  c.shared_dim = 8;
  return c;
}

TEST(TaskGraph, OutputShapes) {
  Rng init(17), rng(18);
  TaskGraph g(SmallModel(), init);
  Tape t;
  const HeadOutputs h = g.Forward(t, t.Constant(RandomMatrix(2, 12, rng)), false, nullptr);
  EXPECT_EQ(h.two.rows(), 2u);
  EXPECT_EQ(h.two.cols(), 2u);
  EXPECT_EQ(h.high.cols(), 10u);
  EXPECT_EQ(h.country.cols(), 4u);
  EXPECT_EQ(h.culture.cols(), 40u);
  EXPECT_EQ(h.type.cols(), 8u);
  for (const Var *v : {&h.high, &h.country, &h.culture, &h.type}) EXPECT_EQ(v->rows(), 2u);
}

TEST(TaskGraph, ConstantInputGivesIdenticalRows) {
  Rng init(19), rng(20);
  TaskGraph g(SmallModel(), init);
  const Matrix row = RandomMatrix(1, 12, rng);
  Matrix z(3, 12);
  for (std::size_t i = 0; i < 3; ++i) std::copy(row.data.begin(), row.data.end(), z.data.begin() + i * 12);
  Tape t;
  const auto preds = ToPredictions(g.Forward(t, t.Constant(z), false, nullptr));
  for (Task task : kAllTasks) {
    EXPECT_EQ(preds[0].ForTask(task), preds[1].ForTask(task));
    EXPECT_EQ(preds[0].ForTask(task), preds[2].ForTask(task));
  }
}

TEST(TaskGraph, TwoInjectionOnlyMovesDownstream) {
  Rng init(21), rng(22);
  TaskGraph g(SmallModel(), init);
  const Matrix z = RandomMatrix(2, 12, rng);
  Tape t;
  const auto base = ToPredictions(g.Forward(t, t.Constant(z), false, nullptr));
  HeadHooks hooks;
  hooks.two_delta = std::array<double, 2>{0.4, -0.3};
  const auto hooked = ToPredictions(g.Forward(t, t.Constant(z), false, nullptr, &hooks));
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(hooked[i].two(), base[i].two());
    for (Task task : {Task::kHigh, Task::kType, Task::kCountry, Task::kCulture})
      EXPECT_NE(hooked[i].ForTask(task), base[i].ForTask(task)) << TaskName(task);
  }
}

TEST(TaskGraph, PredictionsValidForExtremeInputs) {
  Rng init(23), rng(24);
  for (bool chains : {true, false}) {
    ModelConfig c = SmallModel();
    c.use_chains = chains;
    TaskGraph g(c, init);
    for (double scale : {1.0, 1e3, 1e6}) {
      Matrix z = RandomMatrix(4, 12, rng, -scale, scale);
      Tape t;
      EXPECT_NO_THROW(ToPredictions(g.Forward(t, t.Constant(z), false, nullptr)));
    }
  }
}

TEST(TaskGraph, OrdersAreValidated) {
  Rng init(25);
  TaskGraph g(SmallModel(), init);
  EXPECT_THROW(g.set_orders(ChainOrder::Identity(9), ChainOrder::Identity(40)), Error);
  std::vector<double> acc(10);
  for (std::size_t i = 0; i < 10; ++i) acc[i] = static_cast<double>(i);
  g.set_orders(ChainOrder::FromAccumulated(acc), ChainOrder::Identity(40));
  EXPECT_EQ(g.high_order().order.front(), 9u);
}

TEST(TaskGraph, TargetOnlyLossLeavesAuxiliaryBranchesUntouched) {
  Rng rng(26);
  ModelConfig c = SmallModel();
  c.loss_lambda = 1.0;
  Model model(LabelSchema::Default(), c, 3);
  std::vector<FeatureStack> stacks;
  for (int i = 0; i < 4; ++i) {
    FeatureStack s("s" + std::to_string(i), 3, 5, 6);
    for (float &v : s.values) v = static_cast<float>(rng.Normal());
    stacks.push_back(s);
  }
  std::vector<const FeatureStack *> ptrs;
  for (const auto &s : stacks) ptrs.push_back(&s);
  Tape tape;
  Rng drop(1);
  const ModelForward f = model.Run(tape, ptrs, true, &drop);
  const Var target = CccLossOp(f.heads.high, RandomMatrix(4, 10, rng, 0.0, 1.0));
  const std::size_t classes[] = {0, 1, 2, 3};
  const Var aux[] = {CccLossOp(f.heads.two, RandomMatrix(4, 2, rng, 0.0, 1.0)),
                     CrossEntropyOp(f.heads.country, classes), CrossEntropyOp(f.heads.type, classes),
                     CccLossOp(f.heads.culture, RandomMatrix(4, 40, rng, 0.0, 1.0))};
  for (Parameter *p : model.Parameters()) p->ZeroGrad();
  tape.Backward(CombinedLossOp(target, aux, 1.0));
  for (Task task : {Task::kCountry, Task::kType, Task::kCulture})
    for (Parameter *p : model.heads().TaskParameters(task))
      for (double g : p->grad.data) EXPECT_EQ(g, 0.0) << p->name;
  double high_norm = 0.0;
  for (Parameter *p : model.heads().TaskParameters(Task::kHigh))
    for (double g : p->grad.data) high_norm += std::abs(g);
  EXPECT_GT(high_norm, 0.0);
}

TEST(ModelArtifact, RoundTripIsBitExact) {
  Rng rng(27);
  Model model(LabelSchema::Default(), SmallModel(), 11);
  std::vector<double> acc(10);
  for (double &a : acc) a = rng.Uniform();
  std::vector<double> acc40(40);
  for (double &a : acc40) a = rng.Uniform();
  model.heads().set_orders(ChainOrder::FromAccumulated(acc), ChainOrder::FromAccumulated(acc40));
  for (Parameter *p : model.Parameters())
    for (double &v : p->value.data) v += rng.Normal(0.0, 0.01);
  TempDir dir;
  SaveModel(model, dir.path() / "m.bin");
  Model loaded = LoadModel(dir.path() / "m.bin");
  EXPECT_EQ(loaded.config(), model.config());
  EXPECT_EQ(loaded.schema(), model.schema());
  EXPECT_EQ(loaded.heads().high_order(), model.heads().high_order());
  EXPECT_EQ(loaded.heads().culture_order(), model.heads().culture_order());
  const auto a = model.NamedTensors(), b = loaded.NamedTensors();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].first, b[i].first);
    EXPECT_EQ(a[i].second->data, b[i].second->data);
  }
  FeatureStack s("x", 3, 4, 6);
  for (float &v : s.values) v = static_cast<float>(rng.Normal());
  const FeatureStack *ptrs[] = {&s};
  const auto pa = model.Predict(ptrs), pb = loaded.Predict(ptrs);
  for (Task task : kAllTasks) EXPECT_EQ(pa[0].ForTask(task), pb[0].ForTask(task));
}

TEST(ModelArtifact, RejectsSchemaMismatchAndCorruption) {
  Model model(LabelSchema::Default(), SmallModel(), 1);
  TempDir dir;
  const auto path = dir.path() / "m.bin";
  SaveModel(model, path);
  LabelSchema other = LabelSchema::Default();
  other.emotions[0] = "Wonder";
  try {
    LoadModel(path, &other);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), Errc::kSchemaMismatch);
  }
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.write("XXXX", 4);
  }
  try {
    LoadModel(path);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), Errc::kBadMagic);
  }
  try {
    LoadModel(dir.path() / "absent.bin");
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), Errc::kNotFound);
  }
}

TEST(ModelArtifact, TruncatedPayload) {
  Model model(LabelSchema::Default(), SmallModel(), 1);
  TempDir dir;
  const auto path = dir.path() / "m.bin";
  SaveModel(model, path);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 8);
  try {
    LoadModel(path);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), Errc::kTruncated);
  }
}

}  // namespace
}  // namespace vbchain
