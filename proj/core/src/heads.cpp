// core/src/heads.cpp

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

#include "vbchain/heads.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "vbchain/error.hpp"
#include "vbchain/stats.hpp"

namespace vbchain {

ChainOrder ChainOrder::Identity(std::size_t n) {
  ChainOrder o;
  o.order.resize(n);
  std::iota(o.order.begin(), o.order.end(), std::size_t{0});
  o.accumulated.assign(n, 0.0);
  return o;
}

ChainOrder ChainOrder::FromAccumulated(std::vector<double> accumulated) {
  const std::size_t n = accumulated.size();
  for (double a : accumulated)
    Require(std::isfinite(a), Errc::kNonFinite, "accumulated correlation is not finite");
  ChainOrder o;
  std::vector<bool> used(n, false);
  // Repeatedly take the largest remaining value; among values within
  // kChainTieTolerance of it, the lowest index wins.
  for (std::size_t r = 0; r < n; ++r) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j)
      if (!used[j]) best = std::max(best, accumulated[j]);
    std::size_t pick = n;
    for (std::size_t j = 0; j < n && pick == n; ++j)
      if (!used[j] && accumulated[j] >= best - kChainTieTolerance) pick = j;
    used[pick] = true;
    o.order.push_back(pick);
  }
  o.accumulated = std::move(accumulated);
  return o;
}

std::vector<std::size_t> ChainOrder::Reversed() const {
  return {order.rbegin(), order.rend()};
}

void ChainOrder::Validate(std::size_t n) const {
  Require(order.size() == n && accumulated.size() == n, Errc::kInvalidArgument,
          "chain order covers " + std::to_string(order.size()) + " labels, expected " +
              std::to_string(n));
  std::vector<bool> seen(n, false);
  for (std::size_t i : order) {
    Require(i < n && !seen[i], Errc::kInvalidArgument, "chain order is not a permutation");
    seen[i] = true;
  }
  Require(order == FromAccumulated(accumulated).order, Errc::kInvalidArgument,
          "chain order is not sorted by accumulated correlation");
}

ChainOrder DeriveChainOrder(const Matrix &labels, const std::vector<std::string> *names) {
  Require(labels.cols >= 1, Errc::kInvalidArgument, "chain order over zero labels");
  if (labels.cols == 1) return ChainOrder::Identity(1);
  const Matrix r = PearsonMatrix(labels, names);
  std::vector<double> acc(labels.cols, 0.0);
  for (std::size_t j = 0; j < labels.cols; ++j)
    for (std::size_t k = 0; k < labels.cols; ++k)
      if (k != j) acc[j] += std::abs(r(j, k));
  return ChainOrder::FromAccumulated(std::move(acc));
}

RegressionChain::RegressionChain(const std::string &name, std::size_t input_dim,
                                 std::size_t num_labels, std::size_t hidden, Rng &init)
    : input_dim_(input_dim), hidden_(hidden) {
  Require(input_dim >= 1 && num_labels >= 1, Errc::kInvalidArgument,
          "regression chain needs positive input and label counts");
  for (std::size_t i = 0; i < num_labels; ++i) {
    const std::string p = name + "." + std::to_string(i);
    first_.emplace_back(p + (hidden ? ".hidden" : ""), input_dim + i, hidden ? hidden : 1, init);
    if (hidden) second_.emplace_back(p + ".out", hidden, 1, init);
  }
}

Var RegressionChain::Forward(Tape &tape, Var z, std::span<const std::size_t> order,
                             const ChainInjection *injection) {
  const std::size_t n = num_labels();
  Require(z.cols() == input_dim_, Errc::kInvalidArgument,
          "chain input has " + std::to_string(z.cols()) + " features, expected " +
              std::to_string(input_dim_));
  Require(order.size() == n, Errc::kInvalidArgument, "chain order length mismatch");
  Require(injection == nullptr || injection->position < n, Errc::kOutOfRange,
          "chain injection position out of range");
  std::vector<Var> scores;  // chain order
  scores.reserve(n);
  Var input = z;
  for (std::size_t i = 0; i < n; ++i) {
    Var y;
    if (injection != nullptr && injection->position == i) {
      y = tape.Constant(Matrix(z.rows(), 1, injection->value));
    } else {
      Var h = first_[i].Forward(tape, input);
      if (hidden_) h = second_[i].Forward(tape, Relu(h));
      y = Sigmoid(h);
    }
    scores.push_back(y);
    if (i + 1 < n) {
      const Var parts[] = {input, y};
      input = ConcatCols(parts);
    }
  }
  std::vector<std::size_t> position(n);
  for (std::size_t i = 0; i < n; ++i) position[order[i]] = i;
  Var chain_major = Transpose(ConcatCols(scores));  // N x B
  return Transpose(SelectRows(chain_major, position));
}

void RegressionChain::AppendParameters(std::vector<Parameter *> &out) {
  for (std::size_t i = 0; i < first_.size(); ++i) {
    first_[i].AppendParameters(out);
    if (hidden_) second_[i].AppendParameters(out);
  }
}

void RegressionChain::ZeroParameters() {
  std::vector<Parameter *> ps;
  AppendParameters(ps);
  for (Parameter *p : ps) std::fill(p->value.data.begin(), p->value.data.end(), 0.0);
}

std::vector<double> ChainForward(std::span<const double> z, const ChainOrder &order,
                                 RegressionChain &chain, const ChainInjection *injection) {
  order.Validate(chain.num_labels());
  Tape tape;
  return chain.Forward(tape, tape.Constant(Matrix::RowVector(z)), order.order, injection)
      .value()
      .data;
}

Var BidirectionalChainOp(Tape &tape, Var z, const ChainOrder &order, RegressionChain &fwd,
                         RegressionChain &bwd) {
  const std::vector<std::size_t> reversed = order.Reversed();
  Var f = fwd.Forward(tape, z, order.order);
  Var b = bwd.Forward(tape, z, reversed);
  return Scale(Add(f, b), 0.5);
}

std::vector<double> BidirectionalChain(std::span<const double> z, const ChainOrder &order,
                                       RegressionChain &fwd, RegressionChain &bwd) {
  order.Validate(fwd.num_labels());
  Require(bwd.num_labels() == fwd.num_labels(), Errc::kInvalidArgument,
          "chain directions disagree on label count");
  Tape tape;
  return BidirectionalChainOp(tape, tape.Constant(Matrix::RowVector(z)), order, fwd, bwd)
      .value()
      .data;
}

Var HeadOutputs::ForTask(Task task) const {
  switch (task) {
    case Task::kTwo: return two;
    case Task::kHigh: return high;
    case Task::kCountry: return country;
    case Task::kCulture: return culture;
    case Task::kType: return type;
  }
  Fail(Errc::kInvalidArgument, "unknown task");
}

namespace {

constexpr std::size_t kHighInputExtra = kNumTwo;
constexpr std::size_t kCultureInputExtra = kNumTwo + kNumEmotions + kNumCountries;

}  // namespace

TaskGraph::TaskGraph(const ModelConfig &config, Rng &init) : config_(config) {
  config_.Validate();
  const std::size_t s = config.shared_dim;
  shared_ = Linear("heads.shared", config.projection_dim, s, init);
  two_specific_ = Linear("heads.two.specific", s, s, init);
  high_specific_ = Linear("heads.high.specific", s, s, init);
  country_specific_ = Linear("heads.country.specific", s, s, init);
  culture_specific_ = Linear("heads.culture.specific", s, s, init);
  type_specific_ = Linear("heads.type.specific", s, s, init);
  two_out_ = Linear("heads.two.out", s, kNumTwo, init);
  country_out_ = Linear("heads.country.out", s + kNumTwo, kNumCountries, init);
  type_out_ = Linear("heads.type.out", s + kNumTwo, kNumVbTypes, init);
  if (config.use_chains) {
    high_fwd_ = RegressionChain("heads.high.fwd", s + kHighInputExtra, kNumEmotions,
                                config.chain_hidden, init);
    high_bwd_ = RegressionChain("heads.high.bwd", s + kHighInputExtra, kNumEmotions,
                                config.chain_hidden, init);
    culture_fwd_ = RegressionChain("heads.culture.fwd", s + kCultureInputExtra, kNumCulture,
                                   config.chain_hidden, init);
    culture_bwd_ = RegressionChain("heads.culture.bwd", s + kCultureInputExtra, kNumCulture,
                                   config.chain_hidden, init);
  } else {
    high_flat_ = Linear("heads.high.out", s + kHighInputExtra, kNumEmotions, init);
    culture_flat_ = Linear("heads.culture.out", s + kCultureInputExtra, kNumCulture, init);
  }
  high_order_ = ChainOrder::Identity(kNumEmotions);
  culture_order_ = ChainOrder::Identity(kNumCulture);
}

void TaskGraph::set_orders(ChainOrder high, ChainOrder culture) {
  high.Validate(kNumEmotions);
  culture.Validate(kNumCulture);
  high_order_ = std::move(high);
  culture_order_ = std::move(culture);
}

Var TaskGraph::Specific(Tape &tape, Linear &layer, Var shared, bool train, Rng *rng) {
  return Dropout(Relu(layer.Forward(tape, shared)), config_.dropout_rate, train, rng);
}

Var TaskGraph::Regress(Tape &tape, Task task, Var input) {
  if (task == Task::kHigh) {
    if (!config_.use_chains) return Sigmoid(high_flat_.Forward(tape, input));
    return BidirectionalChainOp(tape, input, high_order_, high_fwd_, high_bwd_);
  }
  if (!config_.use_chains) return Sigmoid(culture_flat_.Forward(tape, input));
  return BidirectionalChainOp(tape, input, culture_order_, culture_fwd_, culture_bwd_);
}

HeadOutputs TaskGraph::Forward(Tape &tape, Var z, bool train, Rng *dropout_rng,
                               const HeadHooks *hooks) {
  Require(z.cols() == config_.projection_dim, Errc::kInvalidArgument,
          "head input width " + std::to_string(z.cols()) + " does not match projection_dim " +
              std::to_string(config_.projection_dim));
  Var shared = Dropout(Relu(shared_.Forward(tape, z)), config_.dropout_rate, train, dropout_rng);
  HeadOutputs out;
  out.two = Sigmoid(two_out_.Forward(tape, Specific(tape, two_specific_, shared, train,
                                                    dropout_rng)));
  Var two_cond = out.two;
  if (hooks != nullptr && hooks->two_delta) {
    Matrix delta(1, kNumTwo);
    for (std::size_t i = 0; i < kNumTwo; ++i) delta.data[i] = (*hooks->two_delta)[i];
    two_cond = Add(two_cond, tape.Constant(std::move(delta)));
  }
  auto with_two = [&](Linear &specific) {
    const Var parts[] = {Specific(tape, specific, shared, train, dropout_rng), two_cond};
    return ConcatCols(parts);
  };
  out.country = SoftmaxRows(country_out_.Forward(tape, with_two(country_specific_)));
  out.type = SoftmaxRows(type_out_.Forward(tape, with_two(type_specific_)));
  out.high = Regress(tape, Task::kHigh, with_two(high_specific_));
  const Var culture_parts[] = {with_two(culture_specific_), out.high, out.country};
  out.culture = Regress(tape, Task::kCulture, ConcatCols(culture_parts));
  return out;
}

std::vector<Parameter *> TaskGraph::TaskParameters(Task task) {
  std::vector<Parameter *> out;
  switch (task) {
    case Task::kTwo:
      two_specific_.AppendParameters(out);
      two_out_.AppendParameters(out);
      break;
    case Task::kCountry:
      country_specific_.AppendParameters(out);
      country_out_.AppendParameters(out);
      break;
    case Task::kType:
      type_specific_.AppendParameters(out);
      type_out_.AppendParameters(out);
      break;
    case Task::kHigh:
      high_specific_.AppendParameters(out);
      if (config_.use_chains) {
        high_fwd_.AppendParameters(out);
        high_bwd_.AppendParameters(out);
      } else {
        high_flat_.AppendParameters(out);
      }
      break;
    case Task::kCulture:
      culture_specific_.AppendParameters(out);
      if (config_.use_chains) {
        culture_fwd_.AppendParameters(out);
        culture_bwd_.AppendParameters(out);
      } else {
        culture_flat_.AppendParameters(out);
      }
      break;
  }
  return out;
}

std::vector<Parameter *> TaskGraph::Parameters() {
  std::vector<Parameter *> out;
  shared_.AppendParameters(out);
  for (Task t : kAllTasks) {
    const std::vector<Parameter *> p = TaskParameters(t);
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

}  // namespace vbchain
