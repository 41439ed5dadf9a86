// core/include/vbchain/heads.hpp

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

#ifndef VBCHAIN_HEADS_HPP_
#define VBCHAIN_HEADS_HPP_

// Structured output layer: shared and task-specific layers, the conditioning
// graph between tasks, and bi-directional regression chains.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vbchain/autograd.hpp"
#include "vbchain/layers.hpp"
#include "vbchain/rng.hpp"
#include "vbchain/schema.hpp"

namespace vbchain {

/// Accumulated values closer than this count as tied; it absorbs rounding
/// differences between equally correlated labels.
inline constexpr double kChainTieTolerance = 1e-9;

struct ChainOrder {
  std::vector<std::size_t> order;
  std::vector<double> accumulated;

  static ChainOrder Identity(std::size_t n);
  /// Sorts labels by descending accumulated value, ascending index on ties.
  /// Values within kChainTieTolerance of each other count as tied.
  static ChainOrder FromAccumulated(std::vector<double> accumulated);
  std::vector<std::size_t> Reversed() const;
  /// Permutation of 0..n-1 with consistent accumulated values.
  void Validate(std::size_t n) const;
  bool operator==(const ChainOrder &) const = default;
};

/// accumulated[j] = sum_{k != j} |pearson(label_j, label_k)| over the rows of
/// an M x N label matrix; M >= 3 and no constant column.
ChainOrder DeriveChainOrder(const Matrix &labels,
                            const std::vector<std::string> *names = nullptr);

/// Replaces the score emitted at chain position `position` by `value`
/// (test hook for causality checks).
struct ChainInjection {
  std::size_t position = 0;
  double value = 0.0;
};

/// Position i predicts sigma(f_i(z ++ y_<i)), where y_<i are the scores
/// already emitted in chain order. f_i is affine, or affine-ReLU-affine with
/// `hidden` > 0 units.
class RegressionChain {
 public:
  RegressionChain() = default;
  RegressionChain(const std::string &name, std::size_t input_dim, std::size_t num_labels,
                  std::size_t hidden, Rng &init);

  /// z is B x input_dim; result is B x num_labels in label-index order.
  Var Forward(Tape &tape, Var z, std::span<const std::size_t> order,
              const ChainInjection *injection = nullptr);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t num_labels() const { return first_.size(); }
  std::size_t hidden() const { return hidden_; }
  /// Position i's first layer: (input_dim + i) x width.
  Linear &first(std::size_t position) { return first_[position]; }
  void AppendParameters(std::vector<Parameter *> &out);
  /// Zeros every weight and bias.
  void ZeroParameters();

 private:
  std::size_t input_dim_ = 0;
  std::size_t hidden_ = 0;
  std::vector<Linear> first_;
  std::vector<Linear> second_;  // hidden > 0 only
};

/// Value-level chain over a single feature vector.
std::vector<double> ChainForward(std::span<const double> z, const ChainOrder &order,
                                 RegressionChain &chain,
                                 const ChainInjection *injection = nullptr);
/// 0.5 * (forward chain in `order` + backward chain in reversed order).
std::vector<double> BidirectionalChain(std::span<const double> z, const ChainOrder &order,
                                       RegressionChain &fwd, RegressionChain &bwd);
Var BidirectionalChainOp(Tape &tape, Var z, const ChainOrder &order, RegressionChain &fwd,
                         RegressionChain &bwd);

struct HeadHooks {
  /// Added to the TWO output before it conditions the other tasks; the
  /// reported TWO stays untouched.
  std::optional<std::array<double, kNumTwo>> two_delta;
};

struct HeadOutputs {
  Var two;      // B x 2
  Var high;     // B x 10
  Var country;  // B x 4 probabilities
  Var culture;  // B x 40
  Var type;     // B x 8 probabilities
  Var ForTask(Task task) const;
};

class TaskGraph {
 public:
  TaskGraph(const ModelConfig &config, Rng &init);

  HeadOutputs Forward(Tape &tape, Var z, bool train, Rng *dropout_rng,
                      const HeadHooks *hooks = nullptr);

  const ChainOrder &high_order() const { return high_order_; }
  const ChainOrder &culture_order() const { return culture_order_; }
  void set_orders(ChainOrder high, ChainOrder culture);

  std::vector<Parameter *> Parameters();
  /// Parameters read only by `task`'s output branch.
  std::vector<Parameter *> TaskParameters(Task task);

 private:
  Var Specific(Tape &tape, Linear &layer, Var shared, bool train, Rng *rng);
  Var Regress(Tape &tape, Task task, Var input);

  ModelConfig config_;
  Linear shared_;
  Linear two_specific_, high_specific_, country_specific_, culture_specific_, type_specific_;
  Linear two_out_, country_out_, type_out_;
  // use_chains: bi-directional chains; otherwise one sigmoid layer per task.
  RegressionChain high_fwd_, high_bwd_, culture_fwd_, culture_bwd_;
  Linear high_flat_, culture_flat_;
  ChainOrder high_order_;
  ChainOrder culture_order_;
};

}  // namespace vbchain

#endif  // VBCHAIN_HEADS_HPP_
