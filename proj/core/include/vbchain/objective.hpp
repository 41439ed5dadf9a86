// core/include/vbchain/objective.hpp

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

#ifndef VBCHAIN_OBJECTIVE_HPP_
#define VBCHAIN_OBJECTIVE_HPP_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vbchain/autograd.hpp"
#include "vbchain/schema.hpp"

namespace vbchain {

inline constexpr double kCccDegenerateEps = 1e-12;
inline constexpr double kProbabilityFloor = 1e-7;

/// Concordance correlation coefficient with biased (1/M) moments:
///   2 cov(x, y) / (var(x) + var(y) + (mean(x) - mean(y))^2).
/// A denominator below 1e-12 yields 1 if x and y coincide, else 0.
double Ccc(std::span<const double> x, std::span<const double> y);

struct MeanCcc {
  double mean = 0.0;
  std::vector<double> per_label;
};

/// Column-wise CCC of predictions X against targets Y (M x N each), averaged
/// over the N labels.
MeanCcc MeanCccOf(const Matrix &predictions, const Matrix &targets);
/// 1 - MeanCccOf(...).mean
double CccLoss(const Matrix &predictions, const Matrix &targets);
/// d CccLoss / d predictions. Degenerate columns contribute zero gradient.
Matrix CccLossGradient(const Matrix &predictions, const Matrix &targets);

/// -log(probs[target]) with probabilities floored at 1e-7.
double CrossEntropy(std::span<const double> probs, std::size_t target);

/// lambda * target + (1 - lambda) * sum(aux)
double CombinedLoss(double target_loss, std::span<const double> aux_losses, double lambda);

// Differentiable counterparts used by the trainer.
Var CccLossOp(Var predictions, const Matrix &targets);
/// Mean cross entropy over rows of a probability matrix.
Var CrossEntropyOp(Var probs, std::span<const std::size_t> targets);
Var CombinedLossOp(Var target_loss, std::span<const Var> aux_losses, double lambda);

struct RegressionMetrics {
  double mean_ccc = 0.0;
  std::vector<std::string> labels;
  std::vector<double> per_label;
  std::map<std::string, double> per_country;  // CULTURE only
  std::size_t count = 0;
};

struct ClassificationMetrics {
  double accuracy = 0.0;
  double uar = 0.0;  // unweighted average recall over classes present
  std::size_t count = 0;
};

struct MetricsReport {
  std::map<Task, RegressionMetrics> regression;
  std::map<Task, ClassificationMetrics> classification;

  /// Mean CCC for regression tasks, UAR for classification tasks.
  std::optional<double> Headline(Task task) const;
  std::string ToJson() const;
  /// task,label,metric,value,count
  std::string ToCsv() const;
  static MetricsReport FromJson(const std::string &text);
};

/// Tasks without any labelled sample are omitted; a labelled task with fewer
/// than two samples is an error.
MetricsReport Evaluate(std::span<const TaskPredictions> predictions,
                       std::span<const TaskTargets> targets, const LabelSchema &schema);

/// CCC loss for TWO/HIGH/CULTURE, mean cross entropy for TYPE/COUNTRY, over
/// the samples that carry labels for `task`.
double LossForTask(Task task, std::span<const TaskPredictions> predictions,
                   std::span<const TaskTargets> targets);

/// Stacks the `task` columns of labelled samples; returns the used indices.
std::vector<std::size_t> LabelledRows(Task task, std::span<const TaskTargets> targets);
Matrix TargetMatrix(Task task, std::span<const TaskTargets> targets,
                    std::span<const std::size_t> rows);

}  // namespace vbchain

#endif  // VBCHAIN_OBJECTIVE_HPP_
