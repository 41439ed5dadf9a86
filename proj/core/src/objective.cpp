// core/src/objective.cpp

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

#include "vbchain/objective.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "vbchain/error.hpp"

namespace vbchain {

namespace {

struct Moments {
  double mx = 0, my = 0, vx = 0, vy = 0, cov = 0;
};

Moments ColumnMoments(const Matrix &X, const Matrix &Y, std::size_t col) {
  const double m = static_cast<double>(X.rows);
  Moments s;
  for (std::size_t i = 0; i < X.rows; ++i) {
    s.mx += X(i, col);
    s.my += Y(i, col);
  }
  s.mx /= m;
  s.my /= m;
  for (std::size_t i = 0; i < X.rows; ++i) {
    const double dx = X(i, col) - s.mx, dy = Y(i, col) - s.my;
    s.vx += dx * dx;
    s.vy += dy * dy;
    s.cov += dx * dy;
  }
  s.vx /= m;
  s.vy /= m;
  s.cov /= m;
  return s;
}

double CccFromMoments(const Moments &s, const Matrix &X, const Matrix &Y, std::size_t col) {
  const double den = s.vx + s.vy + (s.mx - s.my) * (s.mx - s.my);
  if (den < kCccDegenerateEps) {
    double maxdiff = 0.0;
    for (std::size_t i = 0; i < X.rows; ++i)
      maxdiff = std::max(maxdiff, std::abs(X(i, col) - Y(i, col)));
    return maxdiff < kCccDegenerateEps ? 1.0 : 0.0;
  }
  return 2.0 * s.cov / den;
}

void CheckPair(const Matrix &X, const Matrix &Y) {
  Require(X.SameShape(Y), Errc::kInvalidArgument, "prediction/target shape mismatch");
  Require(X.rows >= 2, Errc::kInvalidArgument, "CCC needs at least 2 samples");
  Require(X.cols >= 1, Errc::kInvalidArgument, "CCC needs at least one label");
  for (std::size_t i = 0; i < X.size(); ++i)
    Require(std::isfinite(X.data[i]) && std::isfinite(Y.data[i]), Errc::kNonFinite,
            "CCC input holds a non-finite value");
}

void CheckDistribution(std::span<const double> probs) {
  Require(!probs.empty(), Errc::kInvalidArgument, "empty probability vector");
  double s = 0.0;
  for (double p : probs) {
    Require(std::isfinite(p) && p >= 0.0, Errc::kInvalidArgument,
            "probabilities must be finite and nonnegative");
    s += p;
  }
  Require(std::abs(s - 1.0) <= 1e-6, Errc::kInvalidArgument, "probabilities do not sum to 1");
}

std::vector<std::string> LabelNames(Task task, const LabelSchema &schema) {
  switch (task) {
    case Task::kTwo: return {"arousal", "valence"};
    case Task::kHigh: return schema.emotions;
    case Task::kCulture: return schema.CultureLabels();
    case Task::kCountry: return schema.countries;
    case Task::kType: return schema.vb_types;
  }
  return {};
}

}  // namespace

double Ccc(std::span<const double> x, std::span<const double> y) {
  Require(x.size() == y.size(), Errc::kInvalidArgument, "CCC inputs differ in length");
  return MeanCccOf(Matrix::ColVector(x), Matrix::ColVector(y)).mean;
}

MeanCcc MeanCccOf(const Matrix &predictions, const Matrix &targets) {
  CheckPair(predictions, targets);
  MeanCcc out;
  out.per_label.resize(predictions.cols);
  double sum = 0.0;
  for (std::size_t c = 0; c < predictions.cols; ++c) {
    const Moments s = ColumnMoments(predictions, targets, c);
    out.per_label[c] = CccFromMoments(s, predictions, targets, c);
    sum += out.per_label[c];
  }
  out.mean = sum / static_cast<double>(predictions.cols);
  return out;
}

double CccLoss(const Matrix &predictions, const Matrix &targets) {
  return 1.0 - MeanCccOf(predictions, targets).mean;
}

Matrix CccLossGradient(const Matrix &X, const Matrix &Y) {
  CheckPair(X, Y);
  const double m = static_cast<double>(X.rows);
  const double n = static_cast<double>(X.cols);
  Matrix g(X.rows, X.cols);
  for (std::size_t c = 0; c < X.cols; ++c) {
    const Moments s = ColumnMoments(X, Y, c);
    const double gap = s.mx - s.my;
    const double den = s.vx + s.vy + gap * gap;
    if (den < kCccDegenerateEps) continue;
    for (std::size_t i = 0; i < X.rows; ++i) {
      const double dcov = (Y(i, c) - s.my) / m;
      const double dden = 2.0 * (X(i, c) - s.mx) / m + 2.0 * gap / m;
      const double dccc = 2.0 * dcov / den - 2.0 * s.cov * dden / (den * den);
      g(i, c) = -dccc / n;
    }
  }
  return g;
}

double CrossEntropy(std::span<const double> probs, std::size_t target) {
  CheckDistribution(probs);
  Require(target < probs.size(), Errc::kOutOfRange,
          "class index " + std::to_string(target) + " out of range");
  return -std::log(std::clamp(probs[target], kProbabilityFloor, 1.0));
}

double CombinedLoss(double target_loss, std::span<const double> aux_losses, double lambda) {
  Require(lambda >= 0.0 && lambda <= 1.0, Errc::kInvalidArgument, "lambda must lie in [0, 1]");
  double aux = 0.0;
  for (double a : aux_losses) aux += a;
  return lambda * target_loss + (1.0 - lambda) * aux;
}

Var CccLossOp(Var predictions, const Matrix &targets) {
  const Matrix &X = predictions.value();
  Matrix out(1, 1, CccLoss(X, targets));
  return predictions.tape()->Record(
      std::move(out), {predictions}, [predictions, targets](Tape &t, const Matrix &g) {
        const Matrix d = CccLossGradient(t.value(predictions), targets);
        Matrix &gp = t.grad(predictions);
        for (std::size_t i = 0; i < d.size(); ++i) gp.data[i] += g.data[0] * d.data[i];
      });
}

Var CrossEntropyOp(Var probs, std::span<const std::size_t> targets) {
  const Matrix &P = probs.value();
  Require(P.rows == targets.size() && P.rows > 0, Errc::kInvalidArgument,
          "cross entropy needs one target per row");
  double loss = 0.0;
  for (std::size_t r = 0; r < P.rows; ++r) loss += CrossEntropy(P.row(r), targets[r]);
  loss /= static_cast<double>(P.rows);
  std::vector<std::size_t> tg(targets.begin(), targets.end());
  return probs.tape()->Record(Matrix(1, 1, loss), {probs}, [probs, tg](Tape &t, const Matrix &g) {
    const Matrix &P = t.value(probs);
    Matrix &gp = t.grad(probs);
    const double scale = g.data[0] / static_cast<double>(P.rows);
    for (std::size_t r = 0; r < P.rows; ++r) {
      const double p = P(r, tg[r]);
      if (p > kProbabilityFloor) gp(r, tg[r]) += -scale / p;
    }
  });
}

Var CombinedLossOp(Var target_loss, std::span<const Var> aux_losses, double lambda) {
  Require(lambda >= 0.0 && lambda <= 1.0, Errc::kInvalidArgument, "lambda must lie in [0, 1]");
  Var total = Scale(target_loss, lambda);
  for (const Var &a : aux_losses) total = Add(total, Scale(a, 1.0 - lambda));
  return total;
}

std::optional<double> MetricsReport::Headline(Task task) const {
  if (IsRegressionTask(task)) {
    auto it = regression.find(task);
    if (it != regression.end()) return it->second.mean_ccc;
  } else {
    auto it = classification.find(task);
    if (it != classification.end()) return it->second.uar;
  }
  return std::nullopt;
}

std::string MetricsReport::ToJson() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto &[task, m] : regression) {
    nlohmann::ordered_json t;
    t["mean_ccc"] = m.mean_ccc;
    t["count"] = m.count;
    nlohmann::ordered_json labels = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < m.labels.size(); ++i) labels[m.labels[i]] = m.per_label[i];
    t["labels"] = labels;
    if (!m.per_country.empty()) t["per_country"] = m.per_country;
    j[std::string(TaskName(task))] = t;
  }
  for (const auto &[task, m] : classification) {
    nlohmann::ordered_json t;
    t["accuracy"] = m.accuracy;
    t["uar"] = m.uar;
    t["count"] = m.count;
    j[std::string(TaskName(task))] = t;
  }
  return j.dump(2);
}

std::string MetricsReport::ToCsv() const {
  std::ostringstream os;
  os.precision(17);
  os << "task,label,metric,value,count\n";
  for (const auto &[task, m] : regression) {
    os << TaskName(task) << ",mean,ccc," << m.mean_ccc << ',' << m.count << '\n';
    for (std::size_t i = 0; i < m.labels.size(); ++i)
      os << TaskName(task) << ',' << m.labels[i] << ",ccc," << m.per_label[i] << ',' << m.count
         << '\n';
    for (const auto &[country, v] : m.per_country)
      os << TaskName(task) << ',' << country << ",country_mean_ccc," << v << ',' << m.count
         << '\n';
  }
  for (const auto &[task, m] : classification) {
    os << TaskName(task) << ",all,accuracy," << m.accuracy << ',' << m.count << '\n';
    os << TaskName(task) << ",all,uar," << m.uar << ',' << m.count << '\n';
  }
  return os.str();
}

MetricsReport MetricsReport::FromJson(const std::string &text) {
  MetricsReport r;
  try {
    const auto j = nlohmann::ordered_json::parse(text);
    for (const auto &[name, v] : j.items()) {
      const auto task = ParseTask(name);
      Require(task.has_value(), Errc::kParse, "unknown task '" + name + "' in metrics report");
      if (IsRegressionTask(*task)) {
        RegressionMetrics m;
        m.mean_ccc = v.at("mean_ccc").get<double>();
        m.count = v.at("count").get<std::size_t>();
        for (const auto &[label, x] : v.at("labels").items()) {
          m.labels.push_back(label);
          m.per_label.push_back(x.get<double>());
        }
        if (v.contains("per_country"))
          m.per_country = v.at("per_country").get<std::map<std::string, double>>();
        r.regression[*task] = m;
      } else {
        r.classification[*task] = {v.at("accuracy").get<double>(), v.at("uar").get<double>(),
                                   v.at("count").get<std::size_t>()};
      }
    }
  } catch (const nlohmann::json::exception &ex) {
    Fail(Errc::kParse, std::string("malformed metrics report: ") + ex.what());
  }
  return r;
}

std::vector<std::size_t> LabelledRows(Task task, std::span<const TaskTargets> targets) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < targets.size(); ++i)
    if (targets[i].Has(task)) rows.push_back(i);
  return rows;
}

Matrix TargetMatrix(Task task, std::span<const TaskTargets> targets,
                    std::span<const std::size_t> rows) {
  Require(IsRegressionTask(task), Errc::kInvalidArgument, "TargetMatrix is for regression tasks");
  Matrix Y(rows.size(), TaskArity(task));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const TaskTargets &t = targets[rows[i]];
    for (std::size_t c = 0; c < Y.cols; ++c)
      Y(i, c) = task == Task::kTwo    ? (*t.two)[c]
                : task == Task::kHigh ? (*t.high)[c]
                                      : (*t.culture)[c];
  }
  return Y;
}

namespace {

Matrix PredictionMatrix(Task task, std::span<const TaskPredictions> predictions,
                        std::span<const std::size_t> rows) {
  Matrix X(rows.size(), TaskArity(task));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto &v = predictions[rows[i]].ForTask(task);
    std::copy(v.begin(), v.end(), X.row(i).begin());
  }
  return X;
}

std::size_t ClassTarget(Task task, const TaskTargets &t) {
  return task == Task::kCountry ? *t.country : *t.vb_type;
}

}  // namespace

MetricsReport Evaluate(std::span<const TaskPredictions> predictions,
                       std::span<const TaskTargets> targets, const LabelSchema &schema) {
  Require(predictions.size() == targets.size(), Errc::kInvalidArgument,
          "prediction and target counts differ");
  MetricsReport report;
  for (Task task : kAllTasks) {
    const auto rows = LabelledRows(task, targets);
    if (rows.empty()) continue;
    if (IsRegressionTask(task)) {
      Require(rows.size() >= 2, Errc::kInvalidArgument,
              "task '" + std::string(TaskName(task)) + "' has fewer than 2 labelled samples");
      const MeanCcc m = MeanCccOf(PredictionMatrix(task, predictions, rows),
                                  TargetMatrix(task, targets, rows));
      RegressionMetrics r;
      r.mean_ccc = m.mean;
      r.per_label = m.per_label;
      r.labels = LabelNames(task, schema);
      r.count = rows.size();
      if (task == Task::kCulture) {
        for (std::size_t c = 0; c < kNumCountries; ++c) {
          double s = 0.0;
          for (std::size_t e = 0; e < kNumEmotions; ++e) s += m.per_label[CultureIndex(c, e)];
          r.per_country[schema.countries[c]] = s / kNumEmotions;
        }
      }
      report.regression[task] = std::move(r);
    } else {
      const std::size_t k = TaskArity(task);
      std::vector<std::size_t> hits(k, 0), totals(k, 0);
      std::size_t correct = 0;
      for (std::size_t i : rows) {
        const auto &p = predictions[i].ForTask(task);
        const auto pred = static_cast<std::size_t>(
            std::distance(p.begin(), std::max_element(p.begin(), p.end())));
        const std::size_t truth = ClassTarget(task, targets[i]);
        ++totals[truth];
        if (pred == truth) {
          ++hits[truth];
          ++correct;
        }
      }
      ClassificationMetrics c;
      c.count = rows.size();
      c.accuracy = static_cast<double>(correct) / static_cast<double>(rows.size());
      double recall = 0.0;
      std::size_t present = 0;
      for (std::size_t j = 0; j < k; ++j) {
        if (totals[j] == 0) continue;
        recall += static_cast<double>(hits[j]) / static_cast<double>(totals[j]);
        ++present;
      }
      c.uar = recall / static_cast<double>(present);
      report.classification[task] = c;
    }
  }
  return report;
}

double LossForTask(Task task, std::span<const TaskPredictions> predictions,
                   std::span<const TaskTargets> targets) {
  Require(predictions.size() == targets.size(), Errc::kInvalidArgument,
          "prediction and target counts differ");
  const auto rows = LabelledRows(task, targets);
  Require(!rows.empty(), Errc::kInvalidArgument,
          "no labels present for task '" + std::string(TaskName(task)) + "'");
  if (IsRegressionTask(task))
    return CccLoss(PredictionMatrix(task, predictions, rows), TargetMatrix(task, targets, rows));
  double loss = 0.0;
  for (std::size_t i : rows)
    loss += CrossEntropy(predictions[i].ForTask(task), ClassTarget(task, targets[i]));
  return loss / static_cast<double>(rows.size());
}

}  // namespace vbchain
