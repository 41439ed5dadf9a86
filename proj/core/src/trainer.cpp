// core/src/trainer.cpp

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

#include "vbchain/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <thread>

#include "json.hpp"
#include "vbchain/error.hpp"
#include "vbchain/optimizer.hpp"

namespace vbchain {

namespace {

using nlohmann::json;
using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr std::uint64_t kShuffleTag = 1;
constexpr std::uint64_t kDropoutTag = 2;
constexpr std::uint64_t kAugmentTag = 3;
constexpr std::size_t kAttentionDumpSamples = 4;

void WriteText(const fs::path &path, const std::string &text, bool append = false) {
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  Require(out.good(), Errc::kIo, "cannot write " + path.string());
  out << text;
}

/// Loads stacks in parallel. `load(i)` must be safe to call concurrently.
std::vector<FeatureStack> LoadAll(std::size_t n,
                                  const std::function<FeatureStack(std::size_t)> &load) {
  std::vector<FeatureStack> out(n);
  const std::size_t workers = std::min(NumWorkers(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = load(i);
    return out;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) out[i] = load(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto &t : pool) t.join();
  for (auto &e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::vector<const FeatureStack *> Pointers(const std::vector<FeatureStack> &stacks) {
  std::vector<const FeatureStack *> out;
  for (const auto &s : stacks) out.push_back(&s);
  return out;
}

ojson StateMeta(const TrainState &s) {
  ojson j;
  j["epoch"] = s.epoch;
  j["steps"] = s.steps;
  j["best_metric"] = s.best_metric;
  j["best_epoch"] = s.best_epoch;
  j["since_improvement"] = s.since_improvement;
  j["config_hash"] = s.config_hash;
  ojson rec = ojson::array();
  for (const auto &r : s.record) rec.push_back(ojson::parse(r.ToJson()));
  j["record"] = std::move(rec);
  return j;
}

std::vector<std::size_t> Permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng.Index(i)]);
  return p;
}

Var TaskLoss(Task task, Var output, std::span<const std::size_t> rows,
             std::span<const TaskTargets> targets) {
  Var picked = SelectRows(output, rows);
  if (IsRegressionTask(task)) return CccLossOp(picked, TargetMatrix(task, targets, rows));
  std::vector<std::size_t> cls;
  for (std::size_t r : rows)
    cls.push_back(task == Task::kCountry ? *targets[r].country : *targets[r].vb_type);
  return CrossEntropyOp(picked, cls);
}

class Session {
 public:
  Session(const Manifest &manifest, const FeatureProvider &provider,
          const ExperimentConfig &config, fs::path run_dir, const TrainOptions &options)
      : manifest_(manifest),
        provider_(provider),
        config_(config),
        run_dir_(std::move(run_dir)),
        options_(options),
        hash_(ConfigHash(config)),
        model_(config.schema, config.model, config.train.seed),
        best_(model_) {
    config_.Validate();
    const Task target = config.model.target_task;
    for (const Sample *s : manifest.InSplit(Split::kTrain)) {
      TaskTargets t = ToTargets(*s, config.schema);
      if (!t.Has(target)) continue;
      train_.push_back(s);
      train_targets_.push_back(std::move(t));
    }
    Require(!manifest.InSplit(Split::kTrain).empty(), Errc::kInvalidArgument,
            "manifest has no train split");
    Require(!manifest.InSplit(Split::kVal).empty(), Errc::kInvalidArgument,
            "manifest has no val split");
    Require(train_.size() >= 2, Errc::kInvalidArgument,
            "missing labels for task '" + std::string(TaskName(target)) +
                "' in the train split (columns " + TaskColumns(target) + ")");
    val_ = manifest.InSplit(Split::kVal);
    std::size_t val_labelled = 0;
    for (const Sample *s : val_) {
      val_targets_.push_back(ToTargets(*s, config.schema));
      val_labelled += val_targets_.back().Has(target);
    }
    Require(val_labelled >= 2, Errc::kInvalidArgument,
            "missing labels for task '" + std::string(TaskName(target)) +
                "' in the val split (columns " + TaskColumns(target) + ")");
    augment_ = options.augment && config.data.augment.has_value() &&
               provider.SupportsAugmentation();
    if (!augment_)
      train_stacks_ = LoadAll(train_.size(), [&](std::size_t i) {
        return provider_.Load(train_[i]->file_id);
      });
    val_stacks_ = LoadAll(val_.size(), [&](std::size_t i) { return provider_.Load(val_[i]->file_id); });
    // Provider parameters (fine-tuning) form their own group; the reference
    // providers are frozen so it stays empty.
    std::vector<ParamGroup> groups = {
        {{}, config.train.lr_encoder, config.train.weight_decay},
        {model_.Parameters(), config.train.lr_downstream, config.train.weight_decay}};
    optimizer_ = std::make_unique<AdamW>(std::move(groups));
  }

  void FreshStart() {
    model_.heads().set_orders(DeriveOrder(Task::kHigh), DeriveOrder(Task::kCulture));
    best_ = model_;
    state_.config_hash = hash_;
    state_.best_metric = -std::numeric_limits<double>::infinity();
    if (run_dir_.empty()) return;
    fs::create_directories(run_dir_ / "diagnostics");
    WriteText(run_dir_ / "config.json", ExperimentConfigToJson(config_));
    WriteText(run_dir_ / "record.jsonl", "");
    WriteText(run_dir_ / "diagnostics" / "layer_weights.csv", LayerWeightHeader());
  }

  void RestoreFrom(const fs::path &dir) {
    const TensorArchive a = ReadTensorArchive(dir / "state.bin", "VBTS");
    const json meta = json::parse(a.meta_json);
    TrainState s = ParseState(meta);
    Require(s.config_hash == hash_, Errc::kConfigMismatch,
            "config hash " + hash_ + " does not match the checkpoint's " + s.config_hash +
                "; refusing to resume");
    std::vector<std::pair<std::string, Matrix>> adam;
    for (const auto &[name, m] : a.tensors)
      if (name.rfind("adam/", 0) == 0) adam.emplace_back(name.substr(5), m);
    for (auto &[name, m] : model_.NamedTensors()) *m = a.Get("model/" + name);
    model_.heads().set_orders(OrderFromMeta(meta.at("high_order")),
                              OrderFromMeta(meta.at("culture_order")));
    optimizer_->RestoreState(s.steps, adam);
    best_ = LoadModel(dir / "artifact.bin", &config_.schema);
    state_ = std::move(s);
  }

  TrainResult Run() {
    const TrainConfig &tc = config_.train;
    bool early = false, halted = false;
    while (state_.epoch < tc.max_epochs && !StepBudgetSpent()) {
      const auto t0 = std::chrono::steady_clock::now();
      const std::size_t epoch = ++state_.epoch;
      const double loss = TrainEpoch(epoch);
      EpochRecord rec;
      rec.epoch = epoch;
      rec.steps = state_.steps;
      rec.train_loss = loss;
      std::vector<TaskPredictions> preds;
      const MetricsReport report = EvaluateCached(model_, &preds);
      for (Task t : kAllTasks)
        if (auto h = report.Headline(t)) rec.val_metric[t] = *h;
      double metric = report.Headline(config_.model.target_task).value();
      if (options_.hooks.override_metric) metric = options_.hooks.override_metric(epoch, metric);
      rec.monitored = metric;
      rec.improved = metric > state_.best_metric + tc.min_improvement;
      if (rec.improved) {
        state_.best_metric = metric;
        state_.best_epoch = epoch;
        state_.since_improvement = 0;
        best_ = model_;
        if (!run_dir_.empty()) SaveModel(best_, run_dir_ / "artifact.bin");
      } else {
        ++state_.since_improvement;
      }
      rec.config_hash = hash_;
      rec.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      state_.record.push_back(rec);
      if (!run_dir_.empty()) {
        WriteText(run_dir_ / "record.jsonl", rec.ToJson() + "\n", true);
        WriteDiagnostics(epoch);
        SaveState();
      }
      if (state_.since_improvement >= tc.patience) {
        early = true;
        break;
      }
      if (options_.hooks.halt_after_epoch != 0 && epoch >= options_.hooks.halt_after_epoch) {
        halted = true;
        break;
      }
    }
    TrainResult out{best_, state_.record, state_.best_epoch, state_.best_metric, state_.steps,
                    early, halted, {}};
    out.val_report = EvaluateCached(out.model, nullptr);
    if (!run_dir_.empty() && !halted) {
      WriteText(run_dir_ / "report.json", out.val_report.ToJson());
      WriteText(run_dir_ / "report.csv", out.val_report.ToCsv());
    }
    return out;
  }

 private:
  bool StepBudgetSpent() const {
    return config_.train.max_steps != 0 && state_.steps >= config_.train.max_steps;
  }

  ChainOrder DeriveOrder(Task task) {
    const std::size_t n = TaskArity(task);
    const Matrix labels = SplitLabelMatrix(manifest_, config_.schema, task, Split::kTrain);
    if (labels.rows < 3) return ChainOrder::Identity(n);
    const std::vector<std::string> names =
        task == Task::kHigh ? config_.schema.emotions : config_.schema.CultureLabels();
    return DeriveChainOrder(labels, &names);
  }

  double TrainEpoch(std::size_t epoch) {
    double total = 0.0;
    std::size_t batches = 0;
    for (const auto &idx :
         EpochBatches(train_.size(), config_.train.batch_size, config_.train.seed, epoch)) {
      if (StepBudgetSpent()) break;
      total += Step(epoch, idx);
      ++batches;
    }
    return batches ? total / static_cast<double>(batches) : 0.0;
  }

  double Step(std::size_t epoch, const std::vector<std::size_t> &idx) {
    std::vector<FeatureStack> loaded;
    std::vector<const FeatureStack *> stacks;
    if (augment_) {
      loaded = LoadAll(idx.size(), [&](std::size_t k) {
        Rng rng(DeriveSeed(config_.train.seed, {kAugmentTag, epoch, idx[k]}));
        return provider_.LoadAugmented(train_[idx[k]]->file_id, *config_.data.augment, rng);
      });
      stacks = Pointers(loaded);
    } else {
      for (std::size_t i : idx) stacks.push_back(&train_stacks_[i]);
    }
    std::vector<TaskTargets> targets;
    for (std::size_t i : idx) targets.push_back(train_targets_[i]);

    const std::size_t step = state_.steps;
    Rng dropout(DeriveSeed(config_.train.seed, {kDropoutTag, step}));
    Tape tape;
    const ModelForward f = model_.Run(tape, stacks, true, &dropout);
    const Task target = config_.model.target_task;
    Var target_loss;
    std::vector<Var> aux;
    std::map<Task, double> parts;
    for (Task task : kAllTasks) {
      const std::vector<std::size_t> rows = LabelledRows(task, targets);
      if (task != target && rows.size() < (IsRegressionTask(task) ? 2u : 1u)) continue;
      const Matrix &out = f.heads.ForTask(task).value();
      if (!std::all_of(out.data.begin(), out.data.end(), [](double v) { return std::isfinite(v); })) {
        parts[task] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      Var l = TaskLoss(task, f.heads.ForTask(task), rows, targets);
      parts[task] = l.value().data[0];
      if (task == target)
        target_loss = l;
      else
        aux.push_back(l);
    }
    for (const auto &[task, v] : parts)
      if (!std::isfinite(v)) DumpNan(epoch, step, parts);
    Var loss = CombinedLossOp(target_loss, aux, config_.model.loss_lambda);
    const double value = loss.value().data[0];
    if (!std::isfinite(value)) DumpNan(epoch, step, parts);
    optimizer_->ZeroGrad();
    tape.Backward(loss);
    optimizer_->Step();
    ++state_.steps;
    return value;
  }

  [[noreturn]] void DumpNan(std::size_t epoch, std::size_t step,
                            const std::map<Task, double> &parts) {
    std::string where;
    if (!run_dir_.empty()) {
      ojson j;
      j["epoch"] = epoch;
      j["step"] = step;
      for (const auto &[t, v] : parts) j["losses"][std::string(TaskName(t))] = std::to_string(v);
      ojson lw = ojson::array();
      for (double w : model_.encoder().layer_weights().logits) lw.push_back(std::to_string(w));
      j["layer_logits"] = std::move(lw);
      fs::create_directories(run_dir_ / "diagnostics");
      const fs::path p = run_dir_ / "diagnostics" / "nan_dump.json";
      WriteText(p, j.dump(2));
      where = "; diagnostics written to " + p.string();
    }
    Fail(Errc::kNumeric, "non-finite training loss at epoch " + std::to_string(epoch) +
                             ", step " + std::to_string(step) + where);
  }

  MetricsReport EvaluateCached(Model &model, std::vector<TaskPredictions> *out) {
    std::vector<TaskPredictions> preds;
    const std::size_t bs = 64;
    const std::vector<const FeatureStack *> all = Pointers(val_stacks_);
    for (std::size_t s = 0; s < all.size(); s += bs) {
      const std::size_t e = std::min(all.size(), s + bs);
      auto p = model.Predict(std::span(all).subspan(s, e - s));
      preds.insert(preds.end(), p.begin(), p.end());
    }
    MetricsReport r = Evaluate(preds, val_targets_, config_.schema);
    if (out != nullptr) *out = std::move(preds);
    return r;
  }

  std::string LayerWeightHeader() const {
    std::string h = "epoch";
    for (std::size_t l = 0; l < config_.model.num_layers; ++l) h += ",layer_" + std::to_string(l);
    return h + "\n";
  }

  void WriteDiagnostics(std::size_t epoch) {
    const fs::path dir = run_dir_ / "diagnostics";
    std::string row = std::to_string(epoch);
    for (double w : model_.encoder().layer_weights().Effective()) {
      char buf[32];
      std::snprintf(buf, sizeof buf, ",%.9g", w);
      row += buf;
    }
    WriteText(dir / "layer_weights.csv", row + "\n", true);
    const std::size_t n = std::min(kAttentionDumpSamples, val_stacks_.size());
    std::vector<const FeatureStack *> stacks;
    for (std::size_t i = 0; i < n; ++i) stacks.push_back(&val_stacks_[i]);
    const auto enc = model_.encoder().Encode(stacks, false, nullptr);
    std::string csv = "file_id,frame,weight\n";
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t t = 0; t < enc[i].attention.size(); ++t) {
        char buf[64];
        std::snprintf(buf, sizeof buf, ",%zu,%.9g\n", t, enc[i].attention[t]);
        csv += stacks[i]->file_id + buf;
      }
    WriteText(dir / ("attention_epoch_" + std::to_string(epoch) + ".csv"), csv);
  }

  void SaveState() {
    TensorArchive a;
    ojson meta = StateMeta(state_);
    meta["high_order"] = {{"order", model_.heads().high_order().order},
                          {"accumulated", model_.heads().high_order().accumulated}};
    meta["culture_order"] = {{"order", model_.heads().culture_order().order},
                             {"accumulated", model_.heads().culture_order().accumulated}};
    a.meta_json = meta.dump();
    for (auto &[name, m] : model_.NamedTensors()) a.tensors.emplace_back("model/" + name, *m);
    for (auto &[name, m] : optimizer_->StateTensors()) a.tensors.emplace_back("adam/" + name, m);
    const fs::path tmp = run_dir_ / "state.bin.tmp";
    WriteTensorArchive(tmp, "VBTS", a);
    fs::rename(tmp, run_dir_ / "state.bin");
  }

 public:
  static TrainState ParseState(const json &meta) {
    TrainState s;
    try {
      s.epoch = meta.at("epoch").get<std::size_t>();
      s.steps = meta.at("steps").get<std::size_t>();
      s.best_metric = meta.at("best_metric").get<double>();
      s.best_epoch = meta.at("best_epoch").get<std::size_t>();
      s.since_improvement = meta.at("since_improvement").get<std::size_t>();
      s.config_hash = meta.at("config_hash").get<std::string>();
      for (const json &r : meta.at("record")) s.record.push_back(EpochRecord::FromJson(r.dump()));
    } catch (const json::exception &e) {
      Fail(Errc::kParse, std::string("malformed training state: ") + e.what());
    }
    return s;
  }

  static ChainOrder OrderFromMeta(const json &j) {
    ChainOrder o;
    o.order = j.at("order").get<std::vector<std::size_t>>();
    o.accumulated = j.at("accumulated").get<std::vector<double>>();
    return o;
  }

 private:
  const Manifest &manifest_;
  const FeatureProvider &provider_;
  ExperimentConfig config_;
  fs::path run_dir_;
  TrainOptions options_;
  std::string hash_;
  Model model_;
  Model best_;
  std::unique_ptr<AdamW> optimizer_;
  TrainState state_;
  bool augment_ = false;
  std::vector<const Sample *> train_;
  std::vector<TaskTargets> train_targets_;
  std::vector<FeatureStack> train_stacks_;
  std::vector<const Sample *> val_;
  std::vector<TaskTargets> val_targets_;
  std::vector<FeatureStack> val_stacks_;
};

}  // namespace

std::string EpochRecord::ToJson() const {
  ojson j;
  j["epoch"] = epoch;
  j["steps"] = steps;
  j["train_loss"] = train_loss;
  ojson v = ojson::object();
  for (const auto &[t, m] : val_metric) v[std::string(TaskName(t))] = m;
  j["val_metric"] = std::move(v);
  j["monitored"] = monitored;
  j["improved"] = improved;
  j["wall_seconds"] = wall_seconds;
  j["config_hash"] = config_hash;
  return j.dump();
}

EpochRecord EpochRecord::FromJson(const std::string &line) {
  EpochRecord r;
  try {
    const json j = json::parse(line);
    r.epoch = j.at("epoch").get<std::size_t>();
    r.steps = j.at("steps").get<std::size_t>();
    r.train_loss = j.at("train_loss").get<double>();
    for (const auto &[k, v] : j.at("val_metric").items()) {
      const auto t = ParseTask(k);
      Require(t.has_value(), Errc::kParse, "unknown task '" + k + "' in run record");
      r.val_metric[*t] = v.get<double>();
    }
    r.monitored = j.at("monitored").get<double>();
    r.improved = j.at("improved").get<bool>();
    r.wall_seconds = j.at("wall_seconds").get<double>();
    r.config_hash = j.at("config_hash").get<std::string>();
  } catch (const json::exception &e) {
    Fail(Errc::kParse, std::string("malformed run record line: ") + e.what());
  }
  return r;
}

std::vector<std::vector<std::size_t>> EpochBatches(std::size_t n, std::size_t batch_size,
                                                   std::uint64_t seed, std::size_t epoch) {
  Require(batch_size >= 1, Errc::kInvalidArgument, "batch size must be positive");
  const std::vector<std::size_t> order = Permutation(n, DeriveSeed(seed, {kShuffleTag, epoch}));
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    // Batch normalization needs two samples; a trailing singleton is dropped.
    if (end - start < 2) break;
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                     order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

std::size_t NumWorkers() {
  if (const char *env = std::getenv("VBCHAIN_NUM_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string TaskColumns(Task task) {
  switch (task) {
    case Task::kTwo: return "arousal, valence";
    case Task::kHigh: return "high_0..high_9";
    case Task::kCountry: return "country";
    case Task::kCulture: return "culture_0..culture_39";
    case Task::kType: return "vb_type";
  }
  return "";
}

Matrix SplitLabelMatrix(const Manifest &manifest, const LabelSchema &schema, Task task,
                        Split split) {
  Require(IsRegressionTask(task), Errc::kInvalidArgument, "label matrix needs a regression task");
  std::vector<TaskTargets> targets;
  for (const Sample *s : manifest.InSplit(split)) targets.push_back(ToTargets(*s, schema));
  const std::vector<std::size_t> rows = LabelledRows(task, targets);
  if (rows.empty()) return Matrix(0, TaskArity(task));
  return TargetMatrix(task, targets, rows);
}

TrainResult Train(const Manifest &manifest, const FeatureProvider &provider,
                  const ExperimentConfig &config, const fs::path &run_dir,
                  const TrainOptions &options) {
  Session s(manifest, provider, config, run_dir, options);
  s.FreshStart();
  return s.Run();
}

TrainState LoadTrainState(const fs::path &run_dir) {
  Require(fs::exists(run_dir / "state.bin"), Errc::kNotFound,
          "no training checkpoint at " + (run_dir / "state.bin").string());
  const TensorArchive a = ReadTensorArchive(run_dir / "state.bin", "VBTS");
  return Session::ParseState(json::parse(a.meta_json));
}

TrainResult Resume(const fs::path &run_dir, const Manifest &manifest,
                   const FeatureProvider &provider, const ExperimentConfig &config,
                   const TrainOptions &options) {
  Require(fs::exists(run_dir / "state.bin"), Errc::kNotFound,
          "no training checkpoint at " + (run_dir / "state.bin").string());
  Session s(manifest, provider, config, run_dir, options);
  s.RestoreFrom(run_dir);
  return s.Run();
}

std::vector<TaskPredictions> PredictSamples(Model &model, std::span<const Sample *const> samples,
                                            const FeatureProvider &provider,
                                            std::size_t batch_size) {
  Require(batch_size >= 1, Errc::kInvalidArgument, "batch size must be positive");
  std::vector<TaskPredictions> out;
  for (std::size_t s = 0; s < samples.size(); s += batch_size) {
    const std::size_t e = std::min(samples.size(), s + batch_size);
    const std::vector<FeatureStack> stacks =
        LoadAll(e - s, [&](std::size_t k) { return provider.Load(samples[s + k]->file_id); });
    const auto p = model.Predict(Pointers(stacks));
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

MetricsReport EvaluateSplit(Model &model, const Manifest &manifest, Split split,
                            const FeatureProvider &provider,
                            std::vector<TaskPredictions> *predictions) {
  const std::vector<const Sample *> rows = manifest.InSplit(split);
  Require(!rows.empty(), Errc::kNotFound,
          "split '" + std::string(SplitName(split)) + "' has no samples");
  std::vector<TaskTargets> targets;
  for (const Sample *s : rows) targets.push_back(ToTargets(*s, model.schema()));
  std::vector<TaskPredictions> preds = PredictSamples(model, rows, provider);
  MetricsReport r = Evaluate(preds, targets, model.schema());
  if (predictions != nullptr) *predictions = std::move(preds);
  return r;
}

}  // namespace vbchain
