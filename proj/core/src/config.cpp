// core/src/config.cpp

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

#include "vbchain/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "vbchain/error.hpp"

namespace vbchain {

namespace {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

void RejectUnknown(const json &obj, std::initializer_list<const char *> allowed,
                   const std::string &where) {
  Require(obj.is_object(), Errc::kParse, "config section '" + where + "' must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto &[key, value] : obj.items())
    Require(ok.count(key) > 0, Errc::kParse,
            "unknown config key '" + (where.empty() ? key : where + "." + key) + "'");
}

template <typename T>
void Read(const json &obj, const char *key, T &out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

void ReadRange(const json &obj, const char *key, ValueRange &out) {
  if (!obj.contains(key)) return;
  const auto &v = obj.at(key);
  Require(v.is_array() && v.size() == 2, Errc::kParse,
          std::string("config key '") + key + "' must be a [lo, hi] pair");
  out = {v[0].get<double>(), v[1].get<double>()};
}

LabelSchema SchemaFromJsonObject(const json &j) {
  RejectUnknown(j, {"emotions", "countries", "vb_types", "two_range", "high_range"}, "schema");
  LabelSchema s = LabelSchema::Default();
  Read(j, "emotions", s.emotions);
  Read(j, "countries", s.countries);
  Read(j, "vb_types", s.vb_types);
  ReadRange(j, "two_range", s.two_range);
  ReadRange(j, "high_range", s.high_range);
  return s;
}

ojson SchemaToJsonObject(const LabelSchema &s) {
  ojson j;
  j["emotions"] = s.emotions;
  j["countries"] = s.countries;
  j["vb_types"] = s.vb_types;
  j["two_range"] = {s.two_range.lo, s.two_range.hi};
  j["high_range"] = {s.high_range.lo, s.high_range.hi};
  return j;
}

ModelConfig ModelFromJsonObject(const json &j) {
  RejectUnknown(j,
                {"num_layers", "feature_dim", "attention_dim", "projection_dim", "shared_dim",
                 "dropout_rate", "chain_hidden", "use_chains", "target_task", "loss_lambda"},
                "model");
  ModelConfig m;
  Read(j, "num_layers", m.num_layers);
  Read(j, "feature_dim", m.feature_dim);
  Read(j, "attention_dim", m.attention_dim);
  Read(j, "projection_dim", m.projection_dim);
  Read(j, "shared_dim", m.shared_dim);
  Read(j, "dropout_rate", m.dropout_rate);
  Read(j, "chain_hidden", m.chain_hidden);
  Read(j, "use_chains", m.use_chains);
  Read(j, "loss_lambda", m.loss_lambda);
  if (j.contains("target_task")) {
    const auto name = j.at("target_task").get<std::string>();
    const auto task = ParseTask(name);
    Require(task.has_value(), Errc::kParse,
            "unknown target_task '" + name + "' (expected two, high, culture, type or country)");
    m.target_task = *task;
  }
  return m;
}

ojson ModelToJsonObject(const ModelConfig &m) {
  ojson j;
  j["num_layers"] = m.num_layers;
  j["feature_dim"] = m.feature_dim;
  j["attention_dim"] = m.attention_dim;
  j["projection_dim"] = m.projection_dim;
  j["shared_dim"] = m.shared_dim;
  j["dropout_rate"] = m.dropout_rate;
  j["chain_hidden"] = m.chain_hidden;
  j["use_chains"] = m.use_chains;
  j["target_task"] = std::string(TaskName(m.target_task));
  j["loss_lambda"] = m.loss_lambda;
  return j;
}

TrainConfig TrainFromJsonObject(const json &j) {
  RejectUnknown(j,
                {"lr_encoder", "lr_downstream", "weight_decay", "batch_size", "patience",
                 "max_epochs", "max_steps", "min_improvement", "seed"},
                "train");
  TrainConfig t;
  Read(j, "lr_encoder", t.lr_encoder);
  Read(j, "lr_downstream", t.lr_downstream);
  Read(j, "weight_decay", t.weight_decay);
  Read(j, "batch_size", t.batch_size);
  Read(j, "patience", t.patience);
  Read(j, "max_epochs", t.max_epochs);
  Read(j, "max_steps", t.max_steps);
  Read(j, "min_improvement", t.min_improvement);
  Read(j, "seed", t.seed);
  return t;
}

ojson TrainToJsonObject(const TrainConfig &t) {
  ojson j;
  j["lr_encoder"] = t.lr_encoder;
  j["lr_downstream"] = t.lr_downstream;
  j["weight_decay"] = t.weight_decay;
  j["batch_size"] = t.batch_size;
  j["patience"] = t.patience;
  j["max_epochs"] = t.max_epochs;
  j["max_steps"] = t.max_steps;
  j["min_improvement"] = t.min_improvement;
  j["seed"] = t.seed;
  return j;
}

const char *SourceName(FeatureSource s) {
  switch (s) {
    case FeatureSource::kPrecomputed: return "precomputed";
    case FeatureSource::kSynthetic: return "synthetic";
    case FeatureSource::kExternal: return "external";
  }
  return "?";
}

DataConfig DataFromJsonObject(const json &j) {
  RejectUnknown(j, {"features", "augment", "adapter_cmd", "audio_dir"}, "data");
  DataConfig d;
  if (j.contains("features")) {
    const auto name = j.at("features").get<std::string>();
    if (name == "precomputed") d.features = FeatureSource::kPrecomputed;
    else if (name == "synthetic") d.features = FeatureSource::kSynthetic;
    else if (name == "external") d.features = FeatureSource::kExternal;
    else Fail(Errc::kParse, "unknown data.features '" + name + "'");
  }
  Read(j, "adapter_cmd", d.adapter_cmd);
  Read(j, "audio_dir", d.audio_dir);
  if (j.contains("augment")) {
    const auto &a = j.at("augment");
    RejectUnknown(a, {"enabled", "pitch_range_cents", "speed_rate_range", "pitch_prob",
                      "speed_prob", "seed"},
                  "data.augment");
    bool enabled = true;
    Read(a, "enabled", enabled);
    AugmentPolicy p;
    ReadRange(a, "pitch_range_cents", p.pitch_range_cents);
    ReadRange(a, "speed_rate_range", p.speed_rate_range);
    Read(a, "pitch_prob", p.pitch_prob);
    Read(a, "speed_prob", p.speed_prob);
    Read(a, "seed", p.seed);
    d.augment = enabled ? std::optional<AugmentPolicy>(p) : std::nullopt;
  }
  return d;
}

ojson DataToJsonObject(const DataConfig &d) {
  ojson j;
  j["features"] = SourceName(d.features);
  if (!d.adapter_cmd.empty()) j["adapter_cmd"] = d.adapter_cmd;
  if (!d.audio_dir.empty()) j["audio_dir"] = d.audio_dir;
  ojson a;
  const AugmentPolicy p = d.augment.value_or(AugmentPolicy{});
  a["enabled"] = d.augment.has_value();
  a["pitch_range_cents"] = {p.pitch_range_cents.lo, p.pitch_range_cents.hi};
  a["speed_rate_range"] = {p.speed_rate_range.lo, p.speed_rate_range.hi};
  a["pitch_prob"] = p.pitch_prob;
  a["speed_prob"] = p.speed_prob;
  a["seed"] = p.seed;
  j["augment"] = a;
  return j;
}

json ParseJson(const std::string &text, const char *what) {
  try {
    return json::parse(text);
  } catch (const json::exception &ex) {
    Fail(Errc::kParse, std::string("malformed ") + what + ": " + ex.what());
  }
}

template <typename F>
auto Guard(F &&f) {
  try {
    return f();
  } catch (const json::exception &ex) {
    Fail(Errc::kParse, std::string("bad config value: ") + ex.what());
  }
}

}  // namespace

void ExperimentConfig::Validate() const {
  schema.Validate();
  model.Validate();
  train.Validate();
  if (data.augment) data.augment->Validate();
  if (data.features == FeatureSource::kExternal)
    Require(!data.adapter_cmd.empty(), Errc::kInvalidArgument,
            "data.features = external requires data.adapter_cmd");
}

ExperimentConfig ParseExperimentConfig(const std::string &json_text) {
  const json j = ParseJson(json_text, "experiment config");
  RejectUnknown(j, {"schema", "model", "train", "data"}, "");
  ExperimentConfig c = Guard([&] {
    ExperimentConfig out;
    if (j.contains("schema")) out.schema = SchemaFromJsonObject(j.at("schema"));
    if (j.contains("model")) out.model = ModelFromJsonObject(j.at("model"));
    if (j.contains("train")) out.train = TrainFromJsonObject(j.at("train"));
    if (j.contains("data")) out.data = DataFromJsonObject(j.at("data"));
    return out;
  });
  c.Validate();
  return c;
}

ExperimentConfig LoadExperimentConfig(const std::filesystem::path &path) {
  std::ifstream in(path);
  Require(in.good(), Errc::kNotFound, "config file not found: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseExperimentConfig(ss.str());
}

std::string ExperimentConfigToJson(const ExperimentConfig &config) {
  ojson j;
  j["schema"] = SchemaToJsonObject(config.schema);
  j["model"] = ModelToJsonObject(config.model);
  j["train"] = TrainToJsonObject(config.train);
  j["data"] = DataToJsonObject(config.data);
  return j.dump(2);
}

std::string ConfigHash(const ExperimentConfig &config) {
  json j;  // std::map-backed: keys sorted, so the dump is canonical
  j["schema"] = SchemaToJsonObject(config.schema);
  j["model"] = ModelToJsonObject(config.model);
  j["train"] = TrainToJsonObject(config.train);
  const std::string canon = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string SchemaToJson(const LabelSchema &schema) { return SchemaToJsonObject(schema).dump(); }

LabelSchema SchemaFromJson(const std::string &json_text) {
  const json j = ParseJson(json_text, "schema");
  LabelSchema s = Guard([&] { return SchemaFromJsonObject(j); });
  s.Validate();
  return s;
}

std::string ModelConfigToJson(const ModelConfig &config) {
  return ModelToJsonObject(config).dump();
}

ModelConfig ModelConfigFromJson(const std::string &json_text) {
  const json j = ParseJson(json_text, "model config");
  ModelConfig m = Guard([&] { return ModelFromJsonObject(j); });
  m.Validate();
  return m;
}

}  // namespace vbchain
