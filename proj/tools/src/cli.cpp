// tools/src/cli.cpp

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

#include "vbchain/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "vbchain/analysis.hpp"
#include "vbchain/config.hpp"
#include "vbchain/error.hpp"
#include "vbchain/provider.hpp"
#include "vbchain/synth.hpp"
#include "vbchain/trainer.hpp"

namespace vbchain::cli {

namespace {

namespace fs = std::filesystem;

const std::vector<std::string> kTaskNames = {"two", "high", "culture", "type", "country"};

std::string Fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void WriteFile(const fs::path &path, const std::string &text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::trunc);
  Require(os.good(), Errc::kIo, "cannot write " + path.string());
  os << text;
}

ExperimentConfig ResolveConfig(const std::string &config_path, const fs::path &data) {
  if (!config_path.empty()) return LoadExperimentConfig(config_path);
  if (fs::exists(data / "experiment.json")) return LoadExperimentConfig(data / "experiment.json");
  return ExperimentConfig{};
}

std::unique_ptr<FeatureProvider> MakeProvider(const ExperimentConfig &config,
                                              const fs::path &data) {
  switch (config.data.features) {
    case FeatureSource::kPrecomputed:
      return std::make_unique<PrecomputedProvider>(data);
    case FeatureSource::kSynthetic: {
      const fs::path spec = data / "synth_spec.json";
      std::ifstream in(spec);
      Require(in.good(), Errc::kNotFound, "synthetic source needs " + spec.string());
      std::stringstream ss;
      ss << in.rdbuf();
      return std::make_unique<SyntheticProvider>(SynthSpecFromJson(ss.str()));
    }
    case FeatureSource::kExternal:
      return std::make_unique<ExternalAdapterProvider>(data / config.data.audio_dir,
                                                       config.data.adapter_cmd, data);
  }
  Fail(Errc::kInvalidArgument, "unknown feature source");
}

void PrintReport(const MetricsReport &report, std::ostream &out) {
  for (Task t : kAllTasks)
    if (auto h = report.Headline(t))
      out << TaskName(t) << (IsRegressionTask(t) ? " mean_ccc " : " uar ") << Fixed(*h) << "\n";
}

int SynthData(const fs::path &out_dir, std::size_t n, std::uint64_t seed, double noise,
              std::ostream &out) {
  SynthSpec spec;
  spec.n_samples = n;
  spec.seed = seed;
  spec.noise_std = noise;
  spec.Validate();
  const LabelSchema schema = LabelSchema::Default();
  const SynthDataset data = GenerateSynthetic(spec, schema);
  WriteSyntheticDataset(data, spec, schema, out_dir);
  ExperimentConfig config;
  config.model.num_layers = spec.num_layers;
  config.model.feature_dim = spec.feature_dim;
  config.train.seed = seed;
  WriteFile(out_dir / "experiment.json", ExperimentConfigToJson(config));
  out << "wrote " << n << " samples to " << out_dir.string() << "\n";
  return kExitOk;
}

struct TrainArgs {
  std::string config, data, out, task;
  bool no_augment = false;
  bool resume = false;
  std::size_t halt_after_epoch = 0;
};

int TrainCmd(const TrainArgs &a, std::ostream &out) {
  ExperimentConfig config = ResolveConfig(a.config, a.data);
  config.model.target_task = *ParseTask(a.task);
  config.Validate();
  const Manifest manifest = ReadManifest(fs::path(a.data) / "manifest.csv", config.schema);
  manifest.Validate(config.schema);
  const auto provider = MakeProvider(config, a.data);
  TrainOptions options;
  options.augment = !a.no_augment;
  options.hooks.halt_after_epoch = a.halt_after_epoch;
  const TrainResult r = a.resume ? Resume(a.out, manifest, *provider, config, options)
                                 : Train(manifest, *provider, config, a.out, options);
  for (const EpochRecord &e : r.record)
    out << "epoch " << e.epoch << " steps " << e.steps << " loss " << Fixed(e.train_loss)
        << " val " << Fixed(e.monitored) << (e.improved ? " *" : "") << "\n";
  out << "best epoch " << r.best_epoch << " (" << TaskName(config.model.target_task) << " "
      << Fixed(r.best_metric) << ")" << (r.early_stopped ? ", stopped early" : "")
      << (r.halted ? ", halted" : "") << "\n";
  PrintReport(r.val_report, out);
  return kExitOk;
}

int EvaluateCmd(const std::string &artifact, const std::string &data, const std::string &split,
                const std::string &config_path, const fs::path &out_path, std::ostream &out) {
  const ExperimentConfig config = ResolveConfig(config_path, data);
  const auto s = ParseSplit(split);
  Require(s.has_value(), Errc::kInvalidArgument, "unknown split '" + split + "'");
  Model model = LoadModel(artifact, &config.schema);
  const Manifest manifest = ReadManifest(fs::path(data) / "manifest.csv", config.schema);
  const auto provider = MakeProvider(config, data);
  const MetricsReport report = EvaluateSplit(model, manifest, *s, *provider);
  WriteFile(out_path, report.ToJson());
  fs::path csv = out_path;
  csv.replace_extension(".csv");
  if (csv == out_path) csv += ".csv";
  WriteFile(csv, report.ToCsv());
  PrintReport(report, out);
  return kExitOk;
}

int AnalyzeCmd(const std::string &what, const std::string &data, const std::string &config_path,
               const fs::path &out_dir, std::ostream &out) {
  const ExperimentConfig config = ResolveConfig(config_path, data);
  const LabelSchema &schema = config.schema;
  const Manifest manifest = ReadManifest(fs::path(data) / "manifest.csv", schema);
  const fs::path dir = out_dir / "analysis";
  if (what == "corr") {
    for (Task t : {Task::kHigh, Task::kCulture}) {
      const Matrix labels = SplitLabelMatrix(manifest, schema, t, Split::kTrain);
      if (labels.rows == 0) {
        out << "no " << TaskName(t) << " labels in the train split; skipped\n";
        continue;
      }
      const std::vector<std::string> names =
          t == Task::kHigh ? schema.emotions : schema.CultureLabels();
      const fs::path file = dir / ("correlation_" + std::string(TaskName(t)) + ".csv");
      WriteFile(file, CorrelationCsv(CorrelationMatrix(labels, &names), names));
      out << "wrote " << file.string() << "\n";
    }
  } else if (what == "av-scatter") {
    const AvScatterSummary s = SummarizeAvScatter(manifest, schema);
    WriteFile(dir / "av_centroids.csv", s.CentroidCsv());
    WriteFile(dir / "av_grid.csv", s.GridCsv());
    for (const auto &note : s.notes) out << "note: " << note << "\n";
    out << "wrote " << (dir / "av_centroids.csv").string() << "\n";
  } else if (what == "countries") {
    const CountryDistribution d = CountCountries(manifest, schema);
    WriteFile(dir / "country_counts.csv", d.ToCsv());
    out << d.ToCsv();
  } else {
    const ChainOrderReport r = MakeChainOrderReport(manifest, schema, Task::kHigh);
    WriteFile(dir / "chain_order.csv", r.ToCsv());
    out << r.ToText();
  }
  return kExitOk;
}

int ToyEncoder(const fs::path &out_dir, std::size_t layers, std::size_t dim, std::ostream &out) {
  fs::create_directories(out_dir);
  std::string line;
  std::size_t n = 0;
  while (std::getline(std::cin, line)) {
    if (line.empty()) continue;
    const fs::path wav(line);
    const Waveform w = ReadWav(wav);
    const std::string id = wav.stem().string();
    WriteFeatureStack(ToyEncode(id, w.samples, layers, dim), out_dir / (id + ".vbfs"));
    ++n;
  }
  out << "encoded " << n << " files\n";
  return kExitOk;
}

}  // namespace

int Run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Hierarchical multi-task vocal-burst emotion recognition", "vbchain"};
  app.require_subcommand(1);

  auto *synth = app.add_subcommand("synth-data", "Write a synthetic labelled dataset");
  std::string synth_out;
  std::size_t synth_n = 512;
  std::uint64_t synth_seed = 0;
  double synth_noise = 0.02;
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--n", synth_n, "Number of samples")->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_seed, "Generator seed");
  synth->add_option("--noise", synth_noise, "Label and feature noise std")
      ->check(CLI::NonNegativeNumber);

  auto *train = app.add_subcommand("train", "Train a model and write a run directory");
  TrainArgs ta;
  train->add_option("--config", ta.config, "Experiment config JSON (default <data>/experiment.json)");
  train->add_option("--data", ta.data, "Dataset directory")->required();
  train->add_option("--out", ta.out, "Run directory")->required();
  train->add_option("--task", ta.task, "Target task")
      ->required()
      ->check(CLI::IsMember(kTaskNames));
  train->add_flag("--no-augment", ta.no_augment, "Disable waveform augmentation");
  train->add_flag("--resume", ta.resume, "Continue the run checkpointed in --out");
  train->add_option("--halt-after-epoch", ta.halt_after_epoch,
                    "Stop after checkpointing this epoch");

  auto *eval = app.add_subcommand("evaluate", "Evaluate a model artifact on one split");
  std::string ev_artifact, ev_data, ev_split = "val", ev_out, ev_config;
  eval->add_option("--artifact", ev_artifact, "Model artifact")->required();
  eval->add_option("--data", ev_data, "Dataset directory")->required();
  eval->add_option("--split", ev_split, "train, val or test");
  eval->add_option("--out", ev_out, "Report path (JSON; a .csv is written alongside)")
      ->required();
  eval->add_option("--config", ev_config, "Experiment config JSON");

  auto *analyze = app.add_subcommand("analyze", "Dataset diagnostics");
  std::string an_what, an_data, an_out, an_config;
  analyze->add_option("what", an_what, "corr | av-scatter | countries | chain-order")
      ->required()
      ->check(CLI::IsMember({"corr", "av-scatter", "countries", "chain-order"}));
  analyze->add_option("--data", an_data, "Dataset directory")->required();
  analyze->add_option("--out", an_out, "Output directory (files go to <out>/analysis/)")
      ->required();
  analyze->add_option("--config", an_config, "Experiment config JSON");

  auto *prep = app.add_subcommand("prepare-features", "Extract features from audio");
  std::string pf_provider, pf_cmd, pf_data, pf_audio, pf_out;
  prep->add_option("--provider", pf_provider, "Feature provider")
      ->required()
      ->check(CLI::IsMember({"external"}));
  prep->add_option("--adapter-cmd", pf_cmd, "Adapter program")->required();
  prep->add_option("--data", pf_data, "Dataset directory holding manifest.csv")->required();
  prep->add_option("--audio", pf_audio, "Directory of <file_id>.wav (default <data>/audio)");
  prep->add_option("--out", pf_out, "Feature output directory (default <data>)");

  auto *toy = app.add_subcommand("toy-encoder", "Reference adapter for prepare-features");
  toy->group("");
  std::string toy_out;
  std::size_t toy_layers = 5, toy_dim = 32;
  toy->add_option("out_dir", toy_out)->required();
  toy->add_option("--layers", toy_layers)->check(CLI::PositiveNumber);
  toy->add_option("--dim", toy_dim)->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (synth->parsed()) return SynthData(synth_out, synth_n, synth_seed, synth_noise, out);
    if (train->parsed()) return TrainCmd(ta, out);
    if (eval->parsed()) return EvaluateCmd(ev_artifact, ev_data, ev_split, ev_config, ev_out, out);
    if (analyze->parsed()) return AnalyzeCmd(an_what, an_data, an_config, an_out, out);
    if (prep->parsed()) {
      const fs::path data(pf_data);
      const ExperimentConfig config = ResolveConfig("", data);
      const Manifest manifest = ReadManifest(data / "manifest.csv", config.schema);
      const auto entries = PrepareExternalFeatures(
          manifest, pf_audio.empty() ? data / "audio" : fs::path(pf_audio), pf_cmd,
          pf_out.empty() ? data : fs::path(pf_out));
      out << "prepared " << entries.size() << " feature stacks\n";
      return kExitOk;
    }
    if (toy->parsed()) return ToyEncoder(toy_out, toy_layers, toy_dim, out);
  } catch (const Error &e) {
    err << "error [" << ErrcName(e.code()) << "]: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace vbchain::cli
