// tests/cli_test.cpp

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
#include <fstream>
#include <sstream>

#include "test_support.hpp"
#include "vbchain/cli.hpp"
#include "vbchain/config.hpp"
#include "vbchain/manifest.hpp"
#include "vbchain/objective.hpp"
#include "vbchain/provider.hpp"
#include "vbchain/waveform.hpp"

namespace vbchain {
namespace {

namespace fs = std::filesystem;
using testing::Slurp;
using testing::TempDir;

struct Outcome {
  int code;
  std::string out, err;
};

Outcome RunCli(const std::vector<std::string> &args) {
  std::ostringstream out, err;
  const int code = cli::Run(args, out, err);
  return {code, out.str(), err.str()};
}

// Small model and short schedule so command runs stay quick.
void WriteQuickConfig(const fs::path &data, std::size_t epochs = 2) {
  ExperimentConfig c = LoadExperimentConfig(data / "experiment.json");
  c.model.attention_dim = 8;
  c.model.projection_dim = 16;
  c.model.shared_dim = 8;
  c.train.batch_size = 16;
  c.train.max_epochs = epochs;
  std::ofstream(data / "experiment.json") << ExperimentConfigToJson(c);
}

TEST(SynthData, WritesDataset) {
  TempDir dir;
  const auto r = RunCli({"synth-data", "--out", dir.path().string(), "--n", "40", "--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char *f : {"manifest.csv", "index.jsonl", "synth_spec.json", "experiment.json"})
    EXPECT_TRUE(fs::exists(dir.path() / f)) << f;
  const Manifest m = ReadManifest(dir.path() / "manifest.csv", LabelSchema::Default());
  EXPECT_EQ(m.rows.size(), 40u);
  std::size_t stores = 0;
  for (const auto &e : fs::directory_iterator(dir.path() / "features")) stores += e.path().extension() == ".vbfs";
  EXPECT_EQ(stores, 40u);
}

TEST(SynthData, SameSeedIsByteIdentical) {
  TempDir a, b;
  ASSERT_EQ(RunCli({"synth-data", "--out", a.path().string(), "--n", "12", "--seed", "9"}).code, 0);
  ASSERT_EQ(RunCli({"synth-data", "--out", b.path().string(), "--n", "12", "--seed", "9"}).code, 0);
  for (const auto &e : fs::recursive_directory_iterator(a.path())) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), a.path());
    EXPECT_EQ(Slurp(e.path()), Slurp(b.path() / rel)) << rel;
  }
}

TEST(SynthData, RejectsZeroSamples) {
  TempDir dir;
  const auto r = RunCli({"synth-data", "--out", dir.path().string(), "--n", "0"});
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, UnknownSubcommandIsUsageError) {
  EXPECT_EQ(RunCli({"frobnicate"}).code, 2);
  EXPECT_EQ(RunCli({}).code, 2);
  EXPECT_EQ(RunCli({"--help"}).code, 0);
}

class TrainedRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    data_ = new TempDir;
    run_ = new TempDir;
    ASSERT_EQ(RunCli({"synth-data", "--out", data_->path().string(), "--n", "96", "--seed", "1"}).code, 0);
    WriteQuickConfig(data_->path());
    train_ = new Outcome(RunCli({"train", "--data", data_->path().string(), "--out",
                                 run_->path().string(), "--task", "two"}));
  }
  static void TearDownTestSuite() {
    delete train_;
    delete run_;
    delete data_;
  }
  static TempDir *data_, *run_;
  static Outcome *train_;
};
TempDir *TrainedRun::data_ = nullptr;
TempDir *TrainedRun::run_ = nullptr;
Outcome *TrainedRun::train_ = nullptr;

TEST_F(TrainedRun, TrainWritesRunDirectory) {
  ASSERT_EQ(train_->code, 0) << train_->err;
  for (const char *f : {"artifact.bin", "record.jsonl", "config.json", "report.json", "report.csv"})
    EXPECT_TRUE(fs::exists(run_->path() / f)) << f;
  EXPECT_NE(train_->out.find("best epoch"), std::string::npos);
  EXPECT_NE(train_->out.find("two mean_ccc"), std::string::npos);
}

TEST_F(TrainedRun, EvaluateMatchesTrainerReport) {
  ASSERT_EQ(train_->code, 0);
  const fs::path out = run_->path() / "eval" / "val.json";
  const auto r = RunCli({"evaluate", "--artifact", (run_->path() / "artifact.bin").string(),
                         "--data", data_->path().string(), "--split", "val", "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(run_->path() / "eval" / "val.csv"));
  const MetricsReport a = MetricsReport::FromJson(Slurp(run_->path() / "report.json"));
  const MetricsReport b = MetricsReport::FromJson(Slurp(out));
  for (Task t : kAllTasks) {
    ASSERT_EQ(a.Headline(t).has_value(), b.Headline(t).has_value());
    if (a.Headline(t)) EXPECT_NEAR(*a.Headline(t), *b.Headline(t), 1e-9) << TaskName(t);
  }
}

TEST_F(TrainedRun, EvaluateMissingSplit) {
  ASSERT_EQ(train_->code, 0);
  TempDir copy;
  fs::copy(data_->path(), copy.path(), fs::copy_options::recursive | fs::copy_options::overwrite_existing);
  const LabelSchema schema = LabelSchema::Default();
  Manifest m = ReadManifest(copy.path() / "manifest.csv", schema);
  std::erase_if(m.rows, [](const Sample &s) { return s.split == Split::kTest; });
  WriteManifest(m, copy.path() / "manifest.csv", schema);
  const std::string artifact = (run_->path() / "artifact.bin").string();
  const auto r = RunCli({"evaluate", "--artifact", artifact, "--data", copy.path().string(),
                         "--split", "test", "--out", (copy.path() / "r.json").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("test"), std::string::npos) << r.err;
  EXPECT_EQ(RunCli({"evaluate", "--artifact", artifact, "--data", copy.path().string(), "--split",
                    "dev", "--out", (copy.path() / "r.json").string()})
                .code,
            1);
}

TEST_F(TrainedRun, EvaluateRejectsForeignSchema) {
  ASSERT_EQ(train_->code, 0);
  TempDir copy;
  fs::copy(data_->path(), copy.path(), fs::copy_options::recursive | fs::copy_options::overwrite_existing);
  ExperimentConfig c = LoadExperimentConfig(copy.path() / "experiment.json");
  c.schema.emotions[1] = "Ennui";
  std::ofstream(copy.path() / "experiment.json") << ExperimentConfigToJson(c);
  const auto r = RunCli({"evaluate", "--artifact", (run_->path() / "artifact.bin").string(),
                         "--data", copy.path().string(), "--out", (copy.path() / "r.json").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("schema"), std::string::npos) << r.err;
}

TEST_F(TrainedRun, ResumeOfFinishedRunKeepsRecord) {
  ASSERT_EQ(train_->code, 0);
  const auto r = RunCli({"train", "--data", data_->path().string(), "--out",
                         run_->path().string(), "--task", "two", "--resume"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("epoch 2 "), std::string::npos);
  // A different target task changes the config hash.
  const auto bad = RunCli({"train", "--data", data_->path().string(), "--out",
                           run_->path().string(), "--task", "high", "--resume"});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("refusing to resume"), std::string::npos);
}

TEST(Train, UnknownTaskListsChoices) {
  TempDir dir;
  const auto r = RunCli({"train", "--data", dir.path().string(), "--out", dir.path().string(),
                         "--task", "valence"});
  EXPECT_EQ(r.code, 2);
  for (const char *name : {"two", "high", "culture", "type", "country"})
    EXPECT_NE(r.err.find(name), std::string::npos) << r.err;
}

TEST(Train, MissingLabelsNameTheColumns) {
  TempDir data, run;
  ASSERT_EQ(RunCli({"synth-data", "--out", data.path().string(), "--n", "30"}).code, 0);
  const LabelSchema schema = LabelSchema::Default();
  Manifest m = ReadManifest(data.path() / "manifest.csv", schema);
  for (Sample &s : m.rows) s.culture.reset();
  WriteManifest(m, data.path() / "manifest.csv", schema);
  const auto r = RunCli({"train", "--data", data.path().string(), "--out", run.path().string(),
                         "--task", "culture"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("culture_0"), std::string::npos) << r.err;
}

TEST(Analyze, WritesTables) {
  TempDir data, out;
  ASSERT_EQ(RunCli({"synth-data", "--out", data.path().string(), "--n", "80"}).code, 0);
  for (const char *what : {"corr", "av-scatter", "countries", "chain-order"}) {
    const auto r = RunCli({"analyze", what, "--data", data.path().string(), "--out", out.path().string()});
    EXPECT_EQ(r.code, 0) << what << ": " << r.err;
  }
  const fs::path dir = out.path() / "analysis";
  std::istringstream corr(Slurp(dir / "correlation_high.csv"));
  std::string line;
  std::size_t rows = 0;
  while (std::getline(corr, line)) {
    if (rows > 0) EXPECT_EQ(std::count(line.begin(), line.end(), ','), 10) << line;
    ++rows;
  }
  EXPECT_EQ(rows, 11u);
  EXPECT_TRUE(fs::exists(dir / "correlation_culture.csv"));
  EXPECT_TRUE(fs::exists(dir / "av_centroids.csv"));
  EXPECT_TRUE(fs::exists(dir / "country_counts.csv"));
  EXPECT_EQ(Slurp(dir / "chain_order.csv").rfind("rank,label,index,accumulated_abs_r", 0), 0u);
  EXPECT_EQ(RunCli({"analyze", "pca", "--data", data.path().string(), "--out", out.path().string()}).code, 2);
}

// Audio-backed dataset: synthetic labels plus a tone per clip.
void WriteAudioDataset(const fs::path &dir, std::size_t n, std::size_t layers, std::size_t dim) {
  ASSERT_EQ(RunCli({"synth-data", "--out", dir.string(), "--n", std::to_string(n)}).code, 0);
  const Manifest m = ReadManifest(dir / "manifest.csv", LabelSchema::Default());
  fs::create_directories(dir / "audio");
  for (const Sample &s : m.rows) {
    const double f = 150.0 + 60.0 * *s.arousal + 20.0 * *s.valence;
    WriteWav(dir / "audio" / (s.file_id + ".wav"), Waveform{kSampleRate, testing::Sine(f, 6400)});
  }
  fs::remove_all(dir / "features");
  fs::remove(dir / "index.jsonl");
  ExperimentConfig c = LoadExperimentConfig(dir / "experiment.json");
  c.model.num_layers = layers;
  c.model.feature_dim = dim;
  c.data.features = FeatureSource::kExternal;
  c.data.audio_dir = "audio";
  c.data.adapter_cmd = std::string(VBCHAIN_TOOL_PATH) + " toy-encoder --layers " +
                       std::to_string(layers) + " --dim " + std::to_string(dim);
  std::ofstream(dir / "experiment.json") << ExperimentConfigToJson(c);
}

TEST(PrepareFeatures, ExternalAdapterRoundTrip) {
  TempDir data;
  WriteAudioDataset(data.path(), 8, 3, 6);
  const ExperimentConfig c = LoadExperimentConfig(data.path() / "experiment.json");
  const auto r = RunCli({"prepare-features", "--provider", "external", "--adapter-cmd",
                         c.data.adapter_cmd, "--data", data.path().string()});
  ASSERT_EQ(r.code, 0) << r.err;
  PrecomputedProvider p(data.path());
  EXPECT_EQ(p.size(), 8u);
  const FeatureStack s = p.Load("synth_000002");
  EXPECT_EQ(s.frames, ExpectedFrames(6400));
  EXPECT_EQ(s.num_layers, 3u);
  EXPECT_EQ(s.dim, 6u);
  const auto bad = RunCli({"prepare-features", "--provider", "external", "--adapter-cmd", "false",
                           "--data", data.path().string()});
  EXPECT_EQ(bad.code, 1);
}

TEST(PrepareFeatures, TrainsWithWaveformAugmentation) {
  TempDir data, run;
  WriteAudioDataset(data.path(), 24, 3, 6);
  WriteQuickConfig(data.path(), 1);
  const ExperimentConfig c = LoadExperimentConfig(data.path() / "experiment.json");
  ASSERT_EQ(RunCli({"prepare-features", "--provider", "external", "--adapter-cmd",
                    c.data.adapter_cmd, "--data", data.path().string()})
                .code,
            0);
  const auto r = RunCli({"train", "--data", data.path().string(), "--out", run.path().string(),
                         "--task", "two"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(run.path() / "report.json"));
}

}  // namespace
}  // namespace vbchain
