// core/src/synth.cpp

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

#include "vbchain/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "json.hpp"
#include "vbchain/error.hpp"
#include "vbchain/rng.hpp"

namespace vbchain {

namespace {

enum Stream : std::uint64_t { kGlobal = 1, kLabels = 2, kFeatures = 3 };

double Clip01(double x) { return std::clamp(x, 0.0, 1.0); }


nlohmann::json MatrixToJson(const Matrix &m) {
  auto j = nlohmann::json::array();
  for (std::size_t r = 0; r < m.rows; ++r) j.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
  return j;
}

}  // namespace

void SynthSpec::Validate() const {
  Require(n_samples >= 1, Errc::kInvalidArgument, "synthetic dataset needs n_samples >= 1");
  Require(std::isfinite(noise_std) && noise_std >= 0.0, Errc::kInvalidArgument,
          "noise_std must be finite and >= 0");
  Require(num_layers >= 1 && feature_dim >= 1, Errc::kInvalidArgument,
          "num_layers and feature_dim must be >= 1");
  Require(min_frames >= 1 && min_frames <= max_frames, Errc::kInvalidArgument,
          "frame range must satisfy 1 <= min_frames <= max_frames");
  Require(country_offset >= 0.0 && culture_offset >= 0.0 && layer_noise >= 0.0 &&
              mixing_gain > 0.0,
          Errc::kInvalidArgument, "offset magnitudes must be >= 0 and mixing_gain > 0");
  Require(train_fraction > 0.0 && val_fraction >= 0.0 && train_fraction + val_fraction <= 1.0,
          Errc::kInvalidArgument, "split fractions must be positive and sum to at most 1");
}

SynthTruth MakeSynthTruth(const SynthSpec &spec) {
  spec.Validate();
  Rng rng(DeriveSeed(spec.seed, {kGlobal}));
  SynthTruth t;
  // Emotion k responds to the (a, v) direction at angle theta_k, so labels
  // with nearby angles correlate positively and opposite ones negatively.
  t.mixing = Matrix(kNumEmotions, 3);
  for (std::size_t k = 0; k < kNumEmotions; ++k) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / kNumEmotions +
                         rng.Uniform(-0.2, 0.2);
    const double gain = spec.mixing_gain * rng.Uniform(0.75, 1.25);
    const double wa = gain * std::cos(theta), wv = gain * std::sin(theta);
    t.mixing(k, 0) = wa;
    t.mixing(k, 1) = wv;
    t.mixing(k, 2) = -0.5 * (wa + wv) + rng.Uniform(-0.5, 0.5);
  }
  t.country_offset = Matrix(kNumCountries, kNumEmotions);
  for (double &x : t.country_offset.data) x = rng.Uniform(-spec.country_offset, spec.country_offset);
  t.culture_offset = Matrix(kNumCountries, kNumEmotions);
  for (double &x : t.culture_offset.data) x = rng.Uniform(-spec.culture_offset, spec.culture_offset);
  t.feature_map = Matrix(spec.feature_dim, kSynthFeatureInputs);
  for (double &x : t.feature_map.data) x = rng.Normal();
  t.feature_bias.resize(spec.feature_dim);
  for (double &x : t.feature_bias) x = rng.Normal(0.0, 0.1);
  t.layer_gain.resize(spec.num_layers);
  for (double &x : t.layer_gain) x = rng.Uniform(0.8, 1.2);
  return t;
}

std::size_t SynthQuadrantType(double arousal, double valence) {
  // Schema order: cry gasp groan grunt laugh pant scream other.
  const bool high_a = arousal >= 0.5, high_v = valence >= 0.5;
  const bool arousal_dominant = std::abs(arousal - 0.5) >= std::abs(valence - 0.5);
  if (high_a && high_v) return arousal_dominant ? 4 : 7;
  if (high_a) return arousal_dominant ? 6 : 1;
  if (!high_v) return arousal_dominant ? 2 : 0;
  return arousal_dominant ? 5 : 3;
}

std::string SynthFileId(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "synth_%06zu", index);
  return buf;
}

std::size_t SynthIndexFromId(const std::string &file_id, std::size_t n_samples) {
  std::size_t idx = 0;
  char tail = 0;
  const bool ok = std::sscanf(file_id.c_str(), "synth_%zu%c", &idx, &tail) == 1 &&
                  SynthFileId(idx) == file_id && idx < n_samples;
  Require(ok, Errc::kNotFound, "file_id '" + file_id + "' not found in synthetic source");
  return idx;
}

SynthLatent SynthesizeLatent(const SynthSpec &spec, std::size_t index) {
  Rng rng(DeriveSeed(spec.seed, {kLabels, index}));
  SynthLatent z;
  z.country = rng.Index(kNumCountries);
  z.arousal = rng.Uniform();
  z.valence = rng.Uniform();
  z.vb_type = SynthQuadrantType(z.arousal, z.valence);
  return z;
}

std::vector<double> SynthCleanEmotions(const SynthTruth &truth, double arousal, double valence,
                                       std::size_t country) {
  std::vector<double> e(kNumEmotions);
  for (std::size_t k = 0; k < kNumEmotions; ++k)
    e[k] = Sigmoid(truth.mixing(k, 0) * arousal + truth.mixing(k, 1) * valence +
                   truth.mixing(k, 2)) +
           truth.country_offset(country, k);
  return e;
}

Sample SynthesizeSample(const SynthSpec &spec, const SynthTruth &truth, const LabelSchema &schema,
                        std::size_t index) {
  const SynthLatent z = SynthesizeLatent(spec, index);
  // Separate stream so latent draws stay fixed whatever the noise level.
  Rng rng(DeriveSeed(spec.seed, {kLabels, index, 1}));
  Sample s;
  s.file_id = SynthFileId(index);
  const double u = rng.Uniform();
  s.split = u < spec.train_fraction                       ? Split::kTrain
            : u < spec.train_fraction + spec.val_fraction ? Split::kVal
                                                          : Split::kTest;
  s.country = schema.countries[z.country];
  s.vb_type = schema.vb_types[z.vb_type];
  s.arousal = DenormalizeTarget(z.arousal, schema.two_range);
  s.valence = DenormalizeTarget(z.valence, schema.two_range);

  std::vector<double> e = SynthCleanEmotions(truth, z.arousal, z.valence, z.country);
  for (double &x : e) x += spec.noise_std > 0.0 ? rng.Normal(0.0, spec.noise_std) : 0.0;
  std::vector<double> high(kNumEmotions), culture(kNumCulture);
  for (std::size_t k = 0; k < kNumEmotions; ++k)
    high[k] = DenormalizeTarget(Clip01(e[k]), schema.high_range);
  for (std::size_t c = 0; c < kNumCountries; ++c)
    for (std::size_t k = 0; k < kNumEmotions; ++k) {
      const double noise = spec.noise_std > 0.0 ? rng.Normal(0.0, spec.noise_std) : 0.0;
      culture[CultureIndex(c, k)] = DenormalizeTarget(
          Clip01(e[k] + truth.culture_offset(c, k) + noise), schema.high_range);
    }
  s.high = std::move(high);
  s.culture = std::move(culture);
  return s;
}

FeatureStack SynthesizeFeatures(const SynthSpec &spec, const SynthTruth &truth,
                                std::size_t index) {
  const SynthLatent z = SynthesizeLatent(spec, index);
  Rng rng(DeriveSeed(spec.seed, {kFeatures, index}));
  const std::size_t frames =
      spec.min_frames + rng.Index(spec.max_frames - spec.min_frames + 1);
  const std::size_t dim = spec.feature_dim;

  std::vector<double> x(kSynthFeatureInputs, 0.0);
  x[0] = z.arousal;
  x[1] = z.valence;
  x[2 + z.country] = 1.0;
  x[2 + kNumCountries + z.vb_type] = 1.0;
  std::vector<double> base(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    double acc = truth.feature_bias[d];
    for (std::size_t i = 0; i < kSynthFeatureInputs; ++i) acc += truth.feature_map(d, i) * x[i];
    base[d] = acc;
  }

  FeatureStack s(SynthFileId(index), spec.num_layers, frames, dim);
  std::vector<double> frame(dim);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t d = 0; d < dim; ++d)
      frame[d] = base[d] + (spec.noise_std > 0.0 ? rng.Normal(0.0, spec.noise_std) : 0.0);
    for (std::size_t l = 0; l < spec.num_layers; ++l) {
      const double layer_sd = spec.num_layers > 1
                                  ? spec.layer_noise * static_cast<double>(l) /
                                        static_cast<double>(spec.num_layers - 1)
                                  : 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double v = truth.layer_gain[l] * frame[d] +
                         (layer_sd > 0.0 ? rng.Normal(0.0, layer_sd) : 0.0);
        s.at(l, t, d) = static_cast<float>(v);
      }
    }
  }
  return s;
}

SynthDataset GenerateSynthetic(const SynthSpec &spec, const LabelSchema &schema) {
  schema.Validate();
  SynthDataset out;
  out.truth = MakeSynthTruth(spec);
  out.manifest.rows.reserve(spec.n_samples);
  out.features.reserve(spec.n_samples);
  for (std::size_t i = 0; i < spec.n_samples; ++i) {
    out.manifest.rows.push_back(SynthesizeSample(spec, out.truth, schema, i));
    out.features.push_back(SynthesizeFeatures(spec, out.truth, i));
  }
  return out;
}

void WriteSyntheticDataset(const SynthDataset &data, const SynthSpec &spec,
                           const LabelSchema &schema, const std::filesystem::path &dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "features");
  WriteManifest(data.manifest, dir / "manifest.csv", schema);
  std::vector<FeatureIndexEntry> index;
  index.reserve(data.features.size());
  for (const auto &f : data.features) {
    const std::string rel = "features/" + f.file_id + ".vbfs";
    WriteFeatureStack(f, dir / rel);
    index.push_back({f.file_id, rel, f.frames, f.dim});
  }
  WriteFeatureIndex(dir / "index.jsonl", index);
  std::ofstream os(dir / "synth_spec.json", std::ios::trunc);
  Require(os.good(), Errc::kIo, "cannot write synth_spec.json in " + dir.string());
  os << SynthSpecToJson(spec, &data.truth) << '\n';
}

std::string SynthSpecToJson(const SynthSpec &spec, const SynthTruth *truth) {
  nlohmann::ordered_json j;
  j["n_samples"] = spec.n_samples;
  j["seed"] = spec.seed;
  j["noise_std"] = spec.noise_std;
  j["num_layers"] = spec.num_layers;
  j["feature_dim"] = spec.feature_dim;
  j["min_frames"] = spec.min_frames;
  j["max_frames"] = spec.max_frames;
  j["mixing_gain"] = spec.mixing_gain;
  j["country_offset"] = spec.country_offset;
  j["culture_offset"] = spec.culture_offset;
  j["layer_noise"] = spec.layer_noise;
  j["train_fraction"] = spec.train_fraction;
  j["val_fraction"] = spec.val_fraction;
  if (truth != nullptr) {
    // Informational: lets external oracles check the planted structure.
    j["truth"]["mixing"] = MatrixToJson(truth->mixing);
    j["truth"]["country_offset"] = MatrixToJson(truth->country_offset);
    j["truth"]["culture_offset"] = MatrixToJson(truth->culture_offset);
  }
  return j.dump(2);
}

SynthSpec SynthSpecFromJson(const std::string &text) {
  SynthSpec s;
  try {
    const auto j = nlohmann::json::parse(text);
    s.n_samples = j.at("n_samples").get<std::size_t>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.noise_std = j.at("noise_std").get<double>();
    s.num_layers = j.at("num_layers").get<std::size_t>();
    s.feature_dim = j.at("feature_dim").get<std::size_t>();
    s.min_frames = j.at("min_frames").get<std::size_t>();
    s.max_frames = j.at("max_frames").get<std::size_t>();
    s.mixing_gain = j.at("mixing_gain").get<double>();
    s.country_offset = j.at("country_offset").get<double>();
    s.culture_offset = j.at("culture_offset").get<double>();
    s.layer_noise = j.at("layer_noise").get<double>();
    s.train_fraction = j.at("train_fraction").get<double>();
    s.val_fraction = j.at("val_fraction").get<double>();
  } catch (const nlohmann::json::exception &ex) {
    Fail(Errc::kParse, std::string("bad synthetic spec: ") + ex.what());
  }
  s.Validate();
  return s;
}

}  // namespace vbchain
