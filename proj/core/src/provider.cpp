// core/src/provider.cpp

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

#include "vbchain/provider.hpp"

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "vbchain/error.hpp"

namespace vbchain {

namespace {

std::filesystem::path ScratchDir() {
  static std::atomic<unsigned long> counter{0};
  const auto dir = std::filesystem::temp_directory_path() /
                   ("vbchain-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::create_directories(dir);
  return dir;
}

std::string ShellQuote(const std::string &s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

}  // namespace

PrecomputedProvider::PrecomputedProvider(std::filesystem::path dir)
    : dir_(std::move(dir)), index_(ReadFeatureIndex(dir_ / "index.jsonl")) {}

FeatureStack PrecomputedProvider::Load(const std::string &file_id) const {
  auto it = index_.find(file_id);
  Require(it != index_.end(), Errc::kNotFound,
          "file_id '" + file_id + "' not found in " + (dir_ / "index.jsonl").string());
  FeatureStack s = ReadFeatureStack(dir_ / it->second.path);
  Require(s.frames == it->second.frames && s.dim == it->second.dim, Errc::kParse,
          "feature file for '" + file_id + "' disagrees with its index entry");
  s.file_id = file_id;
  return s;
}

SyntheticProvider::SyntheticProvider(SynthSpec spec)
    : spec_(spec), truth_(MakeSynthTruth(spec)) {}

FeatureStack SyntheticProvider::Load(const std::string &file_id) const {
  return SynthesizeFeatures(spec_, truth_, SynthIndexFromId(file_id, spec_.n_samples));
}

void RunFeatureAdapter(const std::string &adapter_cmd,
                       const std::vector<std::pair<std::string, std::vector<float>>> &clips,
                       const std::filesystem::path &out_dir) {
  Require(!adapter_cmd.empty(), Errc::kInvalidArgument, "no adapter command configured");
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path scratch = ScratchDir();
  std::string list;
  for (const auto &[id, samples] : clips) {
    PeakNormalized norm = PeakNormalize(samples);
    const auto wav = scratch / (id + ".wav");
    WriteWav(wav, Waveform{kSampleRate, std::move(norm.samples)});
    list += wav.string() + "\n";
  }
  const std::string cmd = adapter_cmd + " " + ShellQuote(out_dir.string());
  FILE *pipe = ::popen(cmd.c_str(), "w");
  Require(pipe != nullptr, Errc::kIo, "cannot start adapter: " + adapter_cmd);
  std::fwrite(list.data(), 1, list.size(), pipe);
  const int status = ::pclose(pipe);
  std::filesystem::remove_all(scratch);
  Require(status == 0, Errc::kIo,
          "adapter '" + adapter_cmd + "' failed with status " + std::to_string(status));
}

std::vector<FeatureIndexEntry> PrepareExternalFeatures(const Manifest &manifest,
                                                       const std::filesystem::path &audio_dir,
                                                       const std::string &adapter_cmd,
                                                       const std::filesystem::path &out_dir) {
  std::vector<std::pair<std::string, std::vector<float>>> clips;
  for (const Sample &s : manifest.rows) {
    const auto wav = audio_dir / (s.file_id + ".wav");
    Require(std::filesystem::exists(wav), Errc::kNotFound,
            "audio for '" + s.file_id + "' not found at " + wav.string());
    clips.emplace_back(s.file_id, ReadWav(wav).samples);
  }
  const auto features = out_dir / "features";
  RunFeatureAdapter(adapter_cmd, clips, features);
  std::vector<FeatureIndexEntry> entries;
  for (const Sample &s : manifest.rows) {
    const auto file = features / (s.file_id + ".vbfs");
    Require(std::filesystem::exists(file), Errc::kNotFound,
            "adapter produced no features for '" + s.file_id + "'");
    const FeatureStack stack = ReadFeatureStack(file);
    entries.push_back({s.file_id, "features/" + s.file_id + ".vbfs", stack.frames, stack.dim});
  }
  WriteFeatureIndex(out_dir / "index.jsonl", entries);
  return entries;
}

ExternalAdapterProvider::ExternalAdapterProvider(std::filesystem::path audio_dir,
                                                 std::string adapter_cmd,
                                                 std::filesystem::path prepared_dir)
    : audio_dir_(std::move(audio_dir)),
      adapter_cmd_(std::move(adapter_cmd)) {
  if (!prepared_dir.empty() && std::filesystem::exists(prepared_dir / "index.jsonl"))
    prepared_ = std::make_unique<PrecomputedProvider>(prepared_dir);
}

Waveform ExternalAdapterProvider::ReadClip(const std::string &file_id) const {
  const auto wav = audio_dir_ / (file_id + ".wav");
  Require(std::filesystem::exists(wav), Errc::kNotFound,
          "audio for '" + file_id + "' not found at " + wav.string());
  return ReadWav(wav);
}

FeatureStack ExternalAdapterProvider::Extract(const std::string &file_id,
                                              std::vector<float> samples) const {
  const std::filesystem::path out = ScratchDir();
  RunFeatureAdapter(adapter_cmd_, {{file_id, std::move(samples)}}, out);
  FeatureStack s = ReadFeatureStack(out / (file_id + ".vbfs"));
  std::filesystem::remove_all(out);
  s.file_id = file_id;
  return s;
}

FeatureStack ExternalAdapterProvider::Load(const std::string &file_id) const {
  if (prepared_) return prepared_->Load(file_id);
  return Extract(file_id, ReadClip(file_id).samples);
}

FeatureStack ExternalAdapterProvider::LoadAugmented(const std::string &file_id,
                                                    const AugmentPolicy &policy,
                                                    Rng &rng) const {
  const Waveform w = ReadClip(file_id);
  return Extract(file_id, ApplyPolicy(w.samples, policy, rng).samples);
}

FeatureStack ToyEncode(const std::string &file_id, std::span<const float> samples,
                       std::size_t num_layers, std::size_t dim) {
  Require(num_layers >= 1 && dim >= 1, Errc::kInvalidArgument, "toy encoder shape must be positive");
  constexpr std::size_t kWindow = 400, kHop = 320;
  const std::size_t frames = ExpectedFrames(samples.size());
  FeatureStack s(file_id, num_layers, frames, dim);
  for (std::size_t t = 0; t < frames; ++t) {
    const std::size_t start = t * kHop;
    for (std::size_t d = 0; d < dim; ++d) {
      // Single-bin DFT at band centre (d + 0.5) / dim of Nyquist, Hann window.
      const double f = std::numbers::pi * (static_cast<double>(d) + 0.5) / static_cast<double>(dim);
      double re = 0.0, im = 0.0;
      for (std::size_t k = 0; k < kWindow && start + k < samples.size(); ++k) {
        const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) /
                                              static_cast<double>(kWindow - 1));
        const double x = w * samples[start + k];
        re += x * std::cos(f * static_cast<double>(k));
        im -= x * std::sin(f * static_cast<double>(k));
      }
      s.at(0, t, d) = static_cast<float>(std::log(1e-6 + re * re + im * im));
    }
  }
  for (std::size_t l = 1; l < num_layers; ++l)
    for (std::size_t t = 0; t < frames; ++t)
      for (std::size_t d = 0; d < dim; ++d) {
        const double prev = s.at(l - 1, t, d);
        const double next = s.at(l - 1, t, (d + 1) % dim);
        s.at(l, t, d) = static_cast<float>(
            std::tanh(0.5 * prev + 0.25 * next + 0.1 * static_cast<double>(l)));
      }
  return s;
}

}  // namespace vbchain
