// core/include/vbchain/provider.hpp

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

#ifndef VBCHAIN_PROVIDER_HPP_
#define VBCHAIN_PROVIDER_HPP_

// Sources of feature stacks. The pretrained speech encoder lives outside
// this library; its hidden states arrive either precomputed (.vbfs files),
// regenerated from the synthetic generator, or through an adapter process.

#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vbchain/augment.hpp"
#include "vbchain/feature_store.hpp"
#include "vbchain/manifest.hpp"
#include "vbchain/rng.hpp"
#include "vbchain/synth.hpp"
#include "vbchain/waveform.hpp"

namespace vbchain {

/// Implementations are safe for concurrent const calls.
class FeatureProvider {
 public:
  virtual ~FeatureProvider() = default;

  /// Throws Errc::kNotFound naming `file_id` when it is unknown.
  virtual FeatureStack Load(const std::string &file_id) const = 0;
  /// True when LoadAugmented() actually perturbs the audio.
  virtual bool SupportsAugmentation() const { return false; }
  /// Training-time view. The default ignores the policy.
  virtual FeatureStack LoadAugmented(const std::string &file_id, const AugmentPolicy &policy,
                                     Rng &rng) const {
    (void)policy;
    (void)rng;
    return Load(file_id);
  }
  /// Whether the encoder behind the features can be fine-tuned in-process.
  /// The reference providers are frozen.
  virtual bool FineTunable() const { return false; }
};

/// Reads `<dir>/index.jsonl` and the .vbfs files it lists.
class PrecomputedProvider : public FeatureProvider {
 public:
  explicit PrecomputedProvider(std::filesystem::path dir);
  FeatureStack Load(const std::string &file_id) const override;
  std::size_t size() const { return index_.size(); }

 private:
  std::filesystem::path dir_;
  std::map<std::string, FeatureIndexEntry> index_;
};

class SyntheticProvider : public FeatureProvider {
 public:
  explicit SyntheticProvider(SynthSpec spec);
  FeatureStack Load(const std::string &file_id) const override;

 private:
  SynthSpec spec_;
  SynthTruth truth_;
};

/// Runs `<adapter_cmd> <out_dir>` with one WAV path per stdin line; the
/// adapter must write `<out_dir>/<stem>.vbfs` for every path. Waveforms are
/// peak-normalized before they are handed over.
void RunFeatureAdapter(const std::string &adapter_cmd,
                       const std::vector<std::pair<std::string, std::vector<float>>> &clips,
                       const std::filesystem::path &out_dir);

/// Extracts `<audio_dir>/<file_id>.wav` for every manifest row into
/// `<out_dir>/features/` and writes `<out_dir>/index.jsonl`.
std::vector<FeatureIndexEntry> PrepareExternalFeatures(const Manifest &manifest,
                                                       const std::filesystem::path &audio_dir,
                                                       const std::string &adapter_cmd,
                                                       const std::filesystem::path &out_dir);

/// Audio-backed provider. Load() serves prepared features when an index is
/// present and otherwise invokes the adapter; LoadAugmented() always
/// augments the waveform and re-extracts.
class ExternalAdapterProvider : public FeatureProvider {
 public:
  ExternalAdapterProvider(std::filesystem::path audio_dir, std::string adapter_cmd,
                          std::filesystem::path prepared_dir = {});
  FeatureStack Load(const std::string &file_id) const override;
  bool SupportsAugmentation() const override { return true; }
  FeatureStack LoadAugmented(const std::string &file_id, const AugmentPolicy &policy,
                             Rng &rng) const override;

 private:
  FeatureStack Extract(const std::string &file_id, std::vector<float> samples) const;
  Waveform ReadClip(const std::string &file_id) const;

  std::filesystem::path audio_dir_;
  std::string adapter_cmd_;
  std::unique_ptr<PrecomputedProvider> prepared_;
};

/// Deterministic stand-in encoder used by the bundled toy adapter: frames
/// follow the convolutional front-end geometry (400-sample window, 320 hop);
/// layer 0 holds log band energies and each later layer is a fixed
/// nonlinear map of the previous one.
FeatureStack ToyEncode(const std::string &file_id, std::span<const float> samples,
                       std::size_t num_layers, std::size_t dim);

}  // namespace vbchain

#endif  // VBCHAIN_PROVIDER_HPP_
