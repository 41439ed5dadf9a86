// core/include/vbchain/augment.hpp

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

#ifndef VBCHAIN_AUGMENT_HPP_
#define VBCHAIN_AUGMENT_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vbchain/rng.hpp"
#include "vbchain/schema.hpp"

namespace vbchain {

/// Training-time waveform augmentation settings. Pitch is expressed in cents
/// (+-100 cents = +-1 semitone); a speed rate r plays back at factor (1 + r).
struct AugmentPolicy {
  ValueRange pitch_range_cents{-100.0, 100.0};
  ValueRange speed_rate_range{-0.05, 0.05};
  double pitch_prob = 1.0;
  double speed_prob = 1.0;
  std::uint64_t seed = 0;

  void Validate() const;
  bool operator==(const AugmentPolicy &) const = default;
};

/// Resamples by factor (1 + rate). Output length is round(N / (1 + rate)).
std::vector<float> SpeedPerturb(std::span<const float> waveform, double rate,
                                ValueRange allowed = {-0.05, 0.05});

/// Duration-preserving pitch shift by `cents` (phase vocoder time stretch
/// followed by band-limited resampling).
std::vector<float> PitchShift(std::span<const float> waveform, double cents,
                              ValueRange allowed = {-100.0, 100.0});

struct AugmentResult {
  std::vector<float> samples;
  std::optional<double> pitch_cents;
  std::optional<double> speed_rate;
};

/// Applies each transform independently with its probability, parameters
/// drawn uniformly from the policy ranges. One output per input.
AugmentResult ApplyPolicy(std::span<const float> waveform, const AugmentPolicy &policy, Rng &rng);

/// Band-limited (windowed-sinc) read of `input` at positions start + i * step
/// for i in [0, out_len). Samples outside the input read as zero.
std::vector<float> ResampleAt(std::span<const float> input, double start, double step,
                              std::size_t out_len);

}  // namespace vbchain

#endif  // VBCHAIN_AUGMENT_HPP_
