// core/include/vbchain/waveform.hpp

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

#ifndef VBCHAIN_WAVEFORM_HPP_
#define VBCHAIN_WAVEFORM_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace vbchain {

inline constexpr int kSampleRate = 16000;

struct Waveform {
  int sample_rate = kSampleRate;
  std::vector<float> samples;
};

struct PeakNormalized {
  std::vector<float> samples;
  bool degenerate = false;  // all-zero input, returned unchanged
};

/// Scales the waveform so that max |sample| == 1.
PeakNormalized PeakNormalize(std::span<const float> waveform);

/// Frame count produced by the seven-layer wav2vec2 convolutional front end
/// (kernels 10,3,3,3,3,2,2; strides 5,2,2,2,2,2,2; no padding).
/// Requires num_samples >= 400.
std::size_t ExpectedFrames(std::size_t num_samples);
inline constexpr std::size_t kMinSamplesForOneFrame = 400;

/// Reads a mono 16-bit PCM or 32-bit float WAV file.
Waveform ReadWav(const std::filesystem::path &path);
/// Writes a mono 32-bit float WAV file.
void WriteWav(const std::filesystem::path &path, const Waveform &wave);

}  // namespace vbchain

#endif  // VBCHAIN_WAVEFORM_HPP_
