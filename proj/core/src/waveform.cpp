// core/src/waveform.cpp

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

#include "vbchain/waveform.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <utility>

#include "vbchain/error.hpp"

namespace vbchain {

namespace {

constexpr std::array<std::pair<std::size_t, std::size_t>, 7> kConvStack = {{
    {10, 5}, {3, 2}, {3, 2}, {3, 2}, {3, 2}, {2, 2}, {2, 2},
}};

std::uint32_t ReadU32(const unsigned char *p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
         (std::uint32_t(p[3]) << 24);
}
std::uint16_t ReadU16(const unsigned char *p) {
  return std::uint16_t(p[0] | (p[1] << 8));
}
void PutU32(std::ostream &os, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char *>(b), 4);
}
void PutU16(std::ostream &os, std::uint16_t v) {
  const unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
  os.write(reinterpret_cast<const char *>(b), 2);
}

}  // namespace

PeakNormalized PeakNormalize(std::span<const float> waveform) {
  Require(!waveform.empty(), Errc::kInvalidArgument, "cannot peak-normalize an empty waveform");
  float peak = 0.0f;
  for (float s : waveform) {
    Require(std::isfinite(s), Errc::kNonFinite, "waveform holds a non-finite sample");
    peak = std::max(peak, std::abs(s));
  }
  PeakNormalized out;
  out.samples.assign(waveform.begin(), waveform.end());
  if (peak == 0.0f) {
    out.degenerate = true;
    return out;
  }
  for (float &s : out.samples) s /= peak;
  return out;
}

std::size_t ExpectedFrames(std::size_t num_samples) {
  Require(num_samples >= kMinSamplesForOneFrame, Errc::kInvalidArgument,
          "input of " + std::to_string(num_samples) +
              " samples is too short for one frame (need >= 400)");
  std::size_t t = num_samples;
  for (auto [kernel, stride] : kConvStack) t = (t - kernel) / stride + 1;
  return t;
}

Waveform ReadWav(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  Require(in.good(), Errc::kNotFound, "cannot open wav file " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  Require(bytes.size() >= 12 && std::memcmp(bytes.data(), "RIFF", 4) == 0 &&
              std::memcmp(bytes.data() + 8, "WAVE", 4) == 0,
          Errc::kBadMagic, "not a RIFF/WAVE file: " + path.string());
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char *data = nullptr;
  std::size_t data_len = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char *chunk = bytes.data() + pos;
    const std::uint32_t len = ReadU32(chunk + 4);
    Require(pos + 8 + len <= bytes.size(), Errc::kTruncated, "truncated wav chunk in " + path.string());
    if (std::memcmp(chunk, "fmt ", 4) == 0 && len >= 16) {
      format = ReadU16(chunk + 8);
      channels = ReadU16(chunk + 10);
      rate = ReadU32(chunk + 12);
      bits = ReadU16(chunk + 22);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_len = len;
    }
    pos += 8 + len + (len & 1u);
  }
  Require(data != nullptr && channels != 0, Errc::kParse, "wav file lacks fmt/data chunks: " + path.string());
  Require(channels == 1, Errc::kInvalidArgument, "only mono wav input is supported: " + path.string());
  Waveform w;
  w.sample_rate = static_cast<int>(rate);
  if (format == 1 && bits == 16) {
    w.samples.resize(data_len / 2);
    for (std::size_t i = 0; i < w.samples.size(); ++i)
      w.samples[i] = static_cast<float>(static_cast<std::int16_t>(ReadU16(data + 2 * i))) / 32768.0f;
  } else if (format == 3 && bits == 32) {
    w.samples.resize(data_len / 4);
    std::memcpy(w.samples.data(), data, w.samples.size() * 4);
  } else {
    Fail(Errc::kInvalidArgument, "unsupported wav encoding (need PCM16 or float32): " + path.string());
  }
  return w;
}

void WriteWav(const std::filesystem::path &path, const Waveform &wave) {
  std::ofstream os(path, std::ios::binary);
  Require(os.good(), Errc::kIo, "cannot write wav file " + path.string());
  const std::uint32_t data_len = static_cast<std::uint32_t>(wave.samples.size() * 4);
  os.write("RIFF", 4);
  PutU32(os, 36 + data_len);
  os.write("WAVEfmt ", 8);
  PutU32(os, 16);
  PutU16(os, 3);  // IEEE float
  PutU16(os, 1);
  PutU32(os, static_cast<std::uint32_t>(wave.sample_rate));
  PutU32(os, static_cast<std::uint32_t>(wave.sample_rate) * 4);
  PutU16(os, 4);
  PutU16(os, 32);
  os.write("data", 4);
  PutU32(os, data_len);
  os.write(reinterpret_cast<const char *>(wave.samples.data()), data_len);
  Require(os.good(), Errc::kIo, "failed writing wav file " + path.string());
}

}  // namespace vbchain
