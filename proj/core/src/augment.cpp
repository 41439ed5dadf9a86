// core/src/augment.cpp

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

#include "vbchain/augment.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>

#include "vbchain/error.hpp"

namespace vbchain {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kSincHalfWidth = 16;
constexpr std::size_t kFrameSize = 1024;
constexpr std::size_t kAnalysisHop = 256;

// FFTW planning is not thread-safe.
std::mutex &PlannerMutex() {
  static std::mutex m;
  return m;
}

double Sinc(double x) {
  if (x == 0.0) return 1.0;
  if (x == std::round(x)) return 0.0;
  return std::sin(kPi * x) / (kPi * x);
}

void CheckInRange(double value, ValueRange allowed, const char *what) {
  Require(std::isfinite(value) && value >= allowed.lo && value <= allowed.hi,
          Errc::kOutOfRange,
          std::string(what) + " " + std::to_string(value) + " outside allowed range [" +
              std::to_string(allowed.lo) + ", " + std::to_string(allowed.hi) + "]");
}

double WrapPhase(double p) { return p - 2.0 * kPi * std::round(p / (2.0 * kPi)); }

/// Phase-vocoder time stretch: analysis hop kAnalysisHop, synthesis hop
/// `synth_hop`. Returns the stretched signal and writes the zero padding
/// added in front of the input (in analysis samples).
std::vector<double> PhaseVocoderStretch(std::span<const float> x, std::size_t synth_hop,
                                        std::size_t &pad) {
  const std::size_t n = kFrameSize;
  const std::size_t bins = n / 2 + 1;
  pad = n;
  std::vector<double> padded(pad + x.size() + 2 * n, 0.0);
  std::copy(x.begin(), x.end(), padded.begin() + static_cast<std::ptrdiff_t>(pad));
  const std::size_t frames = (padded.size() - n) / kAnalysisHop + 1;

  std::vector<double> window(n);
  for (std::size_t i = 0; i < n; ++i) window[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * i / n);

  struct FftwFree {
    void operator()(void *p) const { fftw_free(p); }
  };
  std::unique_ptr<double, FftwFree> time(fftw_alloc_real(n));
  std::unique_ptr<fftw_complex, FftwFree> freq(fftw_alloc_complex(bins));
  fftw_plan fwd, inv;
  {
    std::lock_guard<std::mutex> lock(PlannerMutex());
    fwd = fftw_plan_dft_r2c_1d(static_cast<int>(n), time.get(), freq.get(), FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_1d(static_cast<int>(n), freq.get(), time.get(), FFTW_ESTIMATE);
  }

  const std::size_t out_len = (frames - 1) * synth_hop + n;
  std::vector<double> y(out_len, 0.0), norm(out_len, 0.0);
  std::vector<double> prev_phase(bins, 0.0), synth_phase(bins, 0.0);
  const double ha = static_cast<double>(kAnalysisHop);
  const double hs = static_cast<double>(synth_hop);

  for (std::size_t f = 0; f < frames; ++f) {
    const double *src = padded.data() + f * kAnalysisHop;
    for (std::size_t i = 0; i < n; ++i) time.get()[i] = src[i] * window[i];
    fftw_execute(fwd);
    for (std::size_t k = 0; k < bins; ++k) {
      const std::complex<double> c(freq.get()[k][0], freq.get()[k][1]);
      const double mag = std::abs(c);
      const double phase = std::arg(c);
      if (f == 0) {
        synth_phase[k] = phase;
      } else {
        const double omega = 2.0 * kPi * static_cast<double>(k) / n;
        const double delta = WrapPhase(phase - prev_phase[k] - ha * omega);
        synth_phase[k] += hs * (omega + delta / ha);
      }
      prev_phase[k] = phase;
      freq.get()[k][0] = mag * std::cos(synth_phase[k]);
      freq.get()[k][1] = mag * std::sin(synth_phase[k]);
    }
    fftw_execute(inv);
    double *dst = y.data() + f * synth_hop;
    double *nrm = norm.data() + f * synth_hop;
    for (std::size_t i = 0; i < n; ++i) {
      dst[i] += time.get()[i] / static_cast<double>(n) * window[i];
      nrm[i] += window[i] * window[i];
    }
  }
  {
    std::lock_guard<std::mutex> lock(PlannerMutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
  }
  for (std::size_t i = 0; i < out_len; ++i)
    if (norm[i] > 1e-8) y[i] /= norm[i];
  return y;
}

}  // namespace

void AugmentPolicy::Validate() const {
  Require(std::isfinite(pitch_range_cents.lo) && std::isfinite(pitch_range_cents.hi) &&
              pitch_range_cents.lo <= pitch_range_cents.hi,
          Errc::kInvalidArgument, "pitch range must be finite with lo <= hi");
  Require(std::isfinite(speed_rate_range.lo) && std::isfinite(speed_rate_range.hi) &&
              speed_rate_range.lo <= speed_rate_range.hi,
          Errc::kInvalidArgument, "speed range must be finite with lo <= hi");
  Require(speed_rate_range.lo > -1.0, Errc::kInvalidArgument, "speed rate must stay above -1");
  Require(pitch_prob >= 0.0 && pitch_prob <= 1.0 && speed_prob >= 0.0 && speed_prob <= 1.0,
          Errc::kInvalidArgument, "apply probabilities must lie in [0, 1]");
}

std::vector<float> ResampleAt(std::span<const float> input, double start, double step,
                              std::size_t out_len) {
  Require(step > 0.0, Errc::kInvalidArgument, "resampling step must be positive");
  // Low-pass at the output Nyquist when reading faster than 1 sample/step.
  const double cutoff = std::min(1.0, 1.0 / step);
  const double half_width = kSincHalfWidth / cutoff;
  std::vector<float> out(out_len, 0.0f);
  const auto n = static_cast<std::ptrdiff_t>(input.size());
  for (std::size_t i = 0; i < out_len; ++i) {
    const double pos = start + static_cast<double>(i) * step;
    const auto lo = static_cast<std::ptrdiff_t>(std::ceil(pos - half_width));
    const auto hi = static_cast<std::ptrdiff_t>(std::floor(pos + half_width));
    double acc = 0.0;
    for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(lo, 0); j <= std::min(hi, n - 1); ++j) {
      const double d = pos - static_cast<double>(j);
      const double w = 0.5 + 0.5 * std::cos(kPi * d / (half_width + 1.0));
      acc += input[static_cast<std::size_t>(j)] * cutoff * Sinc(cutoff * d) * w;
    }
    out[i] = static_cast<float>(acc);
  }
  return out;
}

std::vector<float> SpeedPerturb(std::span<const float> waveform, double rate, ValueRange allowed) {
  CheckInRange(rate, allowed, "speed rate");
  Require(waveform.size() >= 2, Errc::kInvalidArgument, "speed perturbation needs >= 2 samples");
  const double factor = 1.0 + rate;
  Require(factor > 0.0, Errc::kOutOfRange, "speed factor must be positive");
  const auto out_len =
      static_cast<std::size_t>(std::llround(static_cast<double>(waveform.size()) / factor));
  return ResampleAt(waveform, 0.0, factor, out_len);
}

std::vector<float> PitchShift(std::span<const float> waveform, double cents, ValueRange allowed) {
  CheckInRange(cents, allowed, "pitch shift (cents)");
  if (waveform.empty()) return {};
  const double ratio = std::exp2(cents / 1200.0);
  // Integer synthesis hop rounded up so the stretched signal always covers
  // the read span; the pitch factor itself is set by the resampling step.
  const auto synth_hop = static_cast<std::size_t>(
      std::ceil(static_cast<double>(kAnalysisHop) * ratio - 1e-9));
  std::size_t pad = 0;
  const std::vector<double> stretched = PhaseVocoderStretch(waveform, synth_hop, pad);
  const std::vector<float> as_float(stretched.begin(), stretched.end());
  const double stretch = static_cast<double>(synth_hop) / static_cast<double>(kAnalysisHop);
  return ResampleAt(as_float, static_cast<double>(pad) * stretch, ratio, waveform.size());
}

AugmentResult ApplyPolicy(std::span<const float> waveform, const AugmentPolicy &policy, Rng &rng) {
  policy.Validate();
  AugmentResult r;
  r.samples.assign(waveform.begin(), waveform.end());
  // Draw both decisions up front so the random stream does not depend on
  // which transforms fire.
  const bool do_pitch = rng.Bernoulli(policy.pitch_prob);
  const double cents = rng.Uniform(policy.pitch_range_cents.lo, policy.pitch_range_cents.hi);
  const bool do_speed = rng.Bernoulli(policy.speed_prob);
  const double rate = rng.Uniform(policy.speed_rate_range.lo, policy.speed_rate_range.hi);
  if (do_pitch && !r.samples.empty()) {
    r.samples = PitchShift(r.samples, cents, policy.pitch_range_cents);
    r.pitch_cents = cents;
  }
  if (do_speed && r.samples.size() >= 2) {
    r.samples = SpeedPerturb(r.samples, rate, policy.speed_rate_range);
    r.speed_rate = rate;
  }
  return r;
}

}  // namespace vbchain
