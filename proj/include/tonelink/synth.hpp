// Copyright 2026 The tonelink Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <array>

#include "tonelink/vocab.hpp"
#include "tonelink/waveform.hpp"

namespace tonelink {

inline constexpr double kChipSeconds = 0.060;
inline constexpr double kFadeSeconds = 0.005;
/// Upper harmonics above this are reflected back below it.
inline constexpr double kFoldCeilingHz = 7600.0;
inline constexpr double kChipPeak = 0.9;
inline constexpr std::array<double, 3> kHarmonicAmplitudes = {1.0, 0.5, 0.25};

struct Harmonic {
  double freq_hz;
  double amplitude;
  double phase_rad;
};

/// Per-token tone recipe: three harmonics under a raised-cosine fade.
struct ChipSpec {
  TokenId token;
  std::array<Harmonic, 3> harmonics;
  double chip_seconds = kChipSeconds;
  double fade_seconds = kFadeSeconds;
};

/// Fundamental for token `i`: 300 + (i * golden_ratio * 83) mod 3500 Hz.
double fundamental_hz(TokenId token);

/// Reflects `f` around kFoldCeilingHz when it lies above it.
double fold_frequency(double f);

ChipSpec chip_spec(TokenId token);

/// Samples per chip / fade ramp at `sample_rate`.
std::size_t chip_samples(int sample_rate, double chip_seconds = kChipSeconds);

/// One windowed chip, peak-normalized to kChipPeak.
/// Throws std::invalid_argument("harmonic above Nyquist") if any f_k >= sr/2.
Waveform synth_chip(const ChipSpec& spec, int sample_rate = kDefaultSampleRate);

/// Gapless concatenation of chips. Throws std::invalid_argument("empty message").
Waveform synth_message(const TokenSeq& ids, int sample_rate = kDefaultSampleRate);

}  // namespace tonelink
