// Copyright 2026 The tonelink Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tonelink/synth.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tonelink {

double fundamental_hz(TokenId token) {
  const double i = static_cast<double>(token.index());
  return 300.0 + std::fmod(i * std::numbers::phi * 83.0, 3500.0);
}

double fold_frequency(double f) {
  return f > kFoldCeilingHz ? 2.0 * kFoldCeilingHz - f : f;
}

ChipSpec chip_spec(TokenId token) {
  if (token.index() >= kVocabSize) throw std::out_of_range("invalid token id");
  const double f1 = fundamental_hz(token);
  ChipSpec spec{token, {}};
  for (std::size_t k = 0; k < 3; ++k) {
    spec.harmonics[k] = {fold_frequency(f1 * static_cast<double>(k + 1)), kHarmonicAmplitudes[k], 0.0};
  }
  return spec;
}

std::size_t chip_samples(int sample_rate, double chip_seconds) {
  return static_cast<std::size_t>(std::lround(chip_seconds * sample_rate));
}

Waveform synth_chip(const ChipSpec& spec, int sample_rate) {
  const double nyquist = sample_rate / 2.0;
  for (const auto& h : spec.harmonics) {
    if (h.freq_hz >= nyquist) throw std::invalid_argument("harmonic above Nyquist");
    if (h.freq_hz <= 0.0) throw std::invalid_argument("harmonic frequency must be positive");
  }
  const std::size_t n = chip_samples(sample_rate, spec.chip_seconds);
  const std::size_t ramp = std::min(chip_samples(sample_rate, spec.fade_seconds), n / 2);

  std::vector<double> s(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    double v = 0.0;
    for (const auto& h : spec.harmonics)
      v += h.amplitude * std::sin(2.0 * std::numbers::pi * h.freq_hz * t + h.phase_rad);
    s[i] = v;
  }
  // Raised-cosine ramps; zero at both chip edges.
  for (std::size_t i = 0; i < ramp; ++i) {
    const double g = 0.5 * (1.0 - std::cos(std::numbers::pi * static_cast<double>(i) / ramp));
    s[i] *= g;
    s[n - 1 - i] *= g;
  }

  double pk = 0.0;
  for (double v : s) pk = std::max(pk, std::abs(v));
  const double scale = pk > 0.0 ? kChipPeak / pk : 0.0;

  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) w.samples[i] = static_cast<float>(s[i] * scale);
  return w;
}

Waveform synth_message(const TokenSeq& ids, int sample_rate) {
  if (ids.empty()) throw std::invalid_argument("empty message");
  Waveform out;
  out.sample_rate = sample_rate;
  out.samples.reserve(ids.size() * chip_samples(sample_rate));
  for (auto id : ids) {
    const auto chip = synth_chip(chip_spec(id), sample_rate);
    out.samples.insert(out.samples.end(), chip.samples.begin(), chip.samples.end());
  }
  return out;
}

}  // namespace tonelink
