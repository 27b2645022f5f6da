// Copyright 2026 The tonelink Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace tonelink {

inline constexpr int kDefaultSampleRate = 16000;

/// Mono audio. Samples are nominally in [-1, 1]; channel stages such as gain
/// and additive noise may exceed that, and WAV export clamps.
struct Waveform {
  std::vector<float> samples;
  int sample_rate = kDefaultSampleRate;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
};

double energy(std::span<const float> x);
double mean_power(std::span<const float> x);
double rms(std::span<const float> x);
double peak(std::span<const float> x);

/// 16-bit PCM mono RIFF/WAVE image.
std::vector<std::uint8_t> encode_wav(const Waveform& w);
/// Accepts mono 16-bit PCM or 32-bit IEEE float.
Waveform decode_wav(std::span<const std::uint8_t> bytes);

void write_wav(const std::filesystem::path& path, const Waveform& w);
Waveform read_wav(const std::filesystem::path& path);

}  // namespace tonelink
