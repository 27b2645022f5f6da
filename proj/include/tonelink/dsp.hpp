// Copyright 2026 The tonelink Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "json.hpp"
#include "tonelink/waveform.hpp"

namespace tonelink {

/// Analysis parameters for the log-mel front end.
struct MelConfig {
  int sample_rate = kDefaultSampleRate;
  int n_fft = 512;
  int hop = 160;
  int n_mels = 40;
  double fmin_hz = 0.0;
  double fmax_hz = 8000.0;
  /// Exponent on |STFT| before the filterbank: 1 for magnitude, 2 for power.
  int power = 1;

  int bins() const { return n_fft / 2 + 1; }
  /// Throws std::invalid_argument on inconsistent fields.
  void validate() const;

  friend bool operator==(const MelConfig&, const MelConfig&) = default;
};

nlohmann::json to_json(const MelConfig& cfg);
MelConfig mel_config_from_json(const nlohmann::json& j);

/// log(1 + F_mel |X|^power), stored [n_mels x frames]. Entries are >= 0.
struct MelSpectrogram {
  Eigen::MatrixXd values;
  MelConfig config;

  Eigen::Index n_mels() const { return values.rows(); }
  Eigen::Index frames() const { return values.cols(); }
};

// HTK mel scale.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Center frequencies of the n_mels triangles, ascending.
std::vector<double> mel_center_frequencies(const MelConfig& cfg);

/// Triangular filters, peak 1, evaluated at FFT bin frequencies.
/// Shape [n_mels x (n_fft/2 + 1)].
Eigen::MatrixXd mel_filterbank(const MelConfig& cfg);

/// Moore-Penrose pseudo-inverse by SVD; singular values below
/// rcond * sigma_max are treated as zero.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& a, double rcond = 1e-8);

/// Filterbank and its pseudo-inverse, computed once per config and shared.
struct MelBasis {
  Eigen::MatrixXd filterbank;
  Eigen::MatrixXd inverse;
};
const MelBasis& mel_basis(const MelConfig& cfg);

/// Periodic Hann of length n.
std::vector<double> hann_window(int n);

/// |STFT| of a centered, reflect-padded signal: [(n_fft/2+1) x T] with
/// T = floor(len / hop) + 1.
Eigen::MatrixXd stft_magnitude(std::span<const float> x, const MelConfig& cfg);

/// Throws std::invalid_argument on sample-rate mismatch.
MelSpectrogram mel_spectrogram(const Waveform& w, const MelConfig& cfg = {});

inline constexpr int kGriffinLimIterations = 32;
inline constexpr double kGriffinLimPeak = 0.95;

struct GriffinLimResult {
  Waveform wave;
  /// Spectral convergence || |STFT(x_k)| - S ||_F / ||S||_F for k = 1..iters.
  std::vector<double> residuals;
};

/// Phase recovery for a linear magnitude spectrogram [(n_fft/2+1) x T],
/// starting from zero phase. Output has (T-1)*hop samples and is scaled down
/// to kGriffinLimPeak if it would exceed it.
GriffinLimResult griffin_lim_magnitude(const Eigen::MatrixXd& magnitude, const MelConfig& cfg,
                                       int iters = kGriffinLimIterations);

/// Inverts log compression, lifts mel to linear frequency through the
/// filterbank pseudo-inverse (negatives clamped), then runs Griffin-Lim.
GriffinLimResult griffin_lim_detailed(const MelSpectrogram& m, int iters = kGriffinLimIterations);
Waveform griffin_lim(const MelSpectrogram& m, int iters = kGriffinLimIterations);

/// Mean |m - mel(GL(m))| with the shorter time axis zero-padded.
double roundtrip_consistency(const MelSpectrogram& m, int iters = kGriffinLimIterations);

inline constexpr double kDefaultEnergyLo = 0.1;
inline constexpr double kDefaultEnergyHi = 3.0;
inline constexpr double kHighbandStart = 0.7;

struct SpectralDiagnostics {
  /// Mean over frames of the distance of the frame's mean mel value from [lo, hi].
  double energy_violation = 0.0;
  /// Mean L1 distance between adjacent frames.
  double total_variation = 0.0;
  /// Share of summed mel values in bins >= floor(0.7 * n_mels).
  double highband_fraction = 0.0;
};

SpectralDiagnostics spectral_diagnostics(const MelSpectrogram& m, double lo = kDefaultEnergyLo,
                                         double hi = kDefaultEnergyHi);

// Binary mel format: little-endian u64 n_mels, u64 frames, then
// n_mels * frames float32 values, row-major (one mel band after another).
std::vector<std::uint8_t> encode_mel_binary(const MelSpectrogram& m);
Eigen::MatrixXd decode_mel_binary(std::span<const std::uint8_t> bytes);

/// Writes `path` and a `path.json` sidecar carrying the MelConfig.
void write_mel(const std::filesystem::path& path, const MelSpectrogram& m);
/// Reads `path`; uses the sidecar config when present, else defaults.
MelSpectrogram read_mel(const std::filesystem::path& path);

}  // namespace tonelink
