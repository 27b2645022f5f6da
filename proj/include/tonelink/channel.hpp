// Copyright 2026 The tonelink Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tonelink/dsp.hpp"
#include "tonelink/rng.hpp"
#include "tonelink/waveform.hpp"

namespace tonelink {

enum class NoiseKind { kWhite, kPink, kBrown, kMixed };
enum class ClipMode { kNone, kHard, kSoft };

std::string_view to_string(NoiseKind k);
NoiseKind noise_kind_from_string(std::string_view s);
std::string_view to_string(ClipMode m);
ClipMode clip_mode_from_string(std::string_view s);

/// Unit-power noise of the given color. Pink is a 3-pole IIR approximation of
/// 1/f; brown is the mean-removed running sum of white; mixed is the
/// equal-power sum of all three, renormalized.
std::vector<float> make_noise(NoiseKind kind, std::size_t n, Rng& rng);

/// Adds noise scaled so that 10 log10(P_signal / P_noise) == snr_db over the
/// whole waveform. Throws std::invalid_argument("cannot compute SNR against
/// silence") when the input has zero power.
Waveform add_noise(const Waveform& w, NoiseKind kind, double snr_db, Rng& rng);

/// Number of echoes after the direct path: the largest k with tau^k >= 0.01.
int reverb_echo_count(double tau);

/// Convolution with taps tau^k at k * round(delay_ms * sr / 1000) samples,
/// k = 0..reverb_echo_count(tau). Output grows by the tail length.
Waveform reverb(const Waveform& w, double tau, double delay_ms);

/// hard: clamp to +-threshold; soft: threshold * tanh(x / threshold).
Waveform clip(const Waveform& w, ClipMode mode, double threshold);

/// Linear-interpolation resampling reading the input at steps of `factor`:
/// output length round(len / factor), tones move from f to f * factor.
/// factor must lie in [0.9, 1.1].
Waveform resample_drift(const Waveform& w, double factor);

/// Same as resample_drift without the range check.
std::vector<float> resample_linear(std::span<const float> x, double step);

Waveform gain(const Waveform& w, double db);

/// Single RBJ peaking biquad.
Waveform parametric_eq(const Waveform& w, double center_hz, double gain_db, double q);

struct GainStage {
  bool enabled = false;
  double min_db = -12.0;
  double max_db = 6.0;
};

struct EqStage {
  bool enabled = false;
  double center_min_hz = 300.0;
  double center_max_hz = 6000.0;
  double gain_min_db = -6.0;
  double gain_max_db = 6.0;
  double q_min = 0.5;
  double q_max = 2.0;
};

struct ReverbStage {
  bool enabled = false;
  double tau = 0.4;
  double delay_ms = 20.0;
};

struct ClipStage {
  ClipMode mode = ClipMode::kNone;
  double threshold = 0.5;
};

struct DriftStage {
  bool enabled = false;
  double min_factor = 0.98;
  double max_factor = 1.02;
};

struct NoiseStage {
  bool enabled = false;
  NoiseKind kind = NoiseKind::kWhite;
  double snr_min_db = -5.0;
  double snr_max_db = 30.0;
};

/// Distortion recipe. Ranges are sampled uniformly per application; set
/// min == max for a fixed value. Every stage is off by default.
struct ChannelConfig {
  GainStage gain;
  EqStage eq;
  ReverbStage reverb;
  ClipStage clip;
  DriftStage drift;
  NoiseStage noise;

  /// Throws std::invalid_argument on out-of-range fields.
  void validate() const;
  bool is_identity() const;

  /// Every stage on, with the randomized training ranges.
  static ChannelConfig combined();
};

/// The concrete parameters one apply_channel call used.
struct ChannelDraw {
  std::uint64_t seed = 0;
  std::optional<double> gain_db;
  std::optional<double> eq_center_hz, eq_gain_db, eq_q;
  std::optional<double> reverb_tau, reverb_delay_ms;
  std::optional<ClipMode> clip_mode;
  std::optional<double> clip_threshold;
  std::optional<double> drift_factor;
  std::optional<NoiseKind> noise_kind;
  std::optional<double> noise_snr_db;
};

nlohmann::json to_json(const ChannelConfig& cfg);
/// Missing keys keep the values already in `base`.
ChannelConfig channel_config_from_json(const nlohmann::json& j, ChannelConfig base = {});
nlohmann::json to_json(const ChannelDraw& d);

/// Stages in the order gain, EQ, reverb, clip, drift, noise. Parameters are
/// drawn from `rng` in that order before the noise samples.
Waveform apply_channel(const Waveform& w, const ChannelConfig& cfg, Rng& rng,
                       ChannelDraw* draw = nullptr);

/// Mel-domain augmentation. Zero widths and an infinite SNR disable a stage.
struct MelAugConfig {
  double snr_db = std::numeric_limits<double>::infinity();
  int freq_mask = 0;
  int time_mask = 0;
  int blur_width = 0;
  int max_shift = 0;

  void validate() const;
};

/// Rolls frames right by `shift` (negative rolls left).
MelSpectrogram circular_shift(const MelSpectrogram& m, long long shift);

/// Gaussian noise at snr_db (values clamped at 0), then one frequency mask
/// and one time mask of random width <= max, moving-average blur over
/// blur_width frames, and a circular shift drawn from [-max_shift, max_shift].
MelSpectrogram mel_augment(const MelSpectrogram& m, const MelAugConfig& cfg, Rng& rng);

}  // namespace tonelink
