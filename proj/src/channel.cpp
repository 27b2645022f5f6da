// Copyright 2026 The tonelink Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tonelink/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace tonelink {

std::string_view to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::kWhite: return "white";
    case NoiseKind::kPink: return "pink";
    case NoiseKind::kBrown: return "brown";
    case NoiseKind::kMixed: return "mixed";
  }
  return "white";
}

NoiseKind noise_kind_from_string(std::string_view s) {
  if (s == "white" || s == "gaussian") return NoiseKind::kWhite;
  if (s == "pink") return NoiseKind::kPink;
  if (s == "brown") return NoiseKind::kBrown;
  if (s == "mixed") return NoiseKind::kMixed;
  throw std::invalid_argument("unknown noise kind: " + std::string(s));
}

std::string_view to_string(ClipMode m) {
  switch (m) {
    case ClipMode::kNone: return "none";
    case ClipMode::kHard: return "hard";
    case ClipMode::kSoft: return "soft";
  }
  return "none";
}

ClipMode clip_mode_from_string(std::string_view s) {
  if (s == "none") return ClipMode::kNone;
  if (s == "hard") return ClipMode::kHard;
  if (s == "soft") return ClipMode::kSoft;
  throw std::invalid_argument("unknown clip mode: " + std::string(s));
}

namespace {

// Paul Kellet's economy pink filter: three one-pole sections plus a direct term.
constexpr double kPinkPoles[3] = {0.99765, 0.96300, 0.57000};
constexpr double kPinkGains[3] = {0.0990460, 0.2965164, 1.0526913};
constexpr double kPinkDirect = 0.1848;
constexpr std::size_t kPinkWarmup = 4096;

void normalize_power(std::vector<double>& x) {
  double p = 0.0;
  for (double v : x) p += v * v;
  p /= static_cast<double>(std::max<std::size_t>(x.size(), 1));
  if (p <= 0.0) return;
  const double s = 1.0 / std::sqrt(p);
  for (double& v : x) v *= s;
}

std::vector<double> colored(NoiseKind kind, std::size_t n, Rng& rng) {
  std::vector<double> out(n);
  switch (kind) {
    case NoiseKind::kWhite:
      for (auto& v : out) v = rng.gaussian();
      break;
    case NoiseKind::kPink: {
      double state[3] = {0.0, 0.0, 0.0};
      for (std::size_t i = 0; i < kPinkWarmup + n; ++i) {
        const double white = rng.gaussian();
        double acc = white * kPinkDirect;
        for (int s = 0; s < 3; ++s) {
          state[s] = kPinkPoles[s] * state[s] + white * kPinkGains[s];
          acc += state[s];
        }
        if (i >= kPinkWarmup) out[i - kPinkWarmup] = acc;
      }
      break;
    }
    case NoiseKind::kBrown: {
      double acc = 0.0, mean = 0.0;
      for (auto& v : out) {
        acc += rng.gaussian();
        v = acc;
        mean += acc;
      }
      mean /= static_cast<double>(std::max<std::size_t>(n, 1));
      for (auto& v : out) v -= mean;
      break;
    }
    case NoiseKind::kMixed: {
      auto w = colored(NoiseKind::kWhite, n, rng);
      auto p = colored(NoiseKind::kPink, n, rng);
      auto b = colored(NoiseKind::kBrown, n, rng);
      for (std::size_t i = 0; i < n; ++i) out[i] = w[i] + p[i] + b[i];
      break;
    }
  }
  normalize_power(out);
  return out;
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be finite");
}

void require_range(double lo, double hi, const char* what) {
  require_finite(lo, what);
  require_finite(hi, what);
  if (lo > hi) throw std::invalid_argument(std::string(what) + ": min exceeds max");
}

double draw(Rng& rng, double lo, double hi) { return lo == hi ? lo : rng.uniform(lo, hi); }

}  // namespace

std::vector<float> make_noise(NoiseKind kind, std::size_t n, Rng& rng) {
  auto d = colored(kind, n, rng);
  return {d.begin(), d.end()};
}

Waveform add_noise(const Waveform& w, NoiseKind kind, double snr_db, Rng& rng) {
  require_finite(snr_db, "snr_db");
  const double p_signal = mean_power(w.samples);
  if (!(p_signal > 0.0)) throw std::invalid_argument("cannot compute SNR against silence");
  const auto noise = colored(kind, w.size(), rng);
  // colored() returns unit power, so the scale is the target noise RMS.
  const double scale = std::sqrt(p_signal / std::pow(10.0, snr_db / 10.0));
  Waveform out = w;
  for (std::size_t i = 0; i < out.size(); ++i)
    out.samples[i] = static_cast<float>(out.samples[i] + scale * noise[i]);
  return out;
}

int reverb_echo_count(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("reverb tau must lie in (0, 1)");
  int k = 0;
  double amp = 1.0;
  while (amp * tau >= 0.01) {
    amp *= tau;
    ++k;
  }
  return k;
}

Waveform reverb(const Waveform& w, double tau, double delay_ms) {
  const int echoes = reverb_echo_count(tau);
  require_finite(delay_ms, "reverb delay");
  if (delay_ms < 0.0) throw std::invalid_argument("reverb delay must be >= 0");
  const auto spacing = static_cast<std::size_t>(std::lround(delay_ms * w.sample_rate / 1000.0));
  const std::size_t n = w.size();
  std::vector<double> acc(n + static_cast<std::size_t>(echoes) * spacing, 0.0);
  double amp = 1.0;
  for (int k = 0; k <= echoes; ++k, amp *= tau) {
    const std::size_t shift = static_cast<std::size_t>(k) * spacing;
    for (std::size_t i = 0; i < n; ++i) acc[i + shift] += amp * w.samples[i];
  }
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples.assign(acc.begin(), acc.end());
  return out;
}

Waveform clip(const Waveform& w, ClipMode mode, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("clip threshold must be > 0");
  Waveform out = w;
  const auto th = static_cast<float>(threshold);
  switch (mode) {
    case ClipMode::kNone:
      break;
    case ClipMode::kHard:
      for (auto& v : out.samples) v = std::clamp(v, -th, th);
      break;
    case ClipMode::kSoft:
      for (auto& v : out.samples) v = static_cast<float>(threshold * std::tanh(v / threshold));
      break;
  }
  return out;
}

std::vector<float> resample_linear(std::span<const float> x, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw std::invalid_argument("resample step must be positive");
  const auto n_out = static_cast<std::size_t>(std::lround(static_cast<double>(x.size()) / step));
  std::vector<float> out(n_out, 0.0f);
  if (x.empty()) return out;
  for (std::size_t m = 0; m < n_out; ++m) {
    const double pos = static_cast<double>(m) * step;
    const auto i = static_cast<std::size_t>(pos);
    if (i + 1 < x.size()) {
      const double frac = pos - static_cast<double>(i);
      out[m] = static_cast<float>(x[i] + frac * (static_cast<double>(x[i + 1]) - x[i]));
    } else {
      out[m] = x.back();
    }
  }
  return out;
}

Waveform resample_drift(const Waveform& w, double factor) {
  if (!(factor >= 0.9 && factor <= 1.1)) throw std::invalid_argument("drift factor must lie in [0.9, 1.1]");
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples = resample_linear(w.samples, factor);
  return out;
}

Waveform gain(const Waveform& w, double db) {
  require_finite(db, "gain");
  const double g = std::pow(10.0, db / 20.0);
  Waveform out = w;
  for (auto& v : out.samples) v = static_cast<float>(v * g);
  return out;
}

Waveform parametric_eq(const Waveform& w, double center_hz, double gain_db, double q) {
  require_finite(center_hz, "eq center");
  require_finite(gain_db, "eq gain");
  require_finite(q, "eq q");
  if (!(center_hz > 0.0 && center_hz < w.sample_rate / 2.0))
    throw std::invalid_argument("eq center must lie in (0, sample_rate/2)");
  if (!(q > 0.0)) throw std::invalid_argument("eq q must be > 0");

  const double a = std::pow(10.0, gain_db / 40.0);
  const double w0 = 2.0 * std::numbers::pi * center_hz / w.sample_rate;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double cw = std::cos(w0);
  const double a0 = 1.0 + alpha / a;
  const double b0 = (1.0 + alpha * a) / a0, b1 = -2.0 * cw / a0, b2 = (1.0 - alpha * a) / a0;
  const double a1 = -2.0 * cw / a0, a2 = (1.0 - alpha / a) / a0;

  Waveform out = w;
  double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
  for (auto& v : out.samples) {
    const double x0 = v;
    const double y0 = b0 * x0 + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1;
    x1 = x0;
    y2 = y1;
    y1 = y0;
    v = static_cast<float>(y0);
  }
  return out;
}

void ChannelConfig::validate() const {
  require_range(gain.min_db, gain.max_db, "gain range");
  require_range(eq.center_min_hz, eq.center_max_hz, "eq center range");
  require_range(eq.gain_min_db, eq.gain_max_db, "eq gain range");
  require_range(eq.q_min, eq.q_max, "eq q range");
  if (eq.enabled && (eq.center_min_hz <= 0.0 || eq.q_min <= 0.0))
    throw std::invalid_argument("eq center and q must be positive");
  if (!(reverb.tau > 0.0 && reverb.tau < 1.0)) throw std::invalid_argument("reverb tau must lie in (0, 1)");
  require_finite(reverb.delay_ms, "reverb delay");
  if (reverb.delay_ms < 0.0) throw std::invalid_argument("reverb delay must be >= 0");
  if (!(clip.threshold > 0.0)) throw std::invalid_argument("clip threshold must be > 0");
  require_range(drift.min_factor, drift.max_factor, "drift range");
  if (drift.min_factor < 0.9 || drift.max_factor > 1.1)
    throw std::invalid_argument("drift factors must lie in [0.9, 1.1]");
  require_range(noise.snr_min_db, noise.snr_max_db, "noise snr range");
}

bool ChannelConfig::is_identity() const {
  return !gain.enabled && !eq.enabled && !reverb.enabled && clip.mode == ClipMode::kNone &&
         !drift.enabled && !noise.enabled;
}

ChannelConfig ChannelConfig::combined() {
  ChannelConfig c;
  c.gain.enabled = true;
  c.eq.enabled = true;
  c.reverb.enabled = true;
  c.clip.mode = ClipMode::kHard;
  c.drift.enabled = true;
  c.noise.enabled = true;
  c.noise.kind = NoiseKind::kMixed;
  return c;
}

nlohmann::json to_json(const ChannelConfig& c) {
  return {
      {"gain", {{"enabled", c.gain.enabled}, {"min_db", c.gain.min_db}, {"max_db", c.gain.max_db}}},
      {"eq",
       {{"enabled", c.eq.enabled},
        {"center_min_hz", c.eq.center_min_hz},
        {"center_max_hz", c.eq.center_max_hz},
        {"gain_min_db", c.eq.gain_min_db},
        {"gain_max_db", c.eq.gain_max_db},
        {"q_min", c.eq.q_min},
        {"q_max", c.eq.q_max}}},
      {"reverb", {{"enabled", c.reverb.enabled}, {"tau", c.reverb.tau}, {"delay_ms", c.reverb.delay_ms}}},
      {"clip", {{"mode", to_string(c.clip.mode)}, {"threshold", c.clip.threshold}}},
      {"drift",
       {{"enabled", c.drift.enabled}, {"min_factor", c.drift.min_factor}, {"max_factor", c.drift.max_factor}}},
      {"noise",
       {{"enabled", c.noise.enabled},
        {"kind", to_string(c.noise.kind)},
        {"snr_min_db", c.noise.snr_min_db},
        {"snr_max_db", c.noise.snr_max_db}}},
  };
}

ChannelConfig channel_config_from_json(const nlohmann::json& j, ChannelConfig c) {
  auto read = [&](const char* stage, const char* key, auto& field) {
    if (j.contains(stage) && j.at(stage).contains(key)) j.at(stage).at(key).get_to(field);
  };
  read("gain", "enabled", c.gain.enabled);
  read("gain", "min_db", c.gain.min_db);
  read("gain", "max_db", c.gain.max_db);
  read("eq", "enabled", c.eq.enabled);
  read("eq", "center_min_hz", c.eq.center_min_hz);
  read("eq", "center_max_hz", c.eq.center_max_hz);
  read("eq", "gain_min_db", c.eq.gain_min_db);
  read("eq", "gain_max_db", c.eq.gain_max_db);
  read("eq", "q_min", c.eq.q_min);
  read("eq", "q_max", c.eq.q_max);
  read("reverb", "enabled", c.reverb.enabled);
  read("reverb", "tau", c.reverb.tau);
  read("reverb", "delay_ms", c.reverb.delay_ms);
  read("clip", "threshold", c.clip.threshold);
  read("drift", "enabled", c.drift.enabled);
  read("drift", "min_factor", c.drift.min_factor);
  read("drift", "max_factor", c.drift.max_factor);
  read("noise", "enabled", c.noise.enabled);
  read("noise", "snr_min_db", c.noise.snr_min_db);
  read("noise", "snr_max_db", c.noise.snr_max_db);
  if (j.contains("clip") && j.at("clip").contains("mode"))
    c.clip.mode = clip_mode_from_string(j.at("clip").at("mode").get<std::string>());
  if (j.contains("noise") && j.at("noise").contains("kind"))
    c.noise.kind = noise_kind_from_string(j.at("noise").at("kind").get<std::string>());
  c.validate();
  return c;
}

nlohmann::json to_json(const ChannelDraw& d) {
  auto opt = [](const auto& v) -> nlohmann::json {
    if (!v) return nullptr;
    return *v;
  };
  nlohmann::json j;
  j["seed"] = d.seed;
  j["gain_db"] = opt(d.gain_db);
  j["eq"] = d.eq_center_hz ? nlohmann::json{{"center_hz", *d.eq_center_hz}, {"gain_db", *d.eq_gain_db}, {"q", *d.eq_q}}
                           : nlohmann::json(nullptr);
  j["reverb"] = d.reverb_tau ? nlohmann::json{{"tau", *d.reverb_tau}, {"delay_ms", *d.reverb_delay_ms}}
                             : nlohmann::json(nullptr);
  j["clip"] = d.clip_mode ? nlohmann::json{{"mode", to_string(*d.clip_mode)}, {"threshold", *d.clip_threshold}}
                          : nlohmann::json(nullptr);
  j["drift_factor"] = opt(d.drift_factor);
  j["noise"] = d.noise_kind ? nlohmann::json{{"kind", to_string(*d.noise_kind)}, {"snr_db", *d.noise_snr_db}}
                            : nlohmann::json(nullptr);
  return j;
}

Waveform apply_channel(const Waveform& w, const ChannelConfig& cfg, Rng& rng, ChannelDraw* record) {
  cfg.validate();
  ChannelDraw d;
  d.seed = rng.seed();
  if (cfg.gain.enabled) d.gain_db = draw(rng, cfg.gain.min_db, cfg.gain.max_db);
  if (cfg.eq.enabled) {
    d.eq_center_hz = draw(rng, cfg.eq.center_min_hz, cfg.eq.center_max_hz);
    d.eq_gain_db = draw(rng, cfg.eq.gain_min_db, cfg.eq.gain_max_db);
    d.eq_q = draw(rng, cfg.eq.q_min, cfg.eq.q_max);
  }
  if (cfg.reverb.enabled) {
    d.reverb_tau = cfg.reverb.tau;
    d.reverb_delay_ms = cfg.reverb.delay_ms;
  }
  if (cfg.clip.mode != ClipMode::kNone) {
    d.clip_mode = cfg.clip.mode;
    d.clip_threshold = cfg.clip.threshold;
  }
  if (cfg.drift.enabled) d.drift_factor = draw(rng, cfg.drift.min_factor, cfg.drift.max_factor);
  if (cfg.noise.enabled) {
    d.noise_kind = cfg.noise.kind;
    d.noise_snr_db = draw(rng, cfg.noise.snr_min_db, cfg.noise.snr_max_db);
  }

  Waveform out = w;
  if (d.gain_db) out = gain(out, *d.gain_db);
  if (d.eq_center_hz) out = parametric_eq(out, *d.eq_center_hz, *d.eq_gain_db, *d.eq_q);
  if (d.reverb_tau) out = reverb(out, *d.reverb_tau, *d.reverb_delay_ms);
  if (d.clip_mode) out = clip(out, *d.clip_mode, *d.clip_threshold);
  if (d.drift_factor) out = resample_drift(out, *d.drift_factor);
  if (d.noise_kind) out = add_noise(out, *d.noise_kind, *d.noise_snr_db, rng);

  if (record) *record = d;
  return out;
}

void MelAugConfig::validate() const {
  if (std::isnan(snr_db)) throw std::invalid_argument("mel snr must not be NaN");
  if (freq_mask < 0 || time_mask < 0 || blur_width < 0 || max_shift < 0)
    throw std::invalid_argument("mel augmentation widths must be >= 0");
}

MelSpectrogram circular_shift(const MelSpectrogram& m, long long shift) {
  const long long t = m.frames();
  if (t == 0) return m;
  shift %= t;
  if (shift < 0) shift += t;
  MelSpectrogram out = m;
  for (long long c = 0; c < t; ++c) out.values.col((c + shift) % t) = m.values.col(c);
  return out;
}

MelSpectrogram mel_augment(const MelSpectrogram& m, const MelAugConfig& cfg, Rng& rng) {
  cfg.validate();
  MelSpectrogram out = m;
  auto& v = out.values;
  const Eigen::Index rows = v.rows(), cols = v.cols();

  if (std::isfinite(cfg.snr_db) && v.size() > 0) {
    const double p = v.array().square().mean();
    if (p > 0.0) {
      const double sigma = std::sqrt(p / std::pow(10.0, cfg.snr_db / 10.0));
      for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r) v(r, c) = std::max(0.0, v(r, c) + sigma * rng.gaussian());
    }
  }
  if (cfg.freq_mask > 0 && rows > 0) {
    const auto width = rng.uniform_int(0, std::min<Eigen::Index>(cfg.freq_mask, rows));
    const auto start = rng.uniform_int(0, rows - width);
    v.middleRows(start, width).setZero();
  }
  if (cfg.time_mask > 0 && cols > 0) {
    const auto width = rng.uniform_int(0, std::min<Eigen::Index>(cfg.time_mask, cols));
    const auto start = rng.uniform_int(0, cols - width);
    v.middleCols(start, width).setZero();
  }
  if (cfg.blur_width > 1 && cols > 0) {
    const Eigen::MatrixXd src = v;
    const Eigen::Index back = (cfg.blur_width - 1) / 2, ahead = cfg.blur_width / 2;
    for (Eigen::Index c = 0; c < cols; ++c) {
      const Eigen::Index lo = std::max<Eigen::Index>(0, c - back);
      const Eigen::Index hi = std::min<Eigen::Index>(cols - 1, c + ahead);
      v.col(c) = src.middleCols(lo, hi - lo + 1).rowwise().mean();
    }
  }
  if (cfg.max_shift > 0) out = circular_shift(out, rng.uniform_int(-cfg.max_shift, cfg.max_shift));
  return out;
}

}  // namespace tonelink
