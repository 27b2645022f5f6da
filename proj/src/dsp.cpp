// Copyright 2026 The tonelink Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tonelink/dsp.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <tuple>

#include "tonelink/fft.hpp"

namespace tonelink {

void MelConfig::validate() const {
  if (sample_rate <= 0) throw std::invalid_argument("sample_rate must be positive");
  if (n_fft < 2 || n_fft % 2 != 0) throw std::invalid_argument("n_fft must be even and >= 2");
  if (hop < 1 || hop > n_fft) throw std::invalid_argument("hop must be in [1, n_fft]");
  if (n_mels < 1) throw std::invalid_argument("n_mels must be >= 1");
  if (fmin_hz < 0.0 || fmin_hz >= fmax_hz) throw std::invalid_argument("need 0 <= fmin < fmax");
  if (fmax_hz > sample_rate / 2.0) throw std::invalid_argument("fmax must not exceed sample_rate/2");
  if (power != 1 && power != 2) throw std::invalid_argument("power must be 1 or 2");
}

nlohmann::json to_json(const MelConfig& c) {
  return {{"sample_rate", c.sample_rate}, {"n_fft", c.n_fft}, {"hop", c.hop},
          {"n_mels", c.n_mels},           {"fmin_hz", c.fmin_hz}, {"fmax_hz", c.fmax_hz},
          {"power", c.power},             {"compression", "log1p"}};
}

MelConfig mel_config_from_json(const nlohmann::json& j) {
  MelConfig c;
  c.sample_rate = j.value("sample_rate", c.sample_rate);
  c.n_fft = j.value("n_fft", c.n_fft);
  c.hop = j.value("hop", c.hop);
  c.n_mels = j.value("n_mels", c.n_mels);
  c.fmin_hz = j.value("fmin_hz", c.fmin_hz);
  c.fmax_hz = j.value("fmax_hz", c.fmax_hz);
  c.power = j.value("power", c.power);
  c.validate();
  return c;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

namespace {

std::vector<double> mel_edges(const MelConfig& cfg) {
  const double lo = hz_to_mel(cfg.fmin_hz);
  const double hi = hz_to_mel(cfg.fmax_hz);
  std::vector<double> edges(static_cast<std::size_t>(cfg.n_mels) + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(edges.size() - 1));
  return edges;
}

std::size_t reflect_index(long long i, std::size_t n) {
  if (n == 1) return 0;
  const long long period = 2 * (static_cast<long long>(n) - 1);
  i %= period;
  if (i < 0) i += period;
  if (i >= static_cast<long long>(n)) i = period - i;
  return static_cast<std::size_t>(i);
}

// Frame t of a signal that is already padded: columns are rfft(w * x[t*hop ...]).
Eigen::MatrixXcd stft_frames(std::span<const double> padded, std::size_t frames,
                             const std::vector<double>& window, int hop) {
  const std::size_t n = window.size();
  const auto& fft = real_fft(n);
  Eigen::MatrixXcd out(static_cast<Eigen::Index>(fft.bins()), static_cast<Eigen::Index>(frames));
  std::vector<double> buf(n);
  std::vector<std::complex<double>> spec(fft.bins());
  for (std::size_t t = 0; t < frames; ++t) {
    const std::size_t start = t * static_cast<std::size_t>(hop);
    for (std::size_t i = 0; i < n; ++i) buf[i] = padded[start + i] * window[i];
    fft.forward(buf, spec);
    std::copy(spec.begin(), spec.end(), out.col(static_cast<Eigen::Index>(t)).data());
  }
  return out;
}

// Least-squares inverse of stft_frames: sum_t w * irfft(X_t) / sum_t w^2.
void istft_frames(const Eigen::MatrixXcd& spec, const std::vector<double>& window, int hop,
                  const std::vector<double>& window_sq_sum, std::vector<double>& out) {
  const std::size_t n = window.size();
  const auto& fft = real_fft(n);
  std::fill(out.begin(), out.end(), 0.0);
  std::vector<double> buf(n);
  for (Eigen::Index t = 0; t < spec.cols(); ++t) {
    fft.inverse(std::span<const std::complex<double>>(spec.col(t).data(), fft.bins()), buf);
    const std::size_t start = static_cast<std::size_t>(t) * static_cast<std::size_t>(hop);
    for (std::size_t i = 0; i < n; ++i) out[start + i] += window[i] * buf[i];
  }
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = window_sq_sum[i] > 1e-12 ? out[i] * scale / window_sq_sum[i] : 0.0;
}

}  // namespace

std::vector<double> mel_center_frequencies(const MelConfig& cfg) {
  cfg.validate();
  auto edges = mel_edges(cfg);
  return {edges.begin() + 1, edges.end() - 1};
}

Eigen::MatrixXd mel_filterbank(const MelConfig& cfg) {
  cfg.validate();
  const auto edges = mel_edges(cfg);
  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(cfg.n_mels, cfg.bins());
  for (int m = 0; m < cfg.n_mels; ++m) {
    const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
    for (int k = 0; k < cfg.bins(); ++k) {
      const double f = static_cast<double>(k) * cfg.sample_rate / cfg.n_fft;
      const double rise = (f - left) / (center - left);
      const double fall = (right - f) / (right - center);
      fb(m, k) = std::max(0.0, std::min(rise, fall));
    }
  }
  return fb;
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& a, double rcond) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double cutoff = s.size() > 0 ? rcond * s.maxCoeff() : 0.0;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > cutoff) inv(i) = 1.0 / s(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

const MelBasis& mel_basis(const MelConfig& cfg) {
  using Key = std::tuple<int, int, int, int, double, double>;
  static std::mutex mutex;
  static std::map<Key, std::unique_ptr<MelBasis>> cache;
  const Key key{cfg.sample_rate, cfg.n_fft, cfg.hop, cfg.n_mels, cfg.fmin_hz, cfg.fmax_hz};
  std::lock_guard lock(mutex);
  auto& slot = cache[key];
  if (!slot) {
    auto fb = mel_filterbank(cfg);
    auto inv = pseudo_inverse(fb);
    slot = std::make_unique<MelBasis>(MelBasis{std::move(fb), std::move(inv)});
  }
  return *slot;
}

std::vector<double> hann_window(int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
  return w;
}

Eigen::MatrixXd stft_magnitude(std::span<const float> x, const MelConfig& cfg) {
  cfg.validate();
  const std::size_t half = static_cast<std::size_t>(cfg.n_fft / 2);
  const std::size_t frames = x.size() / static_cast<std::size_t>(cfg.hop) + 1;
  std::vector<double> padded(x.size() + 2 * half, 0.0);
  if (!x.empty()) {
    for (std::size_t i = 0; i < padded.size(); ++i)
      padded[i] = x[reflect_index(static_cast<long long>(i) - static_cast<long long>(half), x.size())];
  }
  return stft_frames(padded, frames, hann_window(cfg.n_fft), cfg.hop).cwiseAbs();
}

MelSpectrogram mel_spectrogram(const Waveform& w, const MelConfig& cfg) {
  if (w.sample_rate != cfg.sample_rate)
    throw std::invalid_argument("waveform sample rate " + std::to_string(w.sample_rate) +
                                " does not match mel config " + std::to_string(cfg.sample_rate));
  Eigen::MatrixXd mag = stft_magnitude(w.samples, cfg);
  if (cfg.power == 2) mag = mag.array().square();
  MelSpectrogram m;
  m.config = cfg;
  m.values = (mel_basis(cfg).filterbank * mag).array().log1p();
  return m;
}

GriffinLimResult griffin_lim_magnitude(const Eigen::MatrixXd& magnitude, const MelConfig& cfg,
                                       int iters) {
  cfg.validate();
  if (iters < 1) throw std::invalid_argument("griffin_lim needs iters >= 1");
  if (magnitude.rows() != cfg.bins()) throw std::invalid_argument("magnitude has wrong bin count");
  if (!magnitude.allFinite()) throw std::invalid_argument("magnitude must be finite");

  const std::size_t n = static_cast<std::size_t>(cfg.n_fft);
  const std::size_t frames = static_cast<std::size_t>(std::max<Eigen::Index>(magnitude.cols(), 1));
  const Eigen::MatrixXd target =
      magnitude.cols() > 0 ? magnitude : Eigen::MatrixXd::Zero(cfg.bins(), 1);
  const auto window = hann_window(cfg.n_fft);

  // Iterate on the padded-domain signal so STFT and its LS inverse are an
  // exact projection pair; trimming happens once at the end.
  const std::size_t padded_len = n + (frames - 1) * static_cast<std::size_t>(cfg.hop);
  std::vector<double> wsq(padded_len, 0.0);
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t i = 0; i < n; ++i) wsq[t * cfg.hop + i] += window[i] * window[i];

  const double target_norm = target.norm();
  Eigen::MatrixXcd estimate = target.cast<std::complex<double>>();
  std::vector<double> signal(padded_len);
  GriffinLimResult result;
  result.residuals.reserve(static_cast<std::size_t>(iters));

  for (int k = 0; k < iters; ++k) {
    istft_frames(estimate, window, cfg.hop, wsq, signal);
    const Eigen::MatrixXcd rebuilt = stft_frames(signal, frames, window, cfg.hop);
    const Eigen::MatrixXd rebuilt_mag = rebuilt.cwiseAbs();
    result.residuals.push_back(target_norm > 0.0 ? (rebuilt_mag - target).norm() / target_norm : 0.0);
    for (Eigen::Index c = 0; c < estimate.cols(); ++c) {
      for (Eigen::Index r = 0; r < estimate.rows(); ++r) {
        const double a = rebuilt_mag(r, c);
        const std::complex<double> phase = a > 1e-12 ? rebuilt(r, c) / a : std::complex<double>(1.0, 0.0);
        estimate(r, c) = target(r, c) * phase;
      }
    }
  }
  istft_frames(estimate, window, cfg.hop, wsq, signal);

  const std::size_t half = n / 2;
  const std::size_t out_len = static_cast<std::size_t>(magnitude.cols() > 0 ? magnitude.cols() - 1 : 0) *
                              static_cast<std::size_t>(cfg.hop);
  double pk = 0.0;
  for (std::size_t i = 0; i < out_len; ++i) pk = std::max(pk, std::abs(signal[half + i]));
  const double scale = pk > kGriffinLimPeak ? kGriffinLimPeak / pk : 1.0;

  result.wave.sample_rate = cfg.sample_rate;
  result.wave.samples.resize(out_len);
  for (std::size_t i = 0; i < out_len; ++i)
    result.wave.samples[i] = static_cast<float>(signal[half + i] * scale);
  return result;
}

GriffinLimResult griffin_lim_detailed(const MelSpectrogram& m, int iters) {
  const auto& cfg = m.config;
  cfg.validate();
  if (m.n_mels() != cfg.n_mels) throw std::invalid_argument("mel rows do not match config n_mels");
  if (!m.values.allFinite()) throw std::invalid_argument("mel values must be finite");
  Eigen::MatrixXd mel_linear = m.values.array().exp() - 1.0;
  mel_linear = mel_linear.cwiseMax(0.0);
  if (cfg.power == 2) mel_linear = mel_linear.array().sqrt();
  const Eigen::MatrixXd magnitude = (mel_basis(cfg).inverse * mel_linear).cwiseMax(0.0);
  return griffin_lim_magnitude(magnitude, cfg, iters);
}

Waveform griffin_lim(const MelSpectrogram& m, int iters) { return griffin_lim_detailed(m, iters).wave; }

double roundtrip_consistency(const MelSpectrogram& m, int iters) {
  const auto back = mel_spectrogram(griffin_lim(m, iters), m.config);
  const Eigen::Index rows = m.n_mels();
  const Eigen::Index cols = std::max(m.frames(), back.frames());
  if (rows == 0 || cols == 0) return 0.0;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, cols);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(rows, cols);
  a.leftCols(m.frames()) = m.values;
  b.leftCols(back.frames()) = back.values;
  return (a - b).cwiseAbs().mean();
}

SpectralDiagnostics spectral_diagnostics(const MelSpectrogram& m, double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("spectral_diagnostics needs lo < hi");
  SpectralDiagnostics d;
  const Eigen::Index frames = m.frames();
  if (frames == 0 || m.n_mels() == 0) return d;

  for (Eigen::Index t = 0; t < frames; ++t) {
    const double e = m.values.col(t).mean();
    d.energy_violation += std::max(0.0, lo - e) + std::max(0.0, e - hi);
  }
  d.energy_violation /= static_cast<double>(frames);

  if (frames > 1) {
    for (Eigen::Index t = 0; t + 1 < frames; ++t)
      d.total_variation += (m.values.col(t + 1) - m.values.col(t)).cwiseAbs().sum();
    d.total_variation /= static_cast<double>(frames - 1);
  }

  const auto first_high = static_cast<Eigen::Index>(std::floor(kHighbandStart * static_cast<double>(m.n_mels())));
  const double total = m.values.sum();
  if (total > 0.0)
    d.highband_fraction = m.values.bottomRows(m.n_mels() - first_high).sum() / total;
  return d;
}

std::vector<std::uint8_t> encode_mel_binary(const MelSpectrogram& m) {
  const auto rows = static_cast<std::uint64_t>(m.n_mels());
  const auto cols = static_cast<std::uint64_t>(m.frames());
  std::vector<std::uint8_t> out;
  out.reserve(16 + rows * cols * 4);
  auto put = [&](std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
  };
  put(rows, 8);
  put(cols, 8);
  for (Eigen::Index r = 0; r < m.n_mels(); ++r) {
    for (Eigen::Index c = 0; c < m.frames(); ++c) {
      const auto f = static_cast<float>(m.values(r, c));
      std::uint32_t bits;
      std::memcpy(&bits, &f, 4);
      put(bits, 4);
    }
  }
  return out;
}

Eigen::MatrixXd decode_mel_binary(std::span<const std::uint8_t> b) {
  if (b.size() < 16) throw std::runtime_error("mel file shorter than header");
  auto get = [&](std::size_t at, int bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(b[at + i]) << (8 * i);
    return v;
  };
  const std::uint64_t rows = get(0, 8), cols = get(8, 8);
  if (b.size() != 16 + rows * cols * 4) throw std::runtime_error("mel file size does not match header");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::size_t at = 16;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    for (Eigen::Index c = 0; c < out.cols(); ++c, at += 4) {
      const auto bits = static_cast<std::uint32_t>(get(at, 4));
      float f;
      std::memcpy(&f, &bits, 4);
      out(r, c) = f;
    }
  }
  return out;
}

void write_mel(const std::filesystem::path& path, const MelSpectrogram& m) {
  const auto bytes = encode_mel_binary(m);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  std::ofstream side(path.string() + ".json");
  if (!side) throw std::runtime_error("cannot write sidecar for: " + path.string());
  side << to_json(m.config).dump(2) << '\n';
}

MelSpectrogram read_mel(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  MelSpectrogram m;
  m.values = decode_mel_binary(bytes);
  const std::filesystem::path side = path.string() + ".json";
  if (std::filesystem::exists(side)) {
    std::ifstream s(side);
    m.config = mel_config_from_json(nlohmann::json::parse(s));
  }
  if (m.n_mels() != m.config.n_mels) throw std::runtime_error("mel rows do not match config n_mels");
  return m;
}

}  // namespace tonelink
