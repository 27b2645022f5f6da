// Copyright 2026 The tonelink Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tonelink/receiver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "tonelink/channel.hpp"
#include "tonelink/fft.hpp"
#include "tonelink/synth.hpp"

namespace tonelink {

TemplateBank::TemplateBank(std::vector<std::vector<float>> templates, int sample_rate)
    : templates_(std::move(templates)), sample_rate_(sample_rate) {
  if (templates_.empty()) throw std::invalid_argument("template bank is empty");
  chip_len_ = templates_.front().size();
  if (chip_len_ == 0) throw std::invalid_argument("templates must be non-empty");
  for (const auto& t : templates_)
    if (t.size() != chip_len_) throw std::invalid_argument("templates must share one length");

  matrix_.resize(static_cast<Eigen::Index>(chip_len_), static_cast<Eigen::Index>(templates_.size()));
  for (std::size_t j = 0; j < templates_.size(); ++j)
    std::copy(templates_[j].begin(), templates_[j].end(), matrix_.col(static_cast<Eigen::Index>(j)).data());

  block_size_ = next_pow2(4 * chip_len_);
  const auto& fft = real_fft_f(block_size_);
  AlignedVector<float> buf(block_size_, 0.0f);
  conj_spectra_.reserve(templates_.size());
  for (const auto& t : templates_) {
    std::fill(buf.begin(), buf.end(), 0.0f);
    std::copy(t.begin(), t.end(), buf.begin());
    AlignedVector<std::complex<float>> spec(fft.bins());
    fft.forward(buf, spec);
    for (auto& c : spec) c = std::conj(c);
    conj_spectra_.push_back(std::move(spec));
  }
}

TemplateBank build_template_bank(const Vocab& v, int sample_rate) {
  std::vector<std::vector<float>> templates;
  templates.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    auto chip = synth_chip(chip_spec(TokenId(static_cast<std::uint8_t>(i))), sample_rate);
    const double norm = std::sqrt(energy(chip.samples));
    for (auto& s : chip.samples) s = static_cast<float>(s / norm);
    templates.push_back(std::move(chip.samples));
  }
  return TemplateBank(std::move(templates), sample_rate);
}

void DecodeOptions::validate() const {
  if (std::find(drift_search.begin(), drift_search.end(), 1.0) == drift_search.end())
    throw std::invalid_argument("drift_search must contain 1.0");
  for (double r : drift_search)
    if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("drift candidates must be positive");
  if (!(score_floor >= 0.0 && score_floor < 1.0)) throw std::invalid_argument("score_floor must lie in [0, 1)");
}

namespace {

// Best normalized correlation over the bank at every lag in [0, len - L].
std::vector<double> best_score_per_lag(std::span<const float> x, const TemplateBank& bank) {
  const std::size_t L = bank.chip_len();
  const std::size_t lags = x.size() - L + 1;
  const std::size_t block = bank.block_size();
  const std::size_t step = block - L + 1;
  const auto& fft = real_fft_f(block);

  std::vector<double> prefix(x.size() + 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) prefix[i + 1] = prefix[i] + static_cast<double>(x[i]) * x[i];

  std::vector<float> best(lags, -std::numeric_limits<float>::infinity());
  AlignedVector<float> seg(block), corr(block);
  AlignedVector<std::complex<float>> spec(fft.bins()), prod(fft.bins());
  for (std::size_t start = 0; start < lags; start += step) {
    std::fill(seg.begin(), seg.end(), 0.0f);
    const std::size_t avail = std::min(block, x.size() - start);
    std::copy(x.begin() + static_cast<std::ptrdiff_t>(start),
              x.begin() + static_cast<std::ptrdiff_t>(start + avail), seg.begin());
    fft.forward(seg, spec);
    const std::size_t valid = std::min(step, lags - start);
    for (const auto& tspec : bank.conj_spectra()) {
      // Written out so the compiler does not emit the NaN-safe complex multiply.
      for (std::size_t k = 0; k < spec.size(); ++k) {
        const float ar = spec[k].real(), ai = spec[k].imag(), br = tspec[k].real(), bi = tspec[k].imag();
        prod[k] = {ar * br - ai * bi, ar * bi + ai * br};
      }
      fft.inverse_inplace(prod, corr);
      for (std::size_t t = 0; t < valid; ++t) best[start + t] = std::max(best[start + t], corr[t]);
    }
  }
  const double scale = 1.0 / static_cast<double>(block);
  std::vector<double> out(lags);
  for (std::size_t t = 0; t < lags; ++t) {
    const double e = prefix[t + L] - prefix[t];
    out[t] = e > 1e-20 ? best[t] * scale / std::sqrt(e) : 0.0;
  }
  return out;
}

struct Hypothesis {
  TokenSeq tokens;
  std::vector<double> scores;
  double mean = -std::numeric_limits<double>::infinity();
};

Hypothesis decode_grid(std::span<const float> z, const TemplateBank& bank, double floor) {
  const auto L = static_cast<Eigen::Index>(bank.chip_len());
  const auto windows = static_cast<Eigen::Index>(z.size()) / L;
  Hypothesis h;
  if (windows == 0) return h;
  // Windows are contiguous, so the grid is a column-major [L x windows] view.
  const Eigen::Map<const Eigen::MatrixXf> grid(z.data(), L, windows);
  const Eigen::MatrixXf corr = bank.matrix().transpose() * grid;
  h.tokens.reserve(static_cast<std::size_t>(windows));
  h.scores.reserve(static_cast<std::size_t>(windows));
  double total = 0.0;
  for (Eigen::Index i = 0; i < windows; ++i) {
    const double norm = grid.col(i).cast<double>().norm();
    Eigen::Index arg = 0;
    double score = 0.0;
    if (norm > 1e-10) {
      score = corr.col(i).maxCoeff(&arg) / norm;
    }
    h.tokens.push_back(score < floor ? ids::kUnk : TokenId(static_cast<std::uint8_t>(arg)));
    h.scores.push_back(score);
    total += score;
  }
  h.mean = total / static_cast<double>(windows);
  return h;
}

// Start offset in [0, max_offset] maximizing the summed best correlation
// over the first `chips` chip slots.
std::size_t estimate_offset(std::span<const float> x, const TemplateBank& bank, long long offset_search,
                            std::size_t chips) {
  const std::size_t L = bank.chip_len();
  const std::size_t max_offset =
      std::min<std::size_t>(offset_search < 0 ? L - 1 : static_cast<std::size_t>(offset_search), x.size() - L);
  const std::size_t sync_len = std::min(x.size(), max_offset + chips * L);
  const auto best = best_score_per_lag(x.first(sync_len), bank);
  std::size_t offset = 0;
  double best_sum = -std::numeric_limits<double>::infinity();
  for (std::size_t o = 0; o <= max_offset; ++o) {
    double sum = 0.0;
    for (std::size_t t = o; t < best.size(); t += L) sum += best[t];
    if (sum > best_sum) {
      best_sum = sum;
      offset = o;
    }
  }
  return offset;
}

}  // namespace

DecodeResult decode_detailed(const Waveform& w, const TemplateBank& bank, const DecodeOptions& opts) {
  opts.validate();
  if (w.sample_rate != bank.sample_rate())
    throw std::invalid_argument("waveform sample rate does not match template bank");
  const std::size_t L = bank.chip_len();
  if (w.size() < L) throw std::invalid_argument("message too short");
  const std::span<const float> x(w.samples);

  // A drifted chip barely correlates with its template, so each drift
  // hypothesis is synchronized in its own corrected time base.
  Hypothesis winner;
  double drift = 1.0;
  std::size_t offset = 0;
  for (double r : opts.drift_search) {
    std::vector<float> corrected;
    std::span<const float> z = x;
    if (r != 1.0) {
      corrected = resample_linear(x, 1.0 / r);
      z = corrected;
    }
    if (z.size() < L) continue;
    const std::size_t o = estimate_offset(z, bank, opts.offset_search, kSyncChips);
    Hypothesis h = decode_grid(z.subspan(o), bank, opts.score_floor);
    if (!h.tokens.empty() && h.mean > winner.mean) {
      winner = std::move(h);
      drift = r;
      offset = o;
    }
  }
  if (winner.tokens.empty()) throw std::invalid_argument("message too short");
  Hypothesis& h = winner;

  DecodeResult result;
  result.tokens = std::move(h.tokens);
  result.scores = std::move(h.scores);
  result.mean_score = h.mean;
  result.drift = drift;
  result.offset = static_cast<std::size_t>(std::lround(static_cast<double>(offset) / drift));
  return result;
}

TokenSeq decode(const Waveform& w, const TemplateBank& bank, const DecodeOptions& opts) {
  return decode_detailed(w, bank, opts).tokens;
}

nlohmann::json to_json(const DecodeResult& r, const Vocab& v) {
  nlohmann::json tokens = nlohmann::json::array(), surfaces = nlohmann::json::array();
  for (auto id : r.tokens) {
    tokens.push_back(id.value);
    surfaces.push_back(v.entry(id).surface);
  }
  return {{"tokens", tokens},     {"surfaces", surfaces},       {"text", detokenize(r.tokens, v)},
          {"scores", r.scores},   {"drift", r.drift},           {"offset", r.offset},
          {"mean_score", r.mean_score}};
}

TokenSeq ctc_collapse(const TokenSeq& ids, TokenId blank) {
  TokenSeq out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0 && ids[i] == ids[i - 1]) continue;
    if (ids[i] != blank) out.push_back(ids[i]);
  }
  return out;
}

}  // namespace tonelink
