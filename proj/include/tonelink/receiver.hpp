// Copyright 2026 The tonelink Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Core>

#include <complex>
#include <memory>
#include <vector>

#include "json.hpp"
#include "tonelink/fft.hpp"
#include "tonelink/vocab.hpp"
#include "tonelink/waveform.hpp"

namespace tonelink {

/// One unit-energy reference chip per token id.
class TemplateBank {
 public:
  TemplateBank(std::vector<std::vector<float>> templates, int sample_rate);

  std::size_t size() const { return templates_.size(); }
  std::size_t chip_len() const { return chip_len_; }
  int sample_rate() const { return sample_rate_; }
  const std::vector<float>& operator[](std::size_t i) const { return templates_[i]; }
  /// Templates as columns, [chip_len x size].
  const Eigen::MatrixXf& matrix() const { return matrix_; }

  /// Conjugated template spectra at the bank's overlap-save block size.
  std::size_t block_size() const { return block_size_; }
  const std::vector<AlignedVector<std::complex<float>>>& conj_spectra() const { return conj_spectra_; }

 private:
  std::vector<std::vector<float>> templates_;
  Eigen::MatrixXf matrix_;
  std::size_t chip_len_;
  int sample_rate_;
  std::size_t block_size_;
  std::vector<AlignedVector<std::complex<float>>> conj_spectra_;
};

TemplateBank build_template_bank(const Vocab& v, int sample_rate = kDefaultSampleRate);

inline constexpr double kDefaultScoreFloor = 0.05;
/// Leading chips examined when estimating the start offset. Six chips plus
/// the offset range fit two overlap-save blocks.
inline constexpr std::size_t kSyncChips = 6;

struct DecodeOptions {
  std::vector<double> drift_search = {0.99, 0.995, 1.0, 1.005, 1.01};
  /// Largest start offset tried, in samples. Negative means chip_len - 1.
  long long offset_search = -1;
  double score_floor = kDefaultScoreFloor;

  /// Throws std::invalid_argument unless 1.0 is a drift candidate and
  /// score_floor lies in [0, 1).
  void validate() const;
};

struct DecodeResult {
  TokenSeq tokens;
  /// Best normalized correlation per window.
  std::vector<double> scores;
  double drift = 1.0;
  /// Start offset in received samples.
  std::size_t offset = 0;
  double mean_score = 0.0;
};

/// Matched-filter decode. Per drift hypothesis: resample, find the global
/// offset by summed correlation, then take the chip-grid argmax over the
/// bank. The hypothesis with the best mean score wins.
/// Windows under score_floor decode to UNK.
/// Throws std::invalid_argument("message too short") below one chip.
DecodeResult decode_detailed(const Waveform& w, const TemplateBank& bank, const DecodeOptions& opts = {});
TokenSeq decode(const Waveform& w, const TemplateBank& bank, const DecodeOptions& opts = {});

nlohmann::json to_json(const DecodeResult& r, const Vocab& v);

/// Greedy CTC rule: merge runs of equal ids, then drop blanks.
TokenSeq ctc_collapse(const TokenSeq& ids, TokenId blank = TokenId{0});

}  // namespace tonelink
