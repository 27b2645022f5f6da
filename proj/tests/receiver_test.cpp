// Copyright 2026 The tonelink Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tonelink/receiver.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "tonelink/channel.hpp"
#include "tonelink/metrics.hpp"
#include "tonelink/synth.hpp"

using namespace tonelink;

namespace {

const TemplateBank& bank() {
  static const TemplateBank b = build_template_bank(build_vocab());
  return b;
}

TokenSeq random_ids(Rng& r, std::size_t min_len = 3, std::size_t max_len = 40) {
  TokenSeq ids(static_cast<std::size_t>(r.uniform_int(min_len, max_len)));
  for (auto& t : ids) t = TokenId(static_cast<std::uint8_t>(r.uniform_int(0, 127)));
  return ids;
}

double norm(const std::vector<float>& x) {
  double s = 0.0;
  for (float v : x) s += double(v) * v;
  return std::sqrt(s);
}

}  // namespace

TEST(TemplateBank, SizeNormsAndDistinctness) {
  const auto& b = bank();
  ASSERT_EQ(b.size(), 128u);
  EXPECT_EQ(b.chip_len(), 960u);
  for (std::size_t i = 0; i < b.size(); ++i) {
    EXPECT_NEAR(norm(b[i]), 1.0, 1e-6) << i;
    for (std::size_t j = i + 1; j < b.size(); ++j) EXPECT_NE(b[i], b[j]);
  }
}

TEST(TemplateBank, EveryChipCorrelatesBestWithItsOwnTemplate) {
  const auto& b = bank();
  for (std::size_t t = 0; t < 128; ++t) {
    const auto chip = synth_chip(chip_spec(TokenId(static_cast<std::uint8_t>(t))));
    const double n = norm(chip.samples);
    std::size_t best = 0;
    double best_score = -2.0;
    for (std::size_t k = 0; k < 128; ++k) {
      double dot = 0.0;
      for (std::size_t i = 0; i < 960; ++i) dot += double(chip.samples[i]) * b[k][i];
      if (dot / n > best_score) {
        best_score = dot / n;
        best = k;
      }
    }
    EXPECT_EQ(best, t);
    EXPECT_NEAR(best_score, 1.0, 1e-5);
  }
}

TEST(Decode, CleanChannelIsExact) {
  Rng r(2024);
  for (int m = 0; m < 300; ++m) {
    const auto ids = random_ids(r);
    ASSERT_EQ(decode(synth_message(ids), bank()), ids) << "message " << m;
  }
}

TEST(Decode, SingleChipsAndDetails) {
  const TokenSeq ids = {TokenId{42}};
  const auto res = decode_detailed(synth_message(ids), bank());
  EXPECT_EQ(res.tokens, ids);
  EXPECT_EQ(res.offset, 0u);
  EXPECT_DOUBLE_EQ(res.drift, 1.0);
  ASSERT_EQ(res.scores.size(), 1u);
  EXPECT_NEAR(res.scores[0], 1.0, 1e-4);
  const auto j = to_json(res, build_vocab());
  EXPECT_TRUE(j.contains("tokens"));
  EXPECT_TRUE(j.contains("surfaces"));
}

TEST(Decode, SilenceIsUnknown) {
  Waveform z;
  z.samples.assign(960, 0.0f);
  EXPECT_EQ(decode(z, bank()), (TokenSeq{ids::kUnk}));
}

TEST(Decode, TooShortThrows) {
  Waveform w;
  w.samples.assign(959, 0.1f);
  try {
    decode(w, bank());
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_STREQ(e.what(), "message too short");
  }
}

TEST(Decode, SampleRateMismatchThrows) {
  auto w = synth_message({TokenId{7}});
  w.sample_rate = 8000;
  EXPECT_THROW(decode(w, bank()), std::invalid_argument);
}

TEST(Decode, LeadingSilenceIsSkipped) {
  const TokenSeq ids = {TokenId{11}, TokenId{12}, TokenId{90}};
  const auto msg = synth_message(ids);
  Waveform w;
  w.samples.assign(333, 0.0f);
  w.samples.insert(w.samples.end(), msg.samples.begin(), msg.samples.end());
  const auto res = decode_detailed(w, bank());
  EXPECT_EQ(res.offset, 333u);
  EXPECT_EQ(res.tokens, ids);
}

TEST(DecodeOptions, Validation) {
  DecodeOptions o;
  EXPECT_NO_THROW(o.validate());
  o.drift_search = {0.99, 1.01};
  EXPECT_THROW(o.validate(), std::invalid_argument);
  o = {};
  o.score_floor = 1.0;
  EXPECT_THROW(o.validate(), std::invalid_argument);
}

TEST(DecodeProperty, GainInvariance) {
  Rng r(55);
  for (int m = 0; m < 40; ++m) {
    const auto ids = random_ids(r);
    const auto w = synth_message(ids);
    const auto base = decode(w, bank());
    const double g = r.uniform(-12.0, 6.0);
    EXPECT_EQ(decode(gain(w, g), bank()), base) << g;
  }
}

TEST(DecodeProperty, DriftOnSearchGridIsRecovered) {
  Rng r(56);
  for (double factor : {0.99, 0.995, 1.005, 1.01}) {
    for (int m = 0; m < 10; ++m) {
      const auto ids = random_ids(r);
      const auto res = decode_detailed(resample_drift(synth_message(ids), factor), bank());
      EXPECT_EQ(res.tokens, ids) << factor;
      EXPECT_DOUBLE_EQ(res.drift, factor);
    }
  }
}

TEST(DecodeProperty, ExplicitDriftGrid) {
  Rng r(57);
  DecodeOptions o;
  o.drift_search = {0.98, 1.0, 1.02};
  const auto ids = random_ids(r);
  EXPECT_EQ(decode(resample_drift(synth_message(ids), 1.02), bank(), o), ids);
}

TEST(Decode, WhiteNoiseAtZeroDbGivesModerateErrors) {
  const auto& v = build_vocab();
  Rng r(7);
  double total = 0.0;
  const int n = 200;
  for (int m = 0; m < n; ++m) {
    // Printable ids only, so the reference text is never empty.
    TokenSeq ids(static_cast<std::size_t>(r.uniform_int(3, 40)));
    for (auto& t : ids) t = TokenId(static_cast<std::uint8_t>(r.uniform_int(6, 101)));
    Rng noise_rng(derive_seed(7, static_cast<std::uint64_t>(m)));
    const auto noisy = add_noise(synth_message(ids), NoiseKind::kWhite, 0.0, noise_rng);
    total += cer(detokenize(ids, v), detokenize(decode(noisy, bank()), v));
  }
  const double mean = total / n;
  RecordProperty("mean_cer", std::to_string(mean));
  EXPECT_GT(mean, 0.0);
  EXPECT_LT(mean, 0.5);
}

TEST(CtcCollapse, Examples) {
  const TokenId a{6}, b{7}, blank{0};
  EXPECT_EQ(ctc_collapse({a, a, blank, b}), (TokenSeq{a, b}));
  EXPECT_EQ(ctc_collapse({blank, blank}), TokenSeq{});
  EXPECT_EQ(ctc_collapse({a, blank, a}), (TokenSeq{a, a}));
  EXPECT_EQ(ctc_collapse({}), TokenSeq{});
}

TEST(CtcCollapseProperty, IdempotentOnCleanOutput) {
  Rng r(8);
  for (int trial = 0; trial < 500; ++trial) {
    TokenSeq frames(static_cast<std::size_t>(r.uniform_int(0, 30)));
    for (auto& t : frames) t = TokenId(static_cast<std::uint8_t>(r.uniform_int(0, 4)));
    const auto once = ctc_collapse(frames);
    bool clean = true;
    for (std::size_t i = 0; i < once.size(); ++i) {
      EXPECT_NE(once[i], TokenId{0});
      if (i > 0 && once[i] == once[i - 1]) clean = false;
    }
    if (clean) EXPECT_EQ(ctc_collapse(once), once);
  }
}
