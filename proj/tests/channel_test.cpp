// Copyright 2026 The tonelink Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tonelink/channel.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "test_util.hpp"
#include "tonelink/synth.hpp"

using namespace tonelink;

namespace {

Waveform tone(double hz, std::size_t n, double amp = 0.5) {
  Waveform w;
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    w.samples[i] = static_cast<float>(amp * std::sin(2.0 * std::numbers::pi * hz * i / 16000.0));
  return w;
}

double power(const std::vector<float>& x) {
  double p = 0.0;
  for (float v : x) p += double(v) * v;
  return p / x.size();
}

std::size_t peak_bin(const std::vector<double>& mag) {
  std::size_t arg = 1;
  for (std::size_t k = 1; k < mag.size(); ++k)
    if (mag[k] > mag[arg]) arg = k;
  return arg;
}

}  // namespace

TEST(AddNoise, SnrCalibratedForEveryColor) {
  const auto sig = synth_message({TokenId{8}, TokenId{60}, TokenId{33}, TokenId{90}});
  for (auto kind : {NoiseKind::kWhite, NoiseKind::kPink, NoiseKind::kBrown, NoiseKind::kMixed}) {
    for (double target : {-10.0, 0.0, 5.0, 30.0}) {
      for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng r(seed);
        const auto noisy = add_noise(sig, kind, target, r);
        std::vector<float> diff(sig.size());
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = noisy.samples[i] - sig.samples[i];
        const double measured = 10.0 * std::log10(power(sig.samples) / power(diff));
        ASSERT_NEAR(measured, target, 0.5) << to_string(kind) << " seed " << seed;
      }
    }
  }
}

TEST(AddNoise, SilenceThrows) {
  Waveform z;
  z.samples.assign(100, 0.0f);
  Rng r(1);
  try {
    add_noise(z, NoiseKind::kWhite, 0.0, r);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_STREQ(e.what(), "cannot compute SNR against silence");
  }
}

TEST(MakeNoise, PsdSlopesMatchColor) {
  const struct {
    NoiseKind kind;
    double slope;
  } cases[] = {{NoiseKind::kWhite, 0.0}, {NoiseKind::kPink, -10.0}, {NoiseKind::kBrown, -20.0}};
  for (const auto& c : cases) {
    Rng r(99);
    const auto x = make_noise(c.kind, 1024 * 48, r);
    const auto psd = testutil::welch_psd(x, 1024);
    const double slope = testutil::psd_slope_db_per_decade(psd, 16000.0 / 1024.0, 100.0, 4000.0);
    EXPECT_NEAR(slope, c.slope, 2.0) << to_string(c.kind);
  }
}

TEST(MakeNoise, UnitPowerAndDeterministic) {
  for (auto kind : {NoiseKind::kWhite, NoiseKind::kPink, NoiseKind::kBrown, NoiseKind::kMixed}) {
    Rng a(5), b(5);
    const auto x = make_noise(kind, 8000, a);
    EXPECT_EQ(x, make_noise(kind, 8000, b));
    EXPECT_NEAR(power(x), 1.0, 1e-4);
  }
}

TEST(Reverb, ImpulseResponseTaps) {
  EXPECT_EQ(reverb_echo_count(0.4), 5);
  Waveform imp;
  imp.samples.assign(10, 0.0f);
  imp.samples[0] = 1.0f;
  const auto out = reverb(imp, 0.4, 20.0);
  ASSERT_EQ(out.size(), 10u + 5u * 320u);
  double amp = 1.0;
  for (int k = 0; k <= 5; ++k, amp *= 0.4) EXPECT_NEAR(out.samples[k * 320], amp, 1e-7) << k;
  double rest = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (i % 320 != 0) rest += std::abs(out.samples[i]);
  EXPECT_EQ(rest, 0.0);
}

TEST(Reverb, SmallTauIsNearlyIdentity) {
  const auto w = tone(500, 1000);
  const auto out = reverb(w, 0.005, 20.0);
  EXPECT_EQ(out.samples, w.samples);
}

TEST(Reverb, EnergyNeverDecreases) {
  for (int t = 0; t < 128; ++t) {
    const auto w = synth_message({TokenId(static_cast<std::uint8_t>(t))});
    const auto out = reverb(w, 0.4, 20.0);
    EXPECT_GE(energy(out.samples), energy(w.samples)) << "token " << t;
  }
  EXPECT_THROW(reverb(tone(1, 10), 1.0, 20), std::invalid_argument);
  EXPECT_THROW(reverb(tone(1, 10), 0.0, 20), std::invalid_argument);
}

TEST(Clip, Examples) {
  Waveform w;
  w.samples = {0.8f, -0.8f, 0.0f, 0.3f};
  const auto hard = clip(w, ClipMode::kHard, 0.5);
  EXPECT_EQ(hard.samples, (std::vector<float>{0.5f, -0.5f, 0.0f, 0.3f}));
  const auto soft = clip(w, ClipMode::kSoft, 0.5);
  EXPECT_EQ(soft.samples[2], 0.0f);
  for (float v : soft.samples) EXPECT_LT(std::abs(v), 0.5f);
  EXPECT_EQ(clip(w, ClipMode::kNone, 0.5).samples, w.samples);
  EXPECT_THROW(clip(w, ClipMode::kHard, 0.0), std::invalid_argument);
}

TEST(ClipProperty, HardIsIdempotentSoftStaysBelowThreshold) {
  Rng r(12);
  for (int trial = 0; trial < 50; ++trial) {
    Waveform w;
    w.samples.resize(500);
    for (auto& v : w.samples) v = static_cast<float>(r.uniform(-2, 2));
    // Keeps |x| / th below 8, where tanh is still distinguishable from 1 in float.
    const double th = r.uniform(0.26, 1.5);
    const auto once = clip(w, ClipMode::kHard, th);
    EXPECT_EQ(clip(once, ClipMode::kHard, th).samples, once.samples);
    for (float v : clip(w, ClipMode::kSoft, th).samples) ASSERT_LT(std::abs(v), th);
  }
}

TEST(Drift, LengthAndIdentity) {
  const auto w = tone(440, 960);
  EXPECT_EQ(resample_drift(w, 1.01).size(), 950u);
  EXPECT_EQ(resample_drift(w, 1.0).samples, w.samples);
  EXPECT_THROW(resample_drift(w, 1.2), std::invalid_argument);
}

TEST(Drift, ToneShiftsByFactor) {
  const auto w = resample_drift(tone(3000, 16000), 1.01);
  const auto mag = testutil::naive_dft_magnitude(std::span<const float>(w.samples).subspan(0, 8000));
  EXPECT_NEAR(peak_bin(mag) * 2.0, 3030.0, 2.0);
}

TEST(DriftProperty, InverseResampleRecoversSignal) {
  Rng r(31);
  for (int trial = 0; trial < 20; ++trial) {
    const double f = r.uniform(0.99, 1.01);
    const auto w = synth_message({TokenId(static_cast<std::uint8_t>(r.uniform_int(0, 127))),
                                  TokenId(static_cast<std::uint8_t>(r.uniform_int(0, 127)))});
    const auto back = resample_drift(resample_drift(w, f), 1.0 / f);
    const std::size_t n = std::min(back.size(), w.size());
    double xy = 0, xx = 0, yy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      xy += double(w.samples[i]) * back.samples[i];
      xx += double(w.samples[i]) * w.samples[i];
      yy += double(back.samples[i]) * back.samples[i];
    }
    EXPECT_GT(xy / std::sqrt(xx * yy), 0.99) << f;
  }
}

TEST(Gain, ScalesRms) {
  const auto w = tone(700, 2000);
  EXPECT_NEAR(rms(gain(w, 6.0).samples) / rms(w.samples), 1.995, 1e-3);
  EXPECT_EQ(gain(w, 0.0).samples, w.samples);
}

TEST(ParametricEq, FlatGainIsIdentity) {
  const auto w = synth_message({TokenId{17}, TokenId{88}});
  const auto out = parametric_eq(w, 1200.0, 0.0, 0.9);
  for (std::size_t i = 0; i < w.size(); ++i) ASSERT_NEAR(out.samples[i], w.samples[i], 1e-6);
}

TEST(ParametricEq, BoostsCenterTone) {
  const auto w = tone(1000, 16000);
  const auto boosted = parametric_eq(w, 1000.0, 6.0, 1.0);
  std::vector<float> tail(boosted.samples.begin() + 4000, boosted.samples.end());
  std::vector<float> ref(w.samples.begin() + 4000, w.samples.end());
  EXPECT_NEAR(20 * std::log10(rms(tail) / rms(ref)), 6.0, 0.05);
}

TEST(ApplyChannel, DisabledIsIdentity) {
  const auto w = synth_message({TokenId{9}, TokenId{10}});
  Rng r(4);
  ChannelConfig cfg;
  EXPECT_TRUE(cfg.is_identity());
  EXPECT_EQ(apply_channel(w, cfg, r).samples, w.samples);
}

TEST(ApplyChannel, SameSeedSameOutput) {
  const auto w = synth_message({TokenId{9}, TokenId{10}, TokenId{70}});
  const auto cfg = ChannelConfig::combined();
  Rng a(77), b(77), c(78);
  ChannelDraw da, db;
  const auto x = apply_channel(w, cfg, a, &da);
  const auto y = apply_channel(w, cfg, b, &db);
  EXPECT_EQ(x.samples, y.samples);
  EXPECT_EQ(to_json(da), to_json(db));
  EXPECT_NE(apply_channel(w, cfg, c).samples, x.samples);
}

TEST(ApplyChannel, DrawsStayInsideConfiguredRanges) {
  const auto cfg = ChannelConfig::combined();
  const auto w = synth_message({TokenId{40}});
  for (std::uint64_t s = 0; s < 50; ++s) {
    Rng r(s);
    ChannelDraw d;
    apply_channel(w, cfg, r, &d);
    ASSERT_TRUE(d.gain_db && d.drift_factor && d.noise_snr_db);
    EXPECT_GE(*d.gain_db, cfg.gain.min_db);
    EXPECT_LE(*d.gain_db, cfg.gain.max_db);
    EXPECT_GE(*d.drift_factor, cfg.drift.min_factor);
    EXPECT_LE(*d.drift_factor, cfg.drift.max_factor);
    EXPECT_GE(*d.noise_snr_db, cfg.noise.snr_min_db);
    EXPECT_LE(*d.noise_snr_db, cfg.noise.snr_max_db);
  }
}

TEST(ChannelConfig, JsonRoundTripAndValidation) {
  const auto cfg = ChannelConfig::combined();
  EXPECT_EQ(to_json(channel_config_from_json(to_json(cfg))), to_json(cfg));
  ChannelConfig bad;
  bad.drift.enabled = true;
  bad.drift.max_factor = 1.2;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = {};
  bad.reverb.enabled = true;
  bad.reverb.tau = 1.5;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(MelAugment, ZeroConfigIsIdentity) {
  MelSpectrogram m;
  m.values = Eigen::MatrixXd::Random(40, 12).cwiseAbs();
  Rng r(2);
  EXPECT_EQ(mel_augment(m, {}, r).values, m.values);
}

TEST(MelAugment, FrequencyMaskZeroesOneContiguousBand) {
  MelSpectrogram m;
  m.values = Eigen::MatrixXd::Constant(40, 10, 1.0);
  MelAugConfig cfg;
  cfg.freq_mask = 5;
  for (std::uint64_t s = 0; s < 100; ++s) {
    Rng r(s);
    const auto out = mel_augment(m, cfg, r);
    std::vector<int> zero_rows;
    for (int row = 0; row < 40; ++row) {
      const bool all_zero = (out.values.row(row).array() == 0.0).all();
      const bool untouched = (out.values.row(row).array() == 1.0).all();
      ASSERT_TRUE(all_zero || untouched);
      if (all_zero) zero_rows.push_back(row);
    }
    ASSERT_LE(zero_rows.size(), 5u);
    for (std::size_t i = 1; i < zero_rows.size(); ++i) EXPECT_EQ(zero_rows[i], zero_rows[i - 1] + 1);
  }
}

TEST(MelAugment, FullRotationIsIdentity) {
  MelSpectrogram m;
  m.values = Eigen::MatrixXd::Random(6, 9);
  EXPECT_EQ(circular_shift(m, 9).values, m.values);
  EXPECT_EQ(circular_shift(circular_shift(m, 4), -4).values, m.values);
  EXPECT_EQ(circular_shift(m, 1).values.col(1), m.values.col(0));
}

TEST(MelAugment, DeterministicAndValidated) {
  MelSpectrogram m;
  m.values = Eigen::MatrixXd::Constant(40, 30, 2.0);
  MelAugConfig cfg{10.0, 4, 3, 3, 2};
  Rng a(9), b(9);
  EXPECT_EQ(mel_augment(m, cfg, a).values, mel_augment(m, cfg, b).values);
  cfg.blur_width = -1;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}
