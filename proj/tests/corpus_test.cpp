// Copyright 2026 The tonelink Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tonelink/corpus.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "tonelink/receiver.hpp"
#include "tonelink/synth.hpp"
#include "tonelink/vocab.hpp"

using namespace tonelink;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("tonelink_corpus_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Apportion, LargestRemainder) {
  EXPECT_EQ(apportion(10, kCategoryShares), (std::vector<std::size_t>{6, 2, 1, 1}));
  EXPECT_EQ(apportion(15000, kCategoryShares), (std::vector<std::size_t>{9000, 3000, 1500, 1500}));
  EXPECT_EQ(apportion(7, kSplitShares), (std::vector<std::size_t>{5, 1, 1}));
  EXPECT_EQ(apportion(0, kSplitShares), (std::vector<std::size_t>{0, 0, 0}));
}

TEST(ApportionProperty, SumsAndStaysWithinOne) {
  for (std::size_t n = 10; n < 400; n += 7) {
    const auto c = apportion(n, kCategoryShares);
    std::size_t sum = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      sum += c[i];
      EXPECT_LE(std::abs(static_cast<double>(c[i]) - kCategoryShares[i] * n), 1.0) << n;
    }
    EXPECT_EQ(sum, n);
  }
}

TEST(GenerateText, HitsRequestedTokenLength) {
  const auto& v = build_vocab();
  Rng r(1);
  for (auto cat : {Category::kCommandTemplate, Category::kEnglish, Category::kCommandSeq, Category::kRandomChars}) {
    for (std::size_t len = kMinMessageTokens; len <= kMaxMessageTokens; ++len) {
      const auto text = generate_text(cat, len, r);
      const auto ids = tokenize(text, v);
      EXPECT_EQ(ids.size(), len) << to_string(cat) << " \"" << text << "\"";
      EXPECT_EQ(detokenize(ids, v), text);
    }
  }
}

TEST(GenerateCorpus, MixtureSplitsAndLengths) {
  const auto m = generate_corpus(1000, 7);
  ASSERT_EQ(m.messages.size(), 1000u);
  ASSERT_EQ(m.splits.size(), 1000u);
  std::size_t cats[4] = {}, splits[3] = {};
  for (std::size_t i = 0; i < m.messages.size(); ++i) {
    const auto& msg = m.messages[i];
    EXPECT_EQ(msg.id, i);
    EXPECT_GE(msg.token_len, kMinMessageTokens);
    EXPECT_LE(msg.token_len, kMaxMessageTokens);
    EXPECT_EQ(tokenize(msg.text, build_vocab()).size(), msg.token_len);
    ++cats[static_cast<int>(msg.category)];
    ++splits[static_cast<int>(m.splits[i])];
  }
  for (int c = 0; c < 4; ++c) EXPECT_LE(std::abs(cats[c] - kCategoryShares[c] * 1000), 1.0);
  EXPECT_EQ(splits[0] + splits[1] + splits[2], 1000u);
  for (int s = 0; s < 3; ++s) EXPECT_LE(std::abs(splits[s] - kSplitShares[s] * 1000), 1.0);
}

TEST(GenerateCorpus, MixtureHoldsForSmallSizes) {
  for (std::size_t n : {10u, 11u, 37u, 101u}) {
    const auto m = generate_corpus(n, 3);
    std::size_t cats[4] = {};
    for (const auto& msg : m.messages) ++cats[static_cast<int>(msg.category)];
    for (int c = 0; c < 4; ++c) EXPECT_LE(std::abs(cats[c] - kCategoryShares[c] * n), 1.0) << n;
  }
}

TEST(GenerateCorpus, DeterministicPerSeed) {
  EXPECT_EQ(manifest_to_jsonl(generate_corpus(200, 7)), manifest_to_jsonl(generate_corpus(200, 7)));
  EXPECT_NE(manifest_to_jsonl(generate_corpus(200, 7)), manifest_to_jsonl(generate_corpus(200, 8)));
}

TEST(Manifest, JsonlRoundTrip) {
  const auto m = generate_corpus(50, 11);
  const auto text = manifest_to_jsonl(m);
  const auto back = manifest_from_jsonl(text);
  EXPECT_EQ(manifest_to_jsonl(back), text);
  const auto path = scratch("manifest.jsonl");
  write_manifest(path, m);
  EXPECT_EQ(slurp(path), text);
  EXPECT_EQ(manifest_to_jsonl(read_manifest(path)), text);
  fs::remove(path);
  EXPECT_THROW(manifest_from_jsonl("{not json}\n"), std::exception);
}

TEST(Render, CleanTwoCharMessage) {
  Manifest m;
  m.seed = 1;
  m.messages = {Message{0, "ab", Category::kRandomChars, 2}};
  m.splits = {Split::kTrain};
  const auto dir = scratch("render_ab");
  const auto summary = render_corpus(m, {}, dir);
  EXPECT_EQ(summary.written, 1u);
  EXPECT_TRUE(summary.failures.empty());
  const auto w = read_wav(dir / "wav" / "000000.wav");
  EXPECT_EQ(w.size(), 1920u);
  fs::remove_all(dir);
}

TEST(Render, ByteIdenticalAndDecodable) {
  const auto m = generate_corpus(12, 7);
  const auto a = scratch("render_a"), b = scratch("render_b");
  const auto ch = ChannelConfig{};
  render_corpus(m, ch, a, 1);
  render_corpus(m, ch, b, 3);
  const auto index = slurp(a / "index.jsonl");
  EXPECT_EQ(index, slurp(b / "index.jsonl"));
  EXPECT_EQ(static_cast<std::size_t>(std::count(index.begin(), index.end(), '\n')), m.messages.size());

  const auto bank = build_template_bank(build_vocab());
  for (const auto& msg : m.messages) {
    std::ostringstream name;
    name << std::setw(6) << std::setfill('0') << msg.id << ".wav";
    EXPECT_EQ(slurp(a / "wav" / name.str()), slurp(b / "wav" / name.str()));
    const auto decoded = decode(read_wav(a / "wav" / name.str()), bank);
    EXPECT_EQ(detokenize(decoded, build_vocab()), msg.text);
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Render, NoisyChannelIsStillDeterministic) {
  const auto m = generate_corpus(10, 9);
  const auto a = scratch("render_noisy_a"), b = scratch("render_noisy_b");
  const auto ch = ChannelConfig::combined();
  render_corpus(m, ch, a);
  render_corpus(m, ch, b);
  EXPECT_EQ(slurp(a / "index.jsonl"), slurp(b / "index.jsonl"));
  EXPECT_EQ(slurp(a / "wav" / "000003.wav"), slurp(b / "wav" / "000003.wav"));
  fs::remove_all(a);
  fs::remove_all(b);
}
