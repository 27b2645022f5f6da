// Copyright 2026 The tonelink Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "json.hpp"
#include "tonelink/waveform.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = tonelink::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("tonelink_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, EncodeDecodeRoundTrip) {
  ASSERT_EQ(run({"encode", "--text", "a", "--out", path("a.wav")}).code, 0);
  EXPECT_EQ(tonelink::read_wav(path("a.wav")).size(), 960u);
  const auto r = run({"decode", path("a.wav")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("text"), "a");
  EXPECT_EQ(j.at("tokens").size(), 1u);
}

TEST_F(CliTest, EncodeRejectsEmptyText) {
  const auto r = run({"encode", "--text", "", "--out", path("x.wav")});
  EXPECT_NE(r.code, 0);
  EXPECT_EQ(r.err, "error: empty message\n");
}

TEST_F(CliTest, DecodeMissingFileFailsWithOneLine) {
  const auto r = run({"decode", path("missing.wav")});
  EXPECT_NE(r.code, 0);
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
  EXPECT_EQ(r.err.rfind("error: ", 0), 0u);
}

TEST_F(CliTest, UnknownSubcommandFails) {
  EXPECT_NE(run({"frobnicate"}).code, 0);
  EXPECT_NE(run({"evaluate", "--noise", "purple"}).code, 0);
}

TEST_F(CliTest, SimulateFlagsOverrideConfig) {
  ASSERT_EQ(run({"encode", "--text", "go", "--out", path("in.wav")}).code, 0);
  {
    std::ofstream cfg(path("ch.json"));
    cfg << R"({"gain": {"enabled": true, "min_db": -6, "max_db": -6}})";
  }
  auto r = run({"simulate", path("in.wav"), "--out", path("out.wav"), "--config", path("ch.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_DOUBLE_EQ(nlohmann::json::parse(r.out).at("gain_db").get<double>(), -6.0);
  r = run({"simulate", path("in.wav"), "--out", path("out.wav"), "--config", path("ch.json"), "--gain-min-db", "3",
           "--gain-max-db", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_DOUBLE_EQ(nlohmann::json::parse(r.out).at("gain_db").get<double>(), 3.0);
}

TEST_F(CliTest, GenCorpusAndRenderAreDeterministic) {
  ASSERT_EQ(run({"gen-corpus", "--n", "20", "--seed", "7", "--out", path("a.jsonl")}).code, 0);
  ASSERT_EQ(run({"gen-corpus", "--n", "20", "--seed", "7", "--out", path("b.jsonl")}).code, 0);
  EXPECT_EQ(slurp(path("a.jsonl")), slurp(path("b.jsonl")));
  ASSERT_EQ(run({"render", "--manifest", path("a.jsonl"), "--out-dir", path("r1"), "--noise-enabled", "true"}).code,
            0);
  ASSERT_EQ(run({"render", "--manifest", path("a.jsonl"), "--out-dir", path("r2"), "--noise-enabled", "true"}).code,
            0);
  EXPECT_EQ(slurp(path("r1/index.jsonl")), slurp(path("r2/index.jsonl")));
  EXPECT_EQ(slurp(path("r1/wav/000019.wav")), slurp(path("r2/wav/000019.wav")));
}

TEST_F(CliTest, EvaluateWritesOneReportPerCondition) {
  const auto r = run({"evaluate", "--experiment", "snr_sweep", "--snrs", "-5,0,5,10,clean", "--n", "8", "--out-dir",
                      path("rep"), "--no-latency"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (auto label : {"snr_-5dB", "snr_0dB", "snr_5dB", "snr_10dB", "clean"}) {
    const auto j = nlohmann::json::parse(slurp(path("rep/") + label + ".json"));
    EXPECT_EQ(j.at("condition"), label);
    EXPECT_EQ(j.at("records").size(), 8u);
  }
  EXPECT_TRUE(fs::exists(path("rep/table.txt")));

  ASSERT_EQ(run({"evaluate", "--experiment", "snr_sweep", "--snrs", "-5,0,5,10,clean", "--n", "8", "--out-dir",
                 path("rep2"), "--no-latency"})
                .code,
            0);
  EXPECT_EQ(slurp(path("rep/snr_0dB.json")), slurp(path("rep2/snr_0dB.json")));
}

TEST_F(CliTest, ChannelAblationPrintsTable) {
  const auto r = run({"channel-ablation", "--n", "4", "--out-dir", path("abl"), "--table"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("combined"), std::string::npos);
  EXPECT_NE(r.out.find("CER"), std::string::npos);
}

TEST_F(CliTest, MelAndVocode) {
  ASSERT_EQ(run({"encode", "--text", "hi", "--out", path("hi.wav")}).code, 0);
  ASSERT_EQ(run({"mel", path("hi.wav"), "--out", path("hi.mel")}).code, 0);
  EXPECT_TRUE(fs::exists(path("hi.mel.json")));
  ASSERT_EQ(run({"vocode", path("hi.mel"), "--out", path("back.wav"), "--iters", "4"}).code, 0);
  EXPECT_EQ(tonelink::read_wav(path("back.wav")).size(), 1920u);
}

TEST_F(CliTest, VocabExport) {
  const auto r = run({"vocab"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(nlohmann::json::parse(r.out).at("entries").size(), 128u);
}
