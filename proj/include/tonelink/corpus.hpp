// Copyright 2026 The tonelink Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tonelink/channel.hpp"
#include "tonelink/rng.hpp"

namespace tonelink {

inline constexpr std::string_view kCorpusGenerator = "tonelink-corpus/1";
inline constexpr std::size_t kMinMessageTokens = 3;
inline constexpr std::size_t kMaxMessageTokens = 40;

enum class Category { kCommandTemplate, kEnglish, kCommandSeq, kRandomChars };
enum class Split { kTrain, kVal, kTest };

std::string_view to_string(Category c);
Category category_from_string(std::string_view s);
std::string_view to_string(Split s);
Split split_from_string(std::string_view s);

/// Target mixture, in Category order: 60/20/10/10.
inline constexpr double kCategoryShares[4] = {0.6, 0.2, 0.1, 0.1};
inline constexpr double kSplitShares[3] = {0.8, 0.1, 0.1};

struct Message {
  std::uint64_t id = 0;
  std::string text;
  Category category = Category::kEnglish;
  std::size_t token_len = 0;
};

struct Manifest {
  std::uint64_t seed = 0;
  std::vector<Message> messages;
  std::vector<Split> splits;  // parallel to messages
};

/// Largest-remainder apportionment of `total` over `shares` (which sum to 1).
std::vector<std::size_t> apportion(std::size_t total, std::span<const double> shares);

/// Text of exactly `tokens` tokens in the given category style. Uses only
/// integer draws from `rng`, so output is portable across platforms.
std::string generate_text(Category category, std::size_t tokens, Rng& rng);

/// Deterministic in `seed`. Throws std::invalid_argument for n < 10.
Manifest generate_corpus(std::size_t n, std::uint64_t seed);

/// One JSON object per line, in id order.
std::string manifest_to_jsonl(const Manifest& m);
Manifest manifest_from_jsonl(std::string_view text);
void write_manifest(const std::filesystem::path& path, const Manifest& m);
Manifest read_manifest(const std::filesystem::path& path);

struct RenderSummary {
  std::size_t written = 0;
  std::vector<std::string> failures;
};

/// Writes wav/<id>.wav per message (PS synthesis then the channel, seeded per
/// message with derive_seed(manifest seed, id)) and index.jsonl. A failed
/// message is reported and skipped; the rest still render.
RenderSummary render_corpus(const Manifest& m, const ChannelConfig& ch, const std::filesystem::path& out_dir,
                            unsigned jobs = 1);

}  // namespace tonelink
