// Copyright 2026 The tonelink Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace tonelink {

inline constexpr std::size_t kVocabSize = 128;

/// Index into the 128-symbol alphabet. Id 0 is the CTC blank.
struct TokenId {
  std::uint8_t value = 0;

  constexpr TokenId() = default;
  constexpr explicit TokenId(std::uint8_t v) : value(v) {}
  /// Throws std::out_of_range("invalid token id") for ids outside [0, 128).
  static TokenId checked(long long v);

  constexpr std::size_t index() const { return value; }
  friend constexpr auto operator<=>(TokenId, TokenId) = default;
};

using TokenSeq = std::vector<TokenId>;

enum class TokenClass { kLetter, kDigit, kPunct, kSpecial, kCommand, kReserved };

std::string_view to_string(TokenClass c);
TokenClass token_class_from_string(std::string_view s);

// Fixed id layout. Letters, digits, punctuation and commands follow in
// contiguous runs; 102..127 are reserved and never produced by tokenize().
namespace ids {
inline constexpr TokenId kBlank{0};
inline constexpr TokenId kPad{1};
inline constexpr TokenId kSos{2};
inline constexpr TokenId kEos{3};
inline constexpr TokenId kSpace{4};
inline constexpr TokenId kUnk{5};
inline constexpr std::uint8_t kFirstLetter = 6;
inline constexpr std::uint8_t kFirstDigit = 32;
inline constexpr std::uint8_t kFirstPunct = 42;
inline constexpr std::uint8_t kFirstCommand = 58;
inline constexpr std::uint8_t kFirstReserved = 102;
}  // namespace ids

/// The 16 punctuation marks, in ASCII order.
inline constexpr std::string_view kPunctuation = "!\"#%&'(),-./:;?@";

/// Command names without brackets, in id order.
extern const std::array<std::string_view, 44> kCommandNames;

/// What UNK renders as in decoded text (U+FFFD).
inline constexpr std::string_view kUnkRendering = "\xEF\xBF\xBD";

struct VocabEntry {
  TokenId id;
  std::string surface;
  TokenClass cls;
};

/// Immutable 128-entry alphabet with longest-match text mapping.
class Vocab {
 public:
  /// Validates the table: 128 entries, ids 0..127 in order, unique surfaces,
  /// and the canonical class counts.
  explicit Vocab(std::vector<VocabEntry> entries);

  const std::vector<VocabEntry>& entries() const { return entries_; }
  const VocabEntry& entry(TokenId id) const;
  std::size_t size() const { return entries_.size(); }

  /// Exact surface lookup over the matchable entries (printable tokens).
  std::optional<TokenId> find(std::string_view surface) const;
  /// Surface lookup over every entry, including specials and reserved.
  std::optional<TokenId> find_any(std::string_view surface) const;

  /// Text this token contributes to detokenized output.
  std::string_view rendering(TokenId id) const;

  std::size_t count(TokenClass c) const;
  std::size_t max_surface_bytes() const { return max_surface_bytes_; }

 private:
  std::vector<VocabEntry> entries_;
  std::map<std::string, TokenId, std::less<>> matchable_;
  std::map<std::string, TokenId, std::less<>> all_;
  std::size_t max_surface_bytes_ = 1;
};

/// The canonical table. Identical on every run and platform.
const Vocab& build_vocab();

/// Greedy longest-match tokenization. Characters with no entry map to UNK,
/// one UNK per UTF-8 code point.
TokenSeq tokenize(std::string_view text, const Vocab& v);

/// Concatenated renderings. Blank, pad, SOS, EOS and reserved ids render as
/// empty. Throws std::out_of_range("invalid token id") for ids >= 128.
std::string detokenize(const TokenSeq& seq, const Vocab& v);

nlohmann::json vocab_to_json(const Vocab& v);
Vocab vocab_from_json(const nlohmann::json& j);

}  // namespace tonelink
