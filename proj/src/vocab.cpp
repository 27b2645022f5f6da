// Copyright 2026 The tonelink Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tonelink/vocab.hpp"

#include <stdexcept>

namespace tonelink {

const std::array<std::string_view, 44> kCommandNames = {
    "STOP",   "ACK",     "SCAN",    "GO",     "MOVE",   "TURN",   "LEFT",
    "RIGHT",  "FORWARD", "BACK",    "UP",     "DOWN",   "HALT",   "WAIT",
    "RESUME", "PAUSE",   "START",   "HOME",   "DOCK",   "UNDOCK", "CHARGE",
    "GRAB",   "RELEASE", "LIFT",    "DROP",   "PUSH",   "PULL",   "FOLLOW",
    "LEAD",   "SYNC",    "PING",    "NACK",   "RETRY",  "ABORT",  "DONE",
    "READY",  "BUSY",    "ERROR",   "STATUS", "REPORT", "LOCATE", "MAP",
    "PATROL", "EMERGENCY",
};

namespace {

constexpr std::array<std::string_view, 6> kSpecialSurfaces = {
    "<blank>", "<pad>", "<sos>", "<eos>", " ", "<unk>"};

bool matchable(TokenClass c) {
  return c != TokenClass::kSpecial && c != TokenClass::kReserved;
}

std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;  // stray continuation or invalid lead byte
}

std::vector<VocabEntry> canonical_entries() {
  std::vector<VocabEntry> out;
  out.reserve(kVocabSize);
  auto push = [&](std::string s, TokenClass c) {
    out.push_back({TokenId(static_cast<std::uint8_t>(out.size())), std::move(s), c});
  };
  for (auto s : kSpecialSurfaces) push(std::string(s), TokenClass::kSpecial);
  for (char c = 'a'; c <= 'z'; ++c) push(std::string(1, c), TokenClass::kLetter);
  for (char c = '0'; c <= '9'; ++c) push(std::string(1, c), TokenClass::kDigit);
  for (char c : kPunctuation) push(std::string(1, c), TokenClass::kPunct);
  for (auto name : kCommandNames) push("<" + std::string(name) + ">", TokenClass::kCommand);
  while (out.size() < kVocabSize)
    push("<reserved_" + std::to_string(out.size()) + ">", TokenClass::kReserved);
  return out;
}

}  // namespace

TokenId TokenId::checked(long long v) {
  if (v < 0 || v >= static_cast<long long>(kVocabSize))
    throw std::out_of_range("invalid token id");
  return TokenId(static_cast<std::uint8_t>(v));
}

std::string_view to_string(TokenClass c) {
  switch (c) {
    case TokenClass::kLetter: return "letter";
    case TokenClass::kDigit: return "digit";
    case TokenClass::kPunct: return "punct";
    case TokenClass::kSpecial: return "special";
    case TokenClass::kCommand: return "command";
    case TokenClass::kReserved: return "reserved";
  }
  return "reserved";
}

TokenClass token_class_from_string(std::string_view s) {
  for (auto c : {TokenClass::kLetter, TokenClass::kDigit, TokenClass::kPunct,
                 TokenClass::kSpecial, TokenClass::kCommand, TokenClass::kReserved}) {
    if (to_string(c) == s) return c;
  }
  throw std::invalid_argument("unknown token class: " + std::string(s));
}

Vocab::Vocab(std::vector<VocabEntry> entries) : entries_(std::move(entries)) {
  if (entries_.size() != kVocabSize)
    throw std::invalid_argument("vocab must have exactly 128 entries");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.id.index() != i) throw std::invalid_argument("vocab ids must be 0..127 in order");
    if (e.surface.empty()) throw std::invalid_argument("empty surface for id " + std::to_string(i));
    if (!all_.emplace(e.surface, e.id).second)
      throw std::invalid_argument("duplicate surface: " + e.surface);
    if (matchable(e.cls)) {
      matchable_.emplace(e.surface, e.id);
      max_surface_bytes_ = std::max(max_surface_bytes_, e.surface.size());
    }
  }
  if (count(TokenClass::kLetter) != 26 || count(TokenClass::kDigit) != 10 ||
      count(TokenClass::kPunct) != 16 || count(TokenClass::kSpecial) != 6 ||
      count(TokenClass::kCommand) != 44)
    throw std::invalid_argument("vocab class counts must be 26/10/16/6/44");
  for (std::size_t i = 0; i < kSpecialSurfaces.size(); ++i) {
    if (entries_[i].surface != kSpecialSurfaces[i] || entries_[i].cls != TokenClass::kSpecial)
      throw std::invalid_argument("ids 0..5 must be blank, pad, sos, eos, space, unk");
  }
}

const VocabEntry& Vocab::entry(TokenId id) const {
  if (id.index() >= entries_.size()) throw std::out_of_range("invalid token id");
  return entries_[id.index()];
}

std::optional<TokenId> Vocab::find(std::string_view surface) const {
  auto it = matchable_.find(surface);
  if (it == matchable_.end()) return std::nullopt;
  return it->second;
}

std::optional<TokenId> Vocab::find_any(std::string_view surface) const {
  auto it = all_.find(surface);
  if (it == all_.end()) return std::nullopt;
  return it->second;
}

std::string_view Vocab::rendering(TokenId id) const {
  const auto& e = entry(id);
  if (id == ids::kSpace) return e.surface;
  if (id == ids::kUnk) return kUnkRendering;
  if (!matchable(e.cls)) return {};
  return e.surface;
}

std::size_t Vocab::count(TokenClass c) const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.cls == c;
  return n;
}

const Vocab& build_vocab() {
  static const Vocab vocab(canonical_entries());
  return vocab;
}

TokenSeq tokenize(std::string_view text, const Vocab& v) {
  TokenSeq out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t longest = std::min(v.max_surface_bytes(), text.size() - pos);
    bool matched = false;
    for (std::size_t len = longest; len >= 1; --len) {
      if (auto id = v.find(text.substr(pos, len))) {
        out.push_back(*id);
        pos += len;
        matched = true;
        break;
      }
    }
    if (!matched) {
      if (text[pos] == ' ') {
        out.push_back(ids::kSpace);
        ++pos;
        continue;
      }
      out.push_back(ids::kUnk);
      pos += std::min(utf8_length(static_cast<unsigned char>(text[pos])), text.size() - pos);
    }
  }
  return out;
}

std::string detokenize(const TokenSeq& seq, const Vocab& v) {
  std::string out;
  for (auto id : seq) out += v.rendering(id);
  return out;
}

nlohmann::json vocab_to_json(const Vocab& v) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : v.entries()) {
    entries.push_back({{"id", e.id.value}, {"surface", e.surface}, {"class", to_string(e.cls)}});
  }
  return {{"size", v.size()}, {"entries", entries}};
}

Vocab vocab_from_json(const nlohmann::json& j) {
  std::vector<VocabEntry> entries;
  for (const auto& e : j.at("entries")) {
    entries.push_back({TokenId::checked(e.at("id").get<long long>()),
                       e.at("surface").get<std::string>(),
                       token_class_from_string(e.at("class").get<std::string>())});
  }
  return Vocab(std::move(entries));
}

}  // namespace tonelink
