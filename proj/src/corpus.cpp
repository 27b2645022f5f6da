// Copyright 2026 The tonelink Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tonelink/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "tonelink/metrics.hpp"
#include "tonelink/synth.hpp"
#include "tonelink/vocab.hpp"

namespace tonelink {

namespace {

// Seed phrases for the bigram sampler. Lower-case letters and spaces only.
constexpr std::string_view kPhrases[] = {
    "please move the red box to the left shelf",
    "the robot is ready to start the next task",
    "go to the charging dock and wait there",
    "pick up the blue cup from the table",
    "i can see an obstacle in the hallway",
    "turn right at the end of the corridor",
    "the battery level is low so i will return",
    "we need help with the heavy crate near the door",
    "follow me to the loading area",
    "scan the room for people and report back",
    "the path is clear you may proceed",
    "hold position until further notice",
    "place the tool on the bench by the window",
    "a small part fell under the conveyor",
    "my arm is stuck please send a technician",
    "check the sensor on the front bumper",
    "open the gate and let the cart pass",
    "the map shows a new wall in zone four",
    "slow down when you reach the ramp",
    "bring the package to the second floor",
    "it is safe to cross now",
    "all units return to base at noon",
    "do not enter the storage room",
    "the light is green on my side",
    "wait for my signal before you lift",
};

constexpr std::string_view kArgWords[] = {
    "a",     "b",      "c",     "1",     "2",     "3",     "4",     "5",     "7",     "9",
    "to",    "at",     "on",    "by",    "12",    "42",    "up",    "in",    "x",     "y",
    "base",  "dock",   "zone",  "left",  "right", "door",  "gate",  "shelf", "bay",   "row",
    "alpha", "bravo",  "north", "south", "east",  "west",  "cart",  "crate", "item",  "arm",
    "sector", "station", "corridor", "target", "waypoint", "lane", "pallet", "unit", "slow", "fast",
};

struct Lexicon {
  std::vector<std::string> words;
  std::map<std::size_t, std::vector<std::size_t>> by_length;
  std::size_t max_len = 0;

  void add(std::string_view w) {
    if (std::find(words.begin(), words.end(), w) != words.end()) return;
    by_length[w.size()].push_back(words.size());
    words.emplace_back(w);
    max_len = std::max(max_len, w.size());
  }
};

struct Bigrams {
  Lexicon lex;
  std::vector<std::size_t> starts;
  std::map<std::size_t, std::vector<std::size_t>> next;
};

std::size_t index_of(const Lexicon& lex, std::string_view w) {
  return static_cast<std::size_t>(std::find(lex.words.begin(), lex.words.end(), w) - lex.words.begin());
}

const Bigrams& english_model() {
  static const Bigrams model = [] {
    Bigrams b;
    for (auto phrase : kPhrases)
      for (const auto& w : split_words(phrase)) b.lex.add(w);
    for (auto phrase : kPhrases) {
      const auto words = split_words(phrase);
      b.starts.push_back(index_of(b.lex, words.front()));
      for (std::size_t i = 0; i + 1 < words.size(); ++i)
        b.next[index_of(b.lex, words[i])].push_back(index_of(b.lex, words[i + 1]));
    }
    return b;
  }();
  return model;
}

const Lexicon& arg_lexicon() {
  static const Lexicon lex = [] {
    Lexicon l;
    for (auto w : kArgWords) l.add(w);
    return l;
  }();
  return lex;
}

template <typename T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  return v[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(v.size()) - 1))];
}

// Space-separated words totalling exactly `chars` characters. `propose`
// suggests the next word index; words too long for the remaining room are
// replaced by a random word that fits, and the last word is drawn from the
// exact remaining length.
template <typename Propose>
std::string fill_words(const Lexicon& lex, std::size_t chars, Rng& rng, Propose propose) {
  std::string out;
  std::size_t remaining = chars;
  std::size_t prev = lex.words.size();
  while (remaining > 0) {
    if (auto exact = lex.by_length.find(remaining); exact != lex.by_length.end() && remaining <= lex.max_len &&
                                                    (remaining <= 2 || rng.uniform_int(0, 1) == 0)) {
      out += lex.words[pick(exact->second, rng)];
      break;
    }
    std::size_t idx = propose(prev);
    if (lex.words[idx].size() + 2 > remaining) {
      std::vector<std::size_t> fits;
      for (const auto& [len, ids] : lex.by_length)
        if (len + 2 <= remaining) fits.insert(fits.end(), ids.begin(), ids.end());
      if (fits.empty()) {
        // Only reachable when no word has the exact remaining length.
        throw std::logic_error("lexicon cannot fill the requested length");
      }
      idx = pick(fits, rng);
    }
    out += lex.words[idx];
    out += ' ';
    remaining -= lex.words[idx].size() + 1;
    prev = idx;
  }
  return out;
}

std::string english_text(std::size_t chars, Rng& rng) {
  const auto& m = english_model();
  return fill_words(m.lex, chars, rng, [&](std::size_t prev) {
    auto it = m.next.find(prev);
    if (it == m.next.end() || it->second.empty()) return pick(m.starts, rng);
    return pick(it->second, rng);
  });
}

std::string arg_text(std::size_t chars, Rng& rng) {
  const auto& lex = arg_lexicon();
  return fill_words(lex, chars, rng, [&](std::size_t) {
    return static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(lex.words.size()) - 1));
  });
}

std::string command_surface(Rng& rng) {
  const auto i = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(kCommandNames.size()) - 1));
  return "<" + std::string(kCommandNames[i]) + ">";
}

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace

std::string_view to_string(Category c) {
  switch (c) {
    case Category::kCommandTemplate: return "command_template";
    case Category::kEnglish: return "english";
    case Category::kCommandSeq: return "command_seq";
    case Category::kRandomChars: return "random_chars";
  }
  return "english";
}

Category category_from_string(std::string_view s) {
  for (auto c : {Category::kCommandTemplate, Category::kEnglish, Category::kCommandSeq, Category::kRandomChars})
    if (to_string(c) == s) return c;
  throw std::invalid_argument("unknown category: " + std::string(s));
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "train";
}

Split split_from_string(std::string_view s) {
  for (auto v : {Split::kTrain, Split::kVal, Split::kTest})
    if (to_string(v) == s) return v;
  throw std::invalid_argument("unknown split: " + std::string(s));
}

std::vector<std::size_t> apportion(std::size_t total, std::span<const double> shares) {
  std::vector<std::size_t> counts(shares.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < shares.size(); ++i) {
    const double exact = shares[i] * static_cast<double>(total);
    // Guard against 0.6 * 15000 landing a hair under 9000.
    counts[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    assigned += counts[i];
    remainders.emplace_back(exact - static_cast<double>(counts[i]), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < total && k < remainders.size(); ++k, ++assigned) ++counts[remainders[k].second];
  return counts;
}

std::string generate_text(Category category, std::size_t tokens, Rng& rng) {
  if (tokens == 0) return {};
  switch (category) {
    case Category::kEnglish:
      return english_text(tokens, rng);
    case Category::kCommandTemplate: {
      if (tokens < 3) return command_surface(rng) + (tokens == 2 ? " " : "");
      return command_surface(rng) + " " + arg_text(tokens - 2, rng);
    }
    case Category::kCommandSeq: {
      std::string out;
      for (std::size_t i = 0; i < tokens; ++i) out += command_surface(rng);
      return out;
    }
    case Category::kRandomChars: {
      static const std::string alphabet = [] {
        std::string a;
        for (char c = 'a'; c <= 'z'; ++c) a += c;
        for (char c = '0'; c <= '9'; ++c) a += c;
        a += kPunctuation;
        a += ' ';
        return a;
      }();
      std::string out;
      for (std::size_t i = 0; i < tokens; ++i)
        out += alphabet[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(alphabet.size()) - 1))];
      return out;
    }
  }
  return {};
}

Manifest generate_corpus(std::size_t n, std::uint64_t seed) {
  if (n < 10) throw std::invalid_argument("corpus size must be >= 10");
  Rng rng(seed);
  const auto counts = apportion(n, kCategoryShares);
  std::vector<Category> cats;
  cats.reserve(n);
  for (std::size_t c = 0; c < counts.size(); ++c) cats.insert(cats.end(), counts[c], static_cast<Category>(c));
  shuffle(cats, rng);

  Manifest m;
  m.seed = seed;
  m.messages.reserve(n);
  const auto& vocab = build_vocab();
  for (std::size_t i = 0; i < n; ++i) {
    const auto len = static_cast<std::size_t>(rng.uniform_int(kMinMessageTokens, kMaxMessageTokens));
    Message msg;
    msg.id = i;
    msg.category = cats[i];
    msg.text = generate_text(cats[i], len, rng);
    msg.token_len = tokenize(msg.text, vocab).size();
    if (msg.token_len != len) throw std::logic_error("generated text has the wrong token count");
    m.messages.push_back(std::move(msg));
  }

  const auto split_counts = apportion(n, kSplitShares);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  shuffle(order, rng);
  m.splits.assign(n, Split::kTrain);
  std::size_t k = 0;
  for (std::size_t s = 0; s < split_counts.size(); ++s)
    for (std::size_t c = 0; c < split_counts[s]; ++c) m.splits[order[k++]] = static_cast<Split>(s);
  return m;
}

std::string manifest_to_jsonl(const Manifest& m) {
  std::string out;
  for (std::size_t i = 0; i < m.messages.size(); ++i) {
    const auto& msg = m.messages[i];
    nlohmann::ordered_json j;
    j["id"] = msg.id;
    j["text"] = msg.text;
    j["category"] = to_string(msg.category);
    j["token_len"] = msg.token_len;
    j["split"] = to_string(m.splits[i]);
    j["seed"] = m.seed;
    j["generator"] = kCorpusGenerator;
    out += j.dump();
    out += '\n';
  }
  return out;
}

Manifest manifest_from_jsonl(std::string_view text) {
  Manifest m;
  std::istringstream in{std::string(text)};
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    const auto seed = j.at("seed").get<std::uint64_t>();
    if (first) m.seed = seed;
    else if (seed != m.seed) throw std::runtime_error("manifest mixes seeds");
    first = false;
    Message msg;
    msg.id = j.at("id").get<std::uint64_t>();
    msg.text = j.at("text").get<std::string>();
    msg.category = category_from_string(j.at("category").get<std::string>());
    msg.token_len = j.at("token_len").get<std::size_t>();
    m.messages.push_back(std::move(msg));
    m.splits.push_back(split_from_string(j.at("split").get<std::string>()));
  }
  return m;
}

void write_manifest(const std::filesystem::path& path, const Manifest& m) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
  f << manifest_to_jsonl(m);
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return manifest_from_jsonl(ss.str());
}

RenderSummary render_corpus(const Manifest& m, const ChannelConfig& ch, const std::filesystem::path& out_dir,
                            unsigned jobs) {
  ch.validate();
  std::filesystem::create_directories(out_dir / "wav");
  const auto& vocab = build_vocab();
  const std::size_t n = m.messages.size();
  std::vector<std::string> lines(n);
  std::vector<std::string> errors(n);

  auto render_one = [&](std::size_t i) {
    const auto& msg = m.messages[i];
    try {
      const auto ids = tokenize(msg.text, vocab);
      Rng rng(derive_seed(m.seed, msg.id));
      ChannelDraw draw;
      const auto wave = apply_channel(synth_message(ids), ch, rng, &draw);
      std::ostringstream name;
      name << "wav/" << std::setw(6) << std::setfill('0') << msg.id << ".wav";
      write_wav(out_dir / name.str(), wave);

      nlohmann::ordered_json j;
      j["id"] = msg.id;
      j["path"] = name.str();
      j["text"] = msg.text;
      nlohmann::json tokens = nlohmann::json::array();
      for (auto id : ids) tokens.push_back(id.value);
      j["tokens"] = tokens;
      j["split"] = to_string(m.splits.at(i));
      j["category"] = to_string(msg.category);
      j["samples"] = wave.size();
      j["channel"] = to_json(draw);
      lines[i] = j.dump();
    } catch (const std::exception& e) {
      errors[i] = "message " + std::to_string(msg.id) + ": " + e.what();
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) render_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) render_one(i);
      });
  }

  RenderSummary summary;
  std::ofstream index(out_dir / "index.jsonl", std::ios::binary);
  if (!index) throw std::runtime_error("cannot write index.jsonl in " + out_dir.string());
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i].empty()) {
      summary.failures.push_back(errors[i]);
      continue;
    }
    index << lines[i] << '\n';
    ++summary.written;
  }
  return summary;
}

}  // namespace tonelink
