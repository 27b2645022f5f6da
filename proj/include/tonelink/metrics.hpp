// Copyright 2026 The tonelink Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace tonelink {

/// Unit-cost Levenshtein distance, two-row DP.
template <typename T>
std::size_t edit_distance(std::span<const T> a, std::span<const T> b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::size_t edit_distance(std::string_view a, std::string_view b);

/// UTF-8 to code points; invalid bytes become U+FFFD.
std::vector<char32_t> utf8_code_points(std::string_view s);

std::vector<std::string> split_words(std::string_view s);

/// Character edit distance over code points / reference length. May exceed 1.
/// Throws std::invalid_argument("undefined CER") for an empty reference.
double cer(std::string_view ref, std::string_view hyp);

/// Word edit distance / reference word count. Throws std::invalid_argument
/// when the reference has no words.
double wer(std::string_view ref, std::string_view hyp);

struct EvalRecord {
  std::string ref;
  std::string hyp;
  double cer = 0.0;
  double wer = 0.0;
  bool exact = false;
  double encode_ms = 0.0;
  double decode_ms = 0.0;
  bool dropped = false;
};

/// Scores one decoded message; exact is set iff cer == 0.
EvalRecord score_message(std::string ref, std::string hyp, double encode_ms = 0.0, double decode_ms = 0.0);

/// A record for a message the receiver discarded.
EvalRecord dropped_record(std::string ref, double encode_ms = 0.0, double decode_ms = 0.0);

enum class DropConvention { kDropAs100, kDropExcluded };

std::string_view to_string(DropConvention c);
DropConvention drop_convention_from_string(std::string_view s);

struct EvalAggregates {
  double mean_cer = 0.0;
  double mean_wer = 0.0;
  double exact_match_rate = 0.0;
  double latency_p50_ms = 0.0;
  double latency_p95_ms = 0.0;
  std::size_t scored = 0;
  std::size_t dropped = 0;
};

struct EvalReport {
  std::string condition;
  DropConvention drop_convention = DropConvention::kDropAs100;
  std::vector<EvalRecord> records;
  EvalAggregates aggregates;
};

/// Linear-interpolated percentile, q in [0, 100].
double percentile(std::vector<double> values, double q);

/// Drop-as-100 counts a dropped message as CER = WER = 1 and not exact;
/// drop-excluded removes it from CER, WER and EM. Latency always covers every
/// record. Throws std::invalid_argument on an empty record list.
EvalReport aggregate(std::vector<EvalRecord> records, DropConvention convention, std::string condition = {});

nlohmann::json to_json(const EvalRecord& r);
nlohmann::json to_json(const EvalReport& r, bool include_latency = true);
EvalReport eval_report_from_json(const nlohmann::json& j);

/// Aligned text table with columns Condition, CER, WER, EM, Latency.
std::string render_table(std::span<const EvalReport> reports);

}  // namespace tonelink
