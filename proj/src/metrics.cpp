// Copyright 2026 The tonelink Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tonelink/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace tonelink {

std::size_t edit_distance(std::string_view a, std::string_view b) {
  return edit_distance(std::span<const char>(a.data(), a.size()), std::span<const char>(b.data(), b.size()));
}

std::vector<char32_t> utf8_code_points(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto lead = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    char32_t cp = 0;
    if (lead < 0x80) {
      len = 1;
      cp = lead;
    } else if ((lead >> 5) == 0x6) {
      len = 2;
      cp = lead & 0x1F;
    } else if ((lead >> 4) == 0xE) {
      len = 3;
      cp = lead & 0x0F;
    } else if ((lead >> 3) == 0x1E) {
      len = 4;
      cp = lead & 0x07;
    }
    bool ok = len > 0 && i + len <= s.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto c = static_cast<unsigned char>(s[i + k]);
      if ((c >> 6) != 0x2) ok = false;
      cp = (cp << 6) | (c & 0x3F);
    }
    if (!ok) {
      out.push_back(U'�');
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> words;
  std::istringstream in{std::string(s)};
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

double cer(std::string_view ref, std::string_view hyp) {
  const auto r = utf8_code_points(ref);
  if (r.empty()) throw std::invalid_argument("undefined CER");
  const auto h = utf8_code_points(hyp);
  return static_cast<double>(edit_distance<char32_t>(r, h)) / static_cast<double>(r.size());
}

double wer(std::string_view ref, std::string_view hyp) {
  const auto r = split_words(ref);
  if (r.empty()) throw std::invalid_argument("undefined WER: reference has no words");
  const auto h = split_words(hyp);
  return static_cast<double>(edit_distance<std::string>(r, h)) / static_cast<double>(r.size());
}

EvalRecord score_message(std::string ref, std::string hyp, double encode_ms, double decode_ms) {
  EvalRecord r;
  r.cer = cer(ref, hyp);
  // A reference made of spaces has no words; fall back to the character rate.
  r.wer = split_words(ref).empty() ? r.cer : wer(ref, hyp);
  r.exact = r.cer == 0.0;
  r.ref = std::move(ref);
  r.hyp = std::move(hyp);
  r.encode_ms = encode_ms;
  r.decode_ms = decode_ms;
  return r;
}

EvalRecord dropped_record(std::string ref, double encode_ms, double decode_ms) {
  EvalRecord r;
  r.ref = std::move(ref);
  r.cer = 1.0;
  r.wer = 1.0;
  r.dropped = true;
  r.encode_ms = encode_ms;
  r.decode_ms = decode_ms;
  return r;
}

std::string_view to_string(DropConvention c) {
  return c == DropConvention::kDropAs100 ? "drop_as_100" : "drop_as_excluded";
}

DropConvention drop_convention_from_string(std::string_view s) {
  if (s == "100" || s == "drop_as_100") return DropConvention::kDropAs100;
  if (s == "exclude" || s == "drop_as_excluded") return DropConvention::kDropExcluded;
  throw std::invalid_argument("unknown drop convention: " + std::string(s));
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

EvalReport aggregate(std::vector<EvalRecord> records, DropConvention convention, std::string condition) {
  if (records.empty()) throw std::invalid_argument("aggregate needs at least one record");
  EvalReport rep;
  rep.condition = std::move(condition);
  rep.drop_convention = convention;
  auto& a = rep.aggregates;
  std::vector<double> latency;
  double cer_sum = 0.0, wer_sum = 0.0;
  std::size_t exact = 0;
  for (const auto& r : records) {
    latency.push_back(r.encode_ms + r.decode_ms);
    if (r.dropped) {
      ++a.dropped;
      if (convention == DropConvention::kDropExcluded) continue;
      cer_sum += 1.0;
      wer_sum += 1.0;
    } else {
      cer_sum += r.cer;
      wer_sum += r.wer;
      exact += r.exact;
    }
    ++a.scored;
  }
  if (a.scored > 0) {
    a.mean_cer = cer_sum / static_cast<double>(a.scored);
    a.mean_wer = wer_sum / static_cast<double>(a.scored);
    a.exact_match_rate = static_cast<double>(exact) / static_cast<double>(a.scored);
  }
  a.latency_p50_ms = percentile(latency, 50.0);
  a.latency_p95_ms = percentile(latency, 95.0);
  rep.records = std::move(records);
  return rep;
}

nlohmann::json to_json(const EvalRecord& r) {
  return {{"ref", r.ref},       {"hyp", r.hyp},
          {"cer", r.cer},       {"wer", r.wer},
          {"exact", r.exact},   {"encode_ms", r.encode_ms},
          {"decode_ms", r.decode_ms}, {"dropped", r.dropped}};
}

nlohmann::json to_json(const EvalReport& rep, bool include_latency) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : rep.records) {
    auto j = to_json(r);
    if (!include_latency) j["encode_ms"] = j["decode_ms"] = 0.0;
    records.push_back(std::move(j));
  }
  const auto& a = rep.aggregates;
  return {{"condition", rep.condition},
          {"drop_convention", to_string(rep.drop_convention)},
          {"aggregates",
           {{"mean_cer", a.mean_cer},
            {"mean_wer", a.mean_wer},
            {"exact_match_rate", a.exact_match_rate},
            {"latency_p50_ms", include_latency ? a.latency_p50_ms : 0.0},
            {"latency_p95_ms", include_latency ? a.latency_p95_ms : 0.0},
            {"scored", a.scored},
            {"dropped", a.dropped},
            {"count", rep.records.size()}}},
          {"records", records}};
}

EvalReport eval_report_from_json(const nlohmann::json& j) {
  std::vector<EvalRecord> records;
  for (const auto& r : j.at("records")) {
    EvalRecord e;
    e.ref = r.at("ref").get<std::string>();
    e.hyp = r.at("hyp").get<std::string>();
    e.cer = r.at("cer").get<double>();
    e.wer = r.at("wer").get<double>();
    e.exact = r.at("exact").get<bool>();
    e.encode_ms = r.at("encode_ms").get<double>();
    e.decode_ms = r.at("decode_ms").get<double>();
    e.dropped = r.at("dropped").get<bool>();
    records.push_back(std::move(e));
  }
  return aggregate(std::move(records), drop_convention_from_string(j.at("drop_convention").get<std::string>()),
                   j.at("condition").get<std::string>());
}

std::string render_table(std::span<const EvalReport> reports) {
  std::size_t width = 9;
  for (const auto& r : reports) width = std::max(width, r.condition.size());
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(width)) << "Condition" << std::right << std::setw(9) << "CER"
      << std::setw(9) << "WER" << std::setw(9) << "EM" << std::setw(12) << "Latency" << '\n';
  out << std::string(width + 39, '-') << '\n';
  out << std::fixed;
  for (const auto& r : reports) {
    const auto& a = r.aggregates;
    std::ostringstream cer_s, wer_s, em_s, lat_s;
    cer_s << std::fixed << std::setprecision(1) << 100.0 * a.mean_cer << '%';
    wer_s << std::fixed << std::setprecision(1) << 100.0 * a.mean_wer << '%';
    em_s << std::fixed << std::setprecision(0) << 100.0 * a.exact_match_rate << '%';
    lat_s << std::fixed << std::setprecision(2) << a.latency_p50_ms << " ms";
    out << std::left << std::setw(static_cast<int>(width)) << r.condition << std::right << std::setw(9)
        << cer_s.str() << std::setw(9) << wer_s.str() << std::setw(9) << em_s.str() << std::setw(12)
        << lat_s.str() << '\n';
  }
  return out.str();
}

}  // namespace tonelink
