// Copyright 2026 The tonelink Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tonelink/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "tonelink/corpus.hpp"
#include "tonelink/synth.hpp"

namespace tonelink {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format_db(double db) {
  std::ostringstream s;
  s << db;
  return s.str();
}

ChannelConfig with_noise(ChannelConfig c, NoiseKind kind, double snr_db) {
  if (std::isinf(snr_db)) return c;
  c.noise.enabled = true;
  c.noise.kind = kind;
  c.noise.snr_min_db = c.noise.snr_max_db = snr_db;
  return c;
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

std::string_view to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::kSnrSweep: return "snr_sweep";
    case ExperimentKind::kNoiseTypes: return "noise_types";
    case ExperimentKind::kLengthScaling: return "length_scaling";
    case ExperimentKind::kChannelAblation: return "channel_ablation";
    case ExperimentKind::kE2e: return "e2e";
  }
  return "snr_sweep";
}

ExperimentKind experiment_kind_from_string(std::string_view s) {
  for (auto k : {ExperimentKind::kSnrSweep, ExperimentKind::kNoiseTypes, ExperimentKind::kLengthScaling,
                 ExperimentKind::kChannelAblation, ExperimentKind::kE2e})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown experiment: " + std::string(s));
}

double parse_snr(std::string_view s) {
  if (s == "clean" || s == "inf") return kInf;
  std::string str(s);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(str, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != str.size() || !std::isfinite(v)) throw std::invalid_argument("invalid SNR: " + str);
  return v;
}

void ExperimentConfig::validate() const {
  if (message_count == 0) throw std::invalid_argument("message count must be positive");
  if (snr_list.empty()) throw std::invalid_argument("snr list must not be empty");
  if (length_list.empty()) throw std::invalid_argument("length list must not be empty");
  for (auto len : length_list)
    if (len == 0) throw std::invalid_argument("message lengths must be positive");
  for (double s : snr_list)
    if (std::isnan(s) || s == -kInf) throw std::invalid_argument("invalid SNR in list");
  if (!std::isfinite(fixed_snr_db)) throw std::invalid_argument("fixed SNR must be finite");
  base_channel.validate();
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  nlohmann::json snrs = nlohmann::json::array();
  for (double s : cfg.snr_list) snrs.push_back(std::isinf(s) ? nlohmann::json("clean") : nlohmann::json(s));
  nlohmann::json j{{"experiment", to_string(cfg.experiment)},
                   {"n", cfg.message_count},
                   {"snrs", snrs},
                   {"lengths", cfg.length_list},
                   {"snr_db", cfg.fixed_snr_db},
                   {"channel", to_json(cfg.base_channel)},
                   {"seed", cfg.seed},
                   {"drop_convention", to_string(cfg.drop_convention)}};
  j["noise"] = cfg.noise ? nlohmann::json(to_string(*cfg.noise)) : nlohmann::json(nullptr);
  return j;
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j, ExperimentConfig c) {
  if (j.contains("experiment")) c.experiment = experiment_kind_from_string(j.at("experiment").get<std::string>());
  if (j.contains("n")) c.message_count = j.at("n").get<std::size_t>();
  if (j.contains("snrs")) {
    c.snr_list.clear();
    for (const auto& s : j.at("snrs"))
      c.snr_list.push_back(s.is_string() ? parse_snr(s.get<std::string>()) : s.get<double>());
  }
  if (j.contains("lengths")) c.length_list = j.at("lengths").get<std::vector<std::size_t>>();
  if (j.contains("snr_db")) c.fixed_snr_db = j.at("snr_db").get<double>();
  if (j.contains("noise") && !j.at("noise").is_null())
    c.noise = noise_kind_from_string(j.at("noise").get<std::string>());
  if (j.contains("channel")) c.base_channel = channel_config_from_json(j.at("channel"), c.base_channel);
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("drop_convention"))
    c.drop_convention = drop_convention_from_string(j.at("drop_convention").get<std::string>());
  if (j.contains("jobs")) c.jobs = j.at("jobs").get<unsigned>();
  c.validate();
  return c;
}

std::vector<Condition> ablation_conditions(const ChannelConfig& base) {
  std::vector<Condition> out;
  out.push_back({"clean", base, 0});
  out.push_back({"noise_5dB", with_noise(base, NoiseKind::kWhite, 5.0), 0});
  out.push_back({"noise_0dB", with_noise(base, NoiseKind::kWhite, 0.0), 0});
  {
    auto c = base;
    c.reverb.enabled = true;
    c.reverb.tau = 0.4;
    c.reverb.delay_ms = 20.0;
    out.push_back({"reverb", c, 0});
  }
  {
    auto c = base;
    c.clip.mode = ClipMode::kHard;
    c.clip.threshold = 0.5;
    out.push_back({"clipping", c, 0});
  }
  {
    // Evaluation drift range; training uses the wider one in combined().
    auto c = base;
    c.drift.enabled = true;
    c.drift.min_factor = 0.99;
    c.drift.max_factor = 1.01;
    out.push_back({"drift", c, 0});
  }
  out.push_back({"combined", ChannelConfig::combined(), 0});
  return out;
}

std::vector<Condition> build_conditions(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<Condition> out;
  switch (cfg.experiment) {
    case ExperimentKind::kSnrSweep: {
      const auto kind = cfg.noise.value_or(NoiseKind::kMixed);
      for (double snr : cfg.snr_list)
        out.push_back({std::isinf(snr) ? "clean" : "snr_" + format_db(snr) + "dB",
                       with_noise(cfg.base_channel, kind, snr), 0});
      break;
    }
    case ExperimentKind::kNoiseTypes:
      for (auto kind : {NoiseKind::kWhite, NoiseKind::kPink, NoiseKind::kBrown})
        out.push_back({std::string(to_string(kind)) + "_" + format_db(cfg.fixed_snr_db) + "dB",
                       with_noise(cfg.base_channel, kind, cfg.fixed_snr_db), 0});
      break;
    case ExperimentKind::kLengthScaling: {
      const auto kind = cfg.noise.value_or(NoiseKind::kWhite);
      for (auto len : cfg.length_list)
        out.push_back({"len_" + std::to_string(len), with_noise(cfg.base_channel, kind, cfg.fixed_snr_db), len});
      break;
    }
    case ExperimentKind::kChannelAblation:
      out = ablation_conditions(cfg.base_channel);
      break;
    case ExperimentKind::kE2e: {
      const auto kind = cfg.noise.value_or(NoiseKind::kMixed);
      out.push_back({"e2e_" + std::string(to_string(kind)) + "_" + format_db(cfg.fixed_snr_db) + "dB",
                     with_noise(cfg.base_channel, kind, cfg.fixed_snr_db), 0});
      break;
    }
  }
  return out;
}

std::vector<std::string> condition_messages(const Condition& c, std::size_t count, std::uint64_t seed) {
  std::vector<std::string> out;
  out.reserve(count);
  if (c.length == 0) {
    const auto m = generate_corpus(std::max<std::size_t>(count, 10), seed);
    for (std::size_t i = 0; i < count; ++i) out.push_back(m.messages[i].text);
    return out;
  }
  const std::uint64_t text_seed = derive_seed(seed, c.length);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(derive_seed(text_seed, i));
    out.push_back(generate_text(Category::kEnglish, c.length, rng));
  }
  return out;
}

EvalReport run_condition(const std::vector<std::string>& messages, const ChannelConfig& channel,
                         std::uint64_t seed, std::string label, const TemplateBank& bank,
                         DropConvention convention, const DecodeOptions& opts, unsigned jobs) {
  channel.validate();
  opts.validate();
  const auto& vocab = build_vocab();
  std::vector<EvalRecord> records(messages.size());

  auto run_one = [&](std::size_t i) {
    const auto& text = messages[i];
    const auto start = std::chrono::steady_clock::now();
    const auto clean = synth_message(tokenize(text, vocab), bank.sample_rate());
    const double encode_ms = elapsed_ms(start);

    Rng rng(derive_seed(seed, i));
    const auto received = apply_channel(clean, channel, rng);

    const auto decode_start = std::chrono::steady_clock::now();
    try {
      auto hyp = detokenize(decode(received, bank, opts), vocab);
      records[i] = score_message(text, std::move(hyp), encode_ms, elapsed_ms(decode_start));
    } catch (const std::invalid_argument&) {
      records[i] = dropped_record(text, encode_ms, elapsed_ms(decode_start));
    }
  };

  const std::size_t n = messages.size();
  const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) run_one(i);
      });
  }
  return aggregate(std::move(records), convention, std::move(label));
}

std::vector<EvalReport> run_experiment(const ExperimentConfig& cfg, const TemplateBank& bank) {
  std::vector<EvalReport> reports;
  for (const auto& c : build_conditions(cfg)) {
    const auto messages = condition_messages(c, cfg.message_count, cfg.seed);
    reports.push_back(run_condition(messages, c.channel, cfg.seed, c.label, bank, cfg.drop_convention, {}, cfg.jobs));
  }
  return reports;
}

}  // namespace tonelink
