// Copyright 2026 The tonelink Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tonelink/channel.hpp"
#include "tonelink/metrics.hpp"
#include "tonelink/receiver.hpp"

namespace tonelink {

enum class ExperimentKind { kSnrSweep, kNoiseTypes, kLengthScaling, kChannelAblation, kE2e };

std::string_view to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(std::string_view s);

/// Parses "5", "-10.5", "clean" or "inf"; the last two mean no noise.
double parse_snr(std::string_view s);

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::kSnrSweep;
  std::size_t message_count = 200;
  /// +infinity entries stand for the clean channel.
  std::vector<double> snr_list = {-10.0, -5.0, 0.0, 5.0, 10.0, std::numeric_limits<double>::infinity()};
  std::vector<std::size_t> length_list = {5, 10, 20, 40, 60, 100, 200, 500, 1000};
  /// Noise color; unset picks the experiment's default (mixed for snr_sweep
  /// and e2e, white for length_scaling).
  std::optional<NoiseKind> noise;
  /// SNR for length_scaling, noise_types and e2e.
  double fixed_snr_db = 5.0;
  /// Stages every condition starts from before its own settings are applied.
  ChannelConfig base_channel;
  std::uint64_t seed = 7;
  DropConvention drop_convention = DropConvention::kDropAs100;
  unsigned jobs = 1;

  /// Throws std::invalid_argument on empty lists or a zero message count.
  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& cfg);
/// Missing keys keep the values already in `base`.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j, ExperimentConfig base = {});

struct Condition {
  std::string label;
  ChannelConfig channel;
  /// Exact message length in tokens; 0 means the corpus mixture.
  std::size_t length = 0;
};

std::vector<Condition> build_conditions(const ExperimentConfig& cfg);

/// The seven single-effect conditions of the ablation table.
std::vector<Condition> ablation_conditions(const ChannelConfig& base = {});

/// Messages for one condition. Corpus-mixture conditions take the first
/// `count` messages of generate_corpus(max(count, 10), seed), so every such
/// condition sees the same texts.
std::vector<std::string> condition_messages(const Condition& c, std::size_t count, std::uint64_t seed);

/// Encodes, passes through `channel` and decodes every message. Message i
/// uses channel seed derive_seed(seed, i) regardless of condition, so
/// conditions are compared on common random numbers. encode_ms covers
/// synthesis and decode_ms covers decoding plus detokenization.
EvalReport run_condition(const std::vector<std::string>& messages, const ChannelConfig& channel,
                         std::uint64_t seed, std::string label, const TemplateBank& bank,
                         DropConvention convention = DropConvention::kDropAs100,
                         const DecodeOptions& opts = {}, unsigned jobs = 1);

std::vector<EvalReport> run_experiment(const ExperimentConfig& cfg, const TemplateBank& bank);

}  // namespace tonelink
