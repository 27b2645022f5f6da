// Copyright 2026 The tonelink Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"
#include "tonelink/channel.hpp"
#include "tonelink/corpus.hpp"
#include "tonelink/dsp.hpp"
#include "tonelink/experiment.hpp"
#include "tonelink/receiver.hpp"
#include "tonelink/synth.hpp"
#include "tonelink/vocab.hpp"

namespace tonelink::cli {

namespace {

namespace fs = std::filesystem;

nlohmann::json read_json_file(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config: " + path.string());
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("invalid JSON in " + path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
  f << text;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) throw std::invalid_argument("empty item in list: " + s);
    out.push_back(item);
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

std::size_t parse_count(const std::string& s) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || v <= 0) throw std::invalid_argument("invalid length: " + s);
  return static_cast<std::size_t>(v);
}

// One optional per ChannelConfig field; set flags override the config file.
struct ChannelFlags {
  std::optional<bool> gain_enabled;
  std::optional<double> gain_min_db, gain_max_db;
  std::optional<bool> eq_enabled;
  std::optional<double> eq_center_min_hz, eq_center_max_hz, eq_gain_min_db, eq_gain_max_db, eq_q_min, eq_q_max;
  std::optional<bool> reverb_enabled;
  std::optional<double> reverb_tau, reverb_delay_ms;
  std::optional<std::string> clip_mode;
  std::optional<double> clip_threshold;
  std::optional<bool> drift_enabled;
  std::optional<double> drift_min, drift_max;
  std::optional<bool> noise_enabled;
  std::optional<std::string> noise_kind;
  std::optional<double> snr_min_db, snr_max_db;

  void attach(CLI::App* app) {
    auto group = "Channel overrides";
    app->add_option("--gain-enabled", gain_enabled)->group(group);
    app->add_option("--gain-min-db", gain_min_db)->group(group);
    app->add_option("--gain-max-db", gain_max_db)->group(group);
    app->add_option("--eq-enabled", eq_enabled)->group(group);
    app->add_option("--eq-center-min-hz", eq_center_min_hz)->group(group);
    app->add_option("--eq-center-max-hz", eq_center_max_hz)->group(group);
    app->add_option("--eq-gain-min-db", eq_gain_min_db)->group(group);
    app->add_option("--eq-gain-max-db", eq_gain_max_db)->group(group);
    app->add_option("--eq-q-min", eq_q_min)->group(group);
    app->add_option("--eq-q-max", eq_q_max)->group(group);
    app->add_option("--reverb-enabled", reverb_enabled)->group(group);
    app->add_option("--reverb-tau", reverb_tau)->group(group);
    app->add_option("--reverb-delay-ms", reverb_delay_ms)->group(group);
    app->add_option("--clip-mode", clip_mode, "none, hard or soft")->group(group);
    app->add_option("--clip-threshold", clip_threshold)->group(group);
    app->add_option("--drift-enabled", drift_enabled)->group(group);
    app->add_option("--drift-min", drift_min)->group(group);
    app->add_option("--drift-max", drift_max)->group(group);
    app->add_option("--noise-enabled", noise_enabled)->group(group);
    app->add_option("--noise-kind", noise_kind, "white, pink, brown or mixed")->group(group);
    app->add_option("--snr-min-db", snr_min_db)->group(group);
    app->add_option("--snr-max-db", snr_max_db)->group(group);
  }

  ChannelConfig apply(ChannelConfig c) const {
    auto set = [](auto& field, const auto& flag) {
      if (flag) field = *flag;
    };
    set(c.gain.enabled, gain_enabled);
    set(c.gain.min_db, gain_min_db);
    set(c.gain.max_db, gain_max_db);
    set(c.eq.enabled, eq_enabled);
    set(c.eq.center_min_hz, eq_center_min_hz);
    set(c.eq.center_max_hz, eq_center_max_hz);
    set(c.eq.gain_min_db, eq_gain_min_db);
    set(c.eq.gain_max_db, eq_gain_max_db);
    set(c.eq.q_min, eq_q_min);
    set(c.eq.q_max, eq_q_max);
    set(c.reverb.enabled, reverb_enabled);
    set(c.reverb.tau, reverb_tau);
    set(c.reverb.delay_ms, reverb_delay_ms);
    if (clip_mode) c.clip.mode = clip_mode_from_string(*clip_mode);
    set(c.clip.threshold, clip_threshold);
    set(c.drift.enabled, drift_enabled);
    set(c.drift.min_factor, drift_min);
    set(c.drift.max_factor, drift_max);
    set(c.noise.enabled, noise_enabled);
    if (noise_kind) c.noise.kind = noise_kind_from_string(*noise_kind);
    set(c.noise.snr_min_db, snr_min_db);
    set(c.noise.snr_max_db, snr_max_db);
    c.validate();
    return c;
  }
};

// A config file may hold a bare ChannelConfig or nest it under "channel".
ChannelConfig channel_from_file(const std::string& path) {
  if (path.empty()) return {};
  const auto j = read_json_file(path);
  return channel_config_from_json(j.contains("channel") ? j.at("channel") : j);
}

struct EvaluateArgs {
  std::string experiment = "snr_sweep";
  std::optional<std::string> snrs, lengths, noise, drop_convention;
  std::optional<std::size_t> n;
  std::optional<std::uint64_t> seed;
  std::optional<double> snr_db;
  std::optional<unsigned> jobs;
  std::string config;
  std::string out_dir = "reports";
  bool table = false;
  bool no_latency = false;
  ChannelFlags channel;
};

void attach_evaluate(CLI::App* app, EvaluateArgs& a, bool with_experiment) {
  if (with_experiment)
    app->add_option("--experiment", a.experiment)
        ->check(CLI::IsMember({"snr_sweep", "noise_types", "length_scaling", "channel_ablation", "e2e"}));
  app->add_option("--snrs", a.snrs, "Comma-separated SNRs in dB; 'clean' means no noise");
  app->add_option("--lengths", a.lengths, "Comma-separated message lengths in tokens");
  app->add_option("--noise", a.noise)->check(CLI::IsMember({"white", "pink", "brown", "mixed"}));
  app->add_option("--snr-db", a.snr_db, "SNR for length_scaling, noise_types and e2e");
  app->add_option("--n", a.n, "Messages per condition");
  app->add_option("--seed", a.seed);
  app->add_option("--config", a.config, "JSON experiment config");
  app->add_option("--out-dir", a.out_dir);
  app->add_option("--drop-convention", a.drop_convention)->check(CLI::IsMember({"100", "exclude"}));
  app->add_option("--jobs", a.jobs);
  app->add_flag("--table", a.table, "Print an aligned summary table");
  app->add_flag("--no-latency", a.no_latency, "Zero latency fields so reports are byte-stable");
  a.channel.attach(app);
}

int run_evaluate(const EvaluateArgs& a, bool force_ablation, std::ostream& out) {
  ExperimentConfig cfg;
  if (!a.config.empty()) cfg = experiment_config_from_json(read_json_file(a.config), cfg);
  if (force_ablation) cfg.experiment = ExperimentKind::kChannelAblation;
  else if (!a.config.empty() && a.experiment == "snr_sweep") {
    // Keep the config file's experiment unless a flag chose one.
  } else cfg.experiment = experiment_kind_from_string(a.experiment);
  if (a.snrs) {
    cfg.snr_list.clear();
    for (const auto& s : split_list(*a.snrs)) cfg.snr_list.push_back(parse_snr(s));
  }
  if (a.lengths) {
    cfg.length_list.clear();
    for (const auto& s : split_list(*a.lengths)) cfg.length_list.push_back(parse_count(s));
  }
  if (a.noise) cfg.noise = noise_kind_from_string(*a.noise);
  if (a.snr_db) cfg.fixed_snr_db = *a.snr_db;
  if (a.n) cfg.message_count = *a.n;
  if (a.seed) cfg.seed = *a.seed;
  if (a.drop_convention) cfg.drop_convention = drop_convention_from_string(*a.drop_convention);
  if (a.jobs) cfg.jobs = *a.jobs;
  cfg.base_channel = a.channel.apply(cfg.base_channel);
  cfg.validate();

  const auto& bank_vocab = build_vocab();
  const auto bank = build_template_bank(bank_vocab);
  const auto reports = run_experiment(cfg, bank);

  const fs::path dir = a.out_dir;
  fs::create_directories(dir);
  for (const auto& r : reports) {
    auto j = to_json(r, !a.no_latency);
    j["experiment"] = to_string(cfg.experiment);
    j["seed"] = cfg.seed;
    write_text(dir / (r.condition + ".json"), j.dump(2) + "\n");
  }
  const auto table = render_table(reports);
  write_text(dir / "table.txt", table);
  if (a.table) out << table;
  else
    for (const auto& r : reports) out << (dir / (r.condition + ".json")).string() << '\n';
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"tonelink: procedural acoustic token transport"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // encode
  std::string enc_text, enc_out;
  auto* encode = app.add_subcommand("encode", "Synthesize text to a WAV file");
  encode->add_option("--text", enc_text)->required();
  encode->add_option("--out", enc_out)->required();

  // decode
  std::string dec_in, dec_out;
  double dec_floor = kDefaultScoreFloor;
  std::optional<std::string> dec_drift;
  auto* decode_cmd = app.add_subcommand("decode", "Decode a WAV file to JSON");
  decode_cmd->add_option("wav", dec_in)->required();
  decode_cmd->add_option("--out", dec_out, "Write JSON here instead of stdout");
  decode_cmd->add_option("--score-floor", dec_floor);
  decode_cmd->add_option("--drift-search", dec_drift, "Comma-separated drift candidates");

  // simulate
  std::string sim_in, sim_out, sim_config;
  std::uint64_t sim_seed = 0;
  ChannelFlags sim_channel;
  auto* simulate = app.add_subcommand("simulate", "Pass a WAV file through the channel simulator");
  simulate->add_option("wav", sim_in)->required();
  simulate->add_option("--out", sim_out)->required();
  simulate->add_option("--seed", sim_seed);
  simulate->add_option("--config", sim_config, "JSON channel config");
  sim_channel.attach(simulate);

  // gen-corpus
  std::size_t gc_n = 15000;
  std::uint64_t gc_seed = 7;
  std::string gc_out;
  auto* gen_corpus = app.add_subcommand("gen-corpus", "Generate a message manifest (JSONL)");
  gen_corpus->add_option("--n", gc_n);
  gen_corpus->add_option("--seed", gc_seed);
  gen_corpus->add_option("--out", gc_out)->required();

  // render
  std::string rd_manifest, rd_out, rd_config;
  unsigned rd_jobs = 1;
  ChannelFlags rd_channel;
  auto* render = app.add_subcommand("render", "Render a manifest to WAV files and an index");
  render->add_option("--manifest", rd_manifest)->required();
  render->add_option("--out-dir", rd_out)->required();
  render->add_option("--config", rd_config, "JSON channel config");
  render->add_option("--jobs", rd_jobs);
  rd_channel.attach(render);

  // evaluate and channel-ablation
  EvaluateArgs ev, ab;
  auto* evaluate = app.add_subcommand("evaluate", "Run an experiment and write one report per condition");
  attach_evaluate(evaluate, ev, true);
  auto* ablation = app.add_subcommand("channel-ablation", "Run the single-effect channel ablation");
  attach_evaluate(ablation, ab, false);

  // vocab
  std::string vocab_out;
  auto* vocab_cmd = app.add_subcommand("vocab", "Export the token table as JSON");
  vocab_cmd->add_option("--out", vocab_out, "Write here instead of stdout");

  // mel
  std::string mel_in, mel_out;
  int mel_power = 1;
  auto* mel = app.add_subcommand("mel", "Compute a log-mel spectrogram from a WAV file");
  mel->add_option("wav", mel_in)->required();
  mel->add_option("--out", mel_out)->required();
  mel->add_option("--power", mel_power, "1 for magnitude, 2 for power")->check(CLI::IsMember({1, 2}));

  // vocode
  std::string voc_in, voc_out;
  int voc_iters = kGriffinLimIterations;
  auto* vocode = app.add_subcommand("vocode", "Griffin-Lim a mel file back to a WAV file");
  vocode->add_option("mel", voc_in)->required();
  vocode->add_option("--out", voc_out)->required();
  vocode->add_option("--iters", voc_iters)->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return e.get_exit_code() != 0 ? e.get_exit_code() : 2;
  }

  try {
    const auto& vocab = build_vocab();
    if (encode->parsed()) {
      const auto ids = tokenize(enc_text, vocab);
      if (ids.empty()) throw std::invalid_argument("empty message");
      write_wav(enc_out, synth_message(ids));
      return 0;
    }
    if (decode_cmd->parsed()) {
      DecodeOptions opts;
      opts.score_floor = dec_floor;
      if (dec_drift) {
        opts.drift_search.clear();
        for (const auto& s : split_list(*dec_drift)) opts.drift_search.push_back(parse_snr(s));
      }
      const auto wave = read_wav(dec_in);
      const auto bank = build_template_bank(vocab, wave.sample_rate);
      const auto text = to_json(decode_detailed(wave, bank, opts), vocab).dump() + "\n";
      if (dec_out.empty()) out << text;
      else write_text(dec_out, text);
      return 0;
    }
    if (simulate->parsed()) {
      const auto cfg = sim_channel.apply(channel_from_file(sim_config));
      Rng rng(sim_seed);
      ChannelDraw draw;
      write_wav(sim_out, apply_channel(read_wav(sim_in), cfg, rng, &draw));
      out << to_json(draw).dump() << '\n';
      return 0;
    }
    if (gen_corpus->parsed()) {
      const auto m = generate_corpus(gc_n, gc_seed);
      fs::path p = gc_out;
      if (p.has_parent_path()) fs::create_directories(p.parent_path());
      write_manifest(p, m);
      return 0;
    }
    if (render->parsed()) {
      const auto cfg = rd_channel.apply(channel_from_file(rd_config));
      const auto summary = render_corpus(read_manifest(rd_manifest), cfg, rd_out, rd_jobs);
      for (const auto& f : summary.failures) err << "warning: " << f << '\n';
      out << "rendered " << summary.written << " messages\n";
      return summary.failures.empty() ? 0 : 1;
    }
    if (evaluate->parsed()) return run_evaluate(ev, false, out);
    if (ablation->parsed()) return run_evaluate(ab, true, out);
    if (vocab_cmd->parsed()) {
      const auto text = vocab_to_json(vocab).dump(2) + "\n";
      if (vocab_out.empty()) out << text;
      else write_text(vocab_out, text);
      return 0;
    }
    if (mel->parsed()) {
      MelConfig cfg;
      const auto wave = read_wav(mel_in);
      cfg.sample_rate = wave.sample_rate;
      cfg.power = mel_power;
      cfg.validate();
      write_mel(mel_out, mel_spectrogram(wave, cfg));
      return 0;
    }
    if (vocode->parsed()) {
      write_wav(voc_out, griffin_lim(read_mel(voc_in), voc_iters));
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace tonelink::cli
