// Copyright 2026 The GateFusion Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.h"

#include <charconv>
#include <exception>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <thread>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "gatefusion/errors.h"
#include "gatefusion/fusion_presets.h"
#include "gatefusion/metrics.h"
#include "gatefusion/synthdata.h"

namespace gatefusion::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

json metrics_json(const EvalMetrics& m) {
  return {{"ap_av", m.ap_av}, {"ap_a", m.ap_a}, {"ap_v", m.ap_v}, {"cls", m.cls},
          {"mal", m.mal},     {"opp", m.opp},   {"total", m.total}};
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream f(path, std::ios::trunc);
  f << text;
  if (!f) throw IoError("cannot write '" + path.string() + "'");
}

fs::path arm_dir(const RunConfig& base, const std::string& name, std::uint64_t seed) {
  return fs::path(base.output_dir) / name / ("seed" + std::to_string(seed));
}

RunConfig arm_config(const RunConfig& base, const std::string& name, std::uint64_t seed) {
  RunConfig cfg = base;
  cfg.seed = seed;
  cfg.output_dir = arm_dir(base, name, seed).string();
  return cfg;
}

json summarize(const std::vector<ArmOutcome>& outcomes) {
  std::map<std::string, std::pair<double, std::size_t>> acc;
  std::vector<std::string> order;
  for (const auto& o : outcomes) {
    auto [it, inserted] = acc.try_emplace(o.arm.name, 0.0, 0);
    if (inserted) order.push_back(o.arm.name);
    it->second.first += o.val.ap_av;
    it->second.second += 1;
  }
  json means = json::array();
  for (const auto& name : order) {
    const auto& [total, n] = acc[name];
    means.push_back({{"arm", name}, {"mean_ap_av", total / static_cast<double>(n)}, {"runs", n}});
  }
  return means;
}

}  // namespace

RunConfig resolve_config(const ConfigArgs& args) {
  if (args.config_path.empty()) return parse_run_config("{}", args.overrides);
  return load_run_config(args.config_path, args.overrides);
}

int cmd_train(const ConfigArgs& args, std::ostream& out) {
  const RunConfig cfg = resolve_config(args);
  const TrainResult r = train(cfg);
  json summary = {{"event", "done"},
                  {"config_hash", r.config_hash},
                  {"output_dir", cfg.output_dir},
                  {"steps", cfg.train.steps},
                  {"final", metrics_json(r.final_val)},
                  {"best_step", r.best_val.step},
                  {"best", metrics_json(r.best_val.metrics)}};
  out << summary.dump() << '\n';
  return kExitOk;
}

int cmd_eval(const EvalArgs& args, std::ostream& out) {
  const LoadedModel loaded = load_model(args.checkpoint);
  std::vector<Episode> episodes;
  if (!args.data.empty()) {
    episodes = read_episodes(args.data);
  } else if (args.split == "val") {
    episodes = validation_split(loaded.config);
  } else if (args.split == "test") {
    episodes = test_split(loaded.config);
  } else {
    throw ConfigError("--split must be 'val' or 'test', got '" + args.split + "'");
  }
  const LossWeights& w = loaded.config.loss;
  json report = {{"config_hash", config_hash(loaded.config)},
                 {"checkpoint", args.checkpoint},
                 {"checkpoint_step", loaded.step},
                 {"data", args.data.empty() ? args.split : args.data},
                 {"episodes", episodes.size()}};
  report["clean"] = metrics_json(evaluate(*loaded.model, episodes, w));
  if (args.corrupt_audio >= 0.0) {
    json j = metrics_json(
        evaluate(*loaded.model, episodes, w, {args.corrupt_audio, 0.0, args.noise_seed}));
    j["sigma"] = args.corrupt_audio;
    report["audio_noise"] = std::move(j);
  }
  if (args.corrupt_video >= 0.0) {
    json j = metrics_json(
        evaluate(*loaded.model, episodes, w, {0.0, args.corrupt_video, args.noise_seed}));
    j["sigma"] = args.corrupt_video;
    report["video_noise"] = std::move(j);
  }
  out << report.dump(2) << '\n';
  return kExitOk;
}

std::vector<ArmOutcome> run_arms(const std::vector<Arm>& arms, std::size_t parallel,
                                 bool write_outputs) {
  std::vector<ArmOutcome> outcomes(arms.size());
  std::vector<std::exception_ptr> errors(arms.size());
  auto run_one = [&](std::size_t i) {
    try {
      const TrainResult r = train(arms[i].config, {write_outputs});
      outcomes[i] = {arms[i], r.final_val, r.config_hash, r.wall_seconds};
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  parallel = std::max<std::size_t>(1, std::min(parallel, arms.size()));
  if (parallel == 1) {
    for (std::size_t i = 0; i < arms.size(); ++i) run_one(i);
  } else {
    std::mutex mu;
    std::size_t next = 0;
    std::vector<std::thread> workers;
    for (std::size_t t = 0; t < parallel; ++t) {
      workers.emplace_back([&] {
        for (;;) {
          std::size_t i;
          {
            std::lock_guard<std::mutex> lock(mu);
            if (next >= arms.size()) return;
            i = next++;
          }
          run_one(i);
        }
      });
    }
    for (auto& w : workers) w.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return outcomes;
}

std::vector<Arm> decoder_arms(const RunConfig& base, bool components) {
  struct Spec {
    std::string name;
    DecoderKind kind;
    double mal;
    double opp;
  };
  std::vector<Spec> specs;
  if (components) {
    const LossWeights on = (base.loss.mal > 0.0 || base.loss.opp > 0.0) ? base.loss : LossWeights{};
    specs = {{"sum", DecoderKind::kSum, 0.0, 0.0},
             {"higate", DecoderKind::kHiGate, 0.0, 0.0},
             {"higate+mal", DecoderKind::kHiGate, on.mal, 0.0},
             {"higate+opp", DecoderKind::kHiGate, 0.0, on.opp},
             {"higate+mal+opp", DecoderKind::kHiGate, on.mal, on.opp}};
  } else {
    for (const auto kind : base.ablation.decoders) {
      specs.push_back({std::string(to_string(kind)), kind, 0.0, 0.0});
    }
  }
  std::vector<Arm> arms;
  for (const auto& s : specs) {
    for (const auto seed : base.ablation.seeds) {
      RunConfig cfg = arm_config(base, s.name, seed);
      cfg.decoder = s.kind;
      cfg.loss.mal = s.mal;
      cfg.loss.opp = s.opp;
      cfg.validate();
      arms.push_back({s.name, cfg});
    }
  }
  return arms;
}

std::vector<Arm> fusion_arms(const RunConfig& base) {
  std::vector<Arm> arms;
  for (const auto& preset : fusion_presets(base.encoder.layers)) {
    for (const auto seed : base.ablation.seeds) {
      RunConfig cfg = arm_config(base, preset.kind, seed);
      cfg.decoder = DecoderKind::kHiGate;
      cfg.fusion.layers = preset.layers;
      cfg.validate();
      arms.push_back({preset.kind, cfg});
    }
  }
  return arms;
}

int cmd_ablate_decoders(const AblateArgs& args, std::ostream& out) {
  const RunConfig base = resolve_config(args.config);
  const auto outcomes = run_arms(decoder_arms(base, args.components), args.parallel, true);
  std::string csv = "arm,kind,lambda_mal,lambda_opp,seed,ap_av,ap_a,ap_v,config_hash\n";
  for (const auto& o : outcomes) {
    const RunConfig& c = o.arm.config;
    csv += o.arm.name + "," + std::string(to_string(c.decoder)) + "," + num(c.loss.mal) + "," +
           num(c.loss.opp) + "," + std::to_string(c.seed) + "," + num(o.val.ap_av) + "," +
           num(o.val.ap_a) + "," + num(o.val.ap_v) + "," + o.config_hash + "\n";
  }
  const fs::path path = args.output.empty()
                            ? fs::path(base.output_dir) /
                                  (args.components ? "ablate-components.csv" : "ablate-decoders.csv")
                            : fs::path(args.output);
  write_text(path, csv);
  out << json{{"csv", path.string()}, {"config_hash", config_hash(base)},
              {"means", summarize(outcomes)}}
             .dump()
      << '\n';
  return kExitOk;
}

int cmd_ablate_fusion(const AblateArgs& args, std::ostream& out) {
  const RunConfig base = resolve_config(args.config);
  const auto outcomes = run_arms(fusion_arms(base), args.parallel, true);
  std::string csv = "kind,layer_indices,seed,ap_av,ap_a,ap_v,wall_time,config_hash\n";
  for (const auto& o : outcomes) {
    const RunConfig& c = o.arm.config;
    csv += o.arm.name + "," + format_layers(c.fusion.layers) + "," + std::to_string(c.seed) + "," +
           num(o.val.ap_av) + "," + num(o.val.ap_a) + "," + num(o.val.ap_v) + "," +
           num(o.wall_seconds) + "," + o.config_hash + "\n";
  }
  const fs::path path = args.output.empty() ? fs::path(base.output_dir) / "ablate-fusion.csv"
                                            : fs::path(args.output);
  write_text(path, csv);
  out << json{{"csv", path.string()}, {"config_hash", config_hash(base)},
              {"means", summarize(outcomes)}}
             .dump()
      << '\n';
  return kExitOk;
}

int cmd_gradcheck(const GradSuiteOptions& options, std::ostream& out) {
  const GradSuiteReport report = run_grad_suite(options);
  char line[256];
  for (const auto& c : report.cases) {
    std::snprintf(line, sizeof(line), "%-12s %-20s instances=%-3zu max_rel=%.3e max_abs=%.3e %s\n",
                  c.module.c_str(), c.op.c_str(), c.instances, c.report.max_rel_error(),
                  c.report.max_abs_error(), c.passed() ? "PASS" : "FAIL");
    out << line;
    for (const auto& p : c.report.params) {
      if (p.passed) continue;
      std::snprintf(line, sizeof(line), "  FAIL op=%s param=%s max_rel=%.3e max_abs=%.3e\n",
                    c.op.c_str(), p.name.c_str(), p.max_rel_error, p.max_abs_error);
      out << line;
    }
  }
  out << "gradcheck: " << report.cases.size() << " cases, " << report.failures()
      << " failed\n";
  return report.passed() ? kExitOk : kExitFailure;
}

int cmd_gen_data(const GenDataArgs& args, std::ostream& out) {
  const RunConfig cfg = resolve_config(args.config);
  std::uint64_t offset = 0;
  std::size_t count = args.episodes;
  if (args.split == "train") {
    offset = cfg.splits.train_seed_offset;
    if (count == 0) count = cfg.episodes_per_batch();
  } else if (args.split == "val") {
    offset = cfg.splits.val_seed_offset;
    if (count == 0) count = cfg.splits.val_episodes;
  } else if (args.split == "test") {
    offset = cfg.splits.test_seed_offset;
    if (count == 0) count = cfg.splits.test_episodes;
  } else {
    throw ConfigError("--split must be train, val or test, got '" + args.split + "'");
  }
  const std::vector<Episode> episodes = make_episodes(cfg, offset, 0, count);
  const fs::path path = args.out_path;
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  write_episodes(path, episodes);
  const LabelBalance b = label_balance(episodes);
  const json summary = {{"config_hash", config_hash(cfg)},
                        {"file", path.string()},
                        {"format", "GFEP"},
                        {"version", kEpisodeFormatVersion},
                        {"split", args.split},
                        {"episodes", episodes.size()},
                        {"frames", b.frames},
                        {"positives", b.positives},
                        {"positive_rate", b.positive_rate()}};
  write_text(path.string() + ".json", summary.dump(2) + "\n");
  out << summary.dump() << '\n';
  return kExitOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"gatefusion: gated audio-visual fusion training and ablations"};
  app.require_subcommand(1);

  ConfigArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train one model");
  train_cmd->add_option("-c,--config", train_args.config_path, "JSON config file")->required();
  train_cmd->add_option("-o,--override", train_args.overrides, "key.path=value");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval_cmd->add_option("--checkpoint", eval_args.checkpoint, "Checkpoint directory")->required();
  eval_cmd->add_option("--data", eval_args.data, "GFEP episode file");
  eval_cmd->add_option("--split", eval_args.split, "val or test, when --data is absent");
  eval_cmd->add_option("--corrupt-audio", eval_args.corrupt_audio, "Audio noise sigma");
  eval_cmd->add_option("--corrupt-video", eval_args.corrupt_video, "Video noise sigma");
  eval_cmd->add_option("--noise-seed", eval_args.noise_seed, "Corruption seed");

  AblateArgs dec_args;
  auto* dec_cmd = app.add_subcommand("ablate-decoders", "Compare fusion decoders");
  dec_cmd->add_option("-c,--config", dec_args.config.config_path, "JSON config file")->required();
  dec_cmd->add_option("-o,--override", dec_args.config.overrides, "key.path=value");
  dec_cmd->add_option("--parallel", dec_args.parallel, "Arms run concurrently");
  dec_cmd->add_option("--output", dec_args.output, "CSV path");
  dec_cmd->add_flag("--components", dec_args.components, "HiGate/MAL/OPP on-off grid");

  AblateArgs fus_args;
  auto* fus_cmd = app.add_subcommand("ablate-fusion", "Sweep fusion layer sets");
  fus_cmd->add_option("-c,--config", fus_args.config.config_path, "JSON config file")->required();
  fus_cmd->add_option("-o,--override", fus_args.config.overrides, "key.path=value");
  fus_cmd->add_option("--parallel", fus_args.parallel, "Arms run concurrently");
  fus_cmd->add_option("--output", fus_args.output, "CSV path");

  GradSuiteOptions grad_opts;
  auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient suite");
  grad_cmd->add_option("--instances", grad_opts.instances, "Random instances per case");
  grad_cmd->add_option("--seed", grad_opts.seed, "Suite seed");
  grad_cmd->add_option("--module", grad_opts.modules, "Restrict to modules");

  GenDataArgs gen_args;
  auto* gen_cmd = app.add_subcommand("gen-data", "Write synthetic episodes (GFEP)");
  gen_cmd->add_option("-c,--config", gen_args.config.config_path, "JSON config file")->required();
  gen_cmd->add_option("-o,--override", gen_args.config.overrides, "key.path=value");
  gen_cmd->add_option("--out", gen_args.out_path, "Output file")->required();
  gen_cmd->add_option("--split", gen_args.split, "train, val or test");
  gen_cmd->add_option("--episodes", gen_args.episodes, "Episode count");

  auto error_record = [&](const char* type, const std::string& message, json extra = {}) {
    json e = {{"type", type}, {"message", message}};
    if (!extra.is_null()) e.update(extra);
    err << json{{"error", e}}.dump() << '\n';
  };

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    error_record("UsageError", e.what());
    return kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train(train_args, out);
    if (*eval_cmd) return cmd_eval(eval_args, out);
    if (*dec_cmd) return cmd_ablate_decoders(dec_args, out);
    if (*fus_cmd) return cmd_ablate_fusion(fus_args, out);
    if (*grad_cmd) return cmd_gradcheck(grad_opts, out);
    if (*gen_cmd) return cmd_gen_data(gen_args, out);
  } catch (const TrainingAborted& e) {
    error_record("TrainingAborted", e.what(),
                 {{"step", e.step()}, {"episode_seeds", e.episode_seeds()}});
    return kExitAborted;
  } catch (const ConfigError& e) {
    error_record("ConfigError", e.what());
    return kExitConfig;
  } catch (const IoError& e) {
    error_record("IoError", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    error_record("Error", e.what());
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace gatefusion::cli
