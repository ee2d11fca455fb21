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

#include "gatefusion/trainer.h"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <span>

#include <nlohmann/json.hpp>

#include "gatefusion/checkpoint.h"
#include "gatefusion/metrics.h"
#include "gatefusion/ops.h"
#include "gatefusion/optim.h"

namespace gatefusion {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::uint64_t kAudioNoiseStream = 0xA;
constexpr std::uint64_t kVideoNoiseStream = 0xB;

std::vector<double> positive_column(const Tensor& p) {
  const Matrix& v = p.value();
  std::vector<double> out(static_cast<std::size_t>(v.rows()));
  for (Eigen::Index r = 0; r < v.rows(); ++r) out[static_cast<std::size_t>(r)] = v(r, 1);
  return out;
}

json metrics_json(const EvalMetrics& m) {
  return {{"ap_av", m.ap_av}, {"ap_a", m.ap_a}, {"ap_v", m.ap_v}, {"cls", m.cls},
          {"mal", m.mal},     {"opp", m.opp},   {"total", m.total}};
}

std::map<std::string, double> metrics_map(const EvalMetrics& m) {
  return metrics_json(m).get<std::map<std::string, double>>();
}

class MetricsLog {
 public:
  MetricsLog(const fs::path& path, std::string hash) : hash_(std::move(hash)) {
    if (!path.empty()) {
      out_.open(path, std::ios::trunc);
      if (!out_) throw IoError("cannot open metrics log '" + path.string() + "'");
    }
  }
  void write(json record) {
    if (!out_.is_open()) return;
    record["config_hash"] = hash_;
    out_ << record.dump() << '\n';
  }
  void flush() {
    if (out_.is_open()) out_.flush();
  }

 private:
  std::ofstream out_;
  std::string hash_;
};

std::vector<Matrix> snapshot(const ParameterList& params) {
  std::vector<Matrix> values;
  values.reserve(params.size());
  for (const auto& p : params) values.push_back(p.tensor.value());
  return values;
}

}  // namespace

TrainingAborted::TrainingAborted(std::uint64_t step, std::vector<std::uint64_t> seeds,
                                 const std::string& what)
    : EvaluationError(what), step_(step), seeds_(std::move(seeds)) {}

std::vector<Episode> make_episodes(const RunConfig& cfg, std::uint64_t offset,
                                   std::uint64_t first, std::size_t count) {
  std::vector<Episode> episodes;
  episodes.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    episodes.push_back(
        generate_episode(cfg.data, episode_seed(cfg.seed, offset, first + i)));
  }
  return episodes;
}

std::vector<Episode> validation_split(const RunConfig& cfg) {
  return make_episodes(cfg, cfg.splits.val_seed_offset, 0, cfg.splits.val_episodes);
}

std::vector<Episode> test_split(const RunConfig& cfg) {
  return make_episodes(cfg, cfg.splits.test_seed_offset, 0, cfg.splits.test_episodes);
}

EvalMetrics evaluate(const GateFusionModel& model, const std::vector<Episode>& episodes,
                     const LossWeights& weights, const EvalOptions& options) {
  if (episodes.empty()) throw EvaluationError("evaluate: no episodes");
  NoGradGuard no_grad;
  std::vector<PredictionBundle> bundles;
  FrameLabels labels;
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    const Episode& ep = episodes[i];
    const Matrix audio =
        corrupt(ep.audio, options.audio_sigma,
                episode_seed(options.noise_seed, kAudioNoiseStream, i));
    const Matrix video =
        corrupt(ep.video, options.video_sigma,
                episode_seed(options.noise_seed, kVideoNoiseStream, i));
    bundles.push_back(model.forward(audio, video).predictions);
    labels.append(ep.labels);
  }
  const PredictionBundle all = PredictionBundle::concat(bundles);
  const LossTerms losses = compute_losses(all, labels, weights);

  EvalMetrics m;
  m.ap_av = average_precision(positive_column(all.p_av_live), labels.y);
  m.ap_a = average_precision(positive_column(all.p_a), labels.y);
  m.ap_v = average_precision(positive_column(all.p_v), labels.y);
  m.cls = losses.cls.item();
  m.mal = losses.mal.item();
  m.opp = losses.opp.item();
  m.total = losses.total.item();
  return m;
}

LoadedModel load_model(const fs::path& checkpoint_dir) {
  const CheckpointManifest manifest = read_manifest(checkpoint_dir);
  LoadedModel loaded;
  try {
    loaded.config = parse_run_config(manifest.config_json, {}, /*use_env=*/false);
  } catch (const ConfigError& e) {
    throw IoError("checkpoint '" + checkpoint_dir.string() +
                  "' has an invalid config: " + e.what());
  }
  loaded.model = std::make_unique<GateFusionModel>(loaded.config.model_config(),
                                                   loaded.config.seed);
  load_checkpoint(checkpoint_dir, loaded.model->parameters());
  loaded.step = manifest.step;
  return loaded;
}

TrainResult train(const RunConfig& cfg, const TrainOptions& options) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();

  TrainResult result;
  result.config_hash = config_hash(cfg);
  const fs::path out_dir = cfg.output_dir;
  if (options.write_outputs) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output dir '" + out_dir.string() + "': " + ec.message());
  }
  MetricsLog log(options.write_outputs ? out_dir / "metrics.jsonl" : fs::path(),
                 result.config_hash);
  auto model = std::make_shared<GateFusionModel>(cfg.model_config(), cfg.seed);
  log.write({{"event", "config"},
             {"config", json::parse(to_json(cfg))},
             {"parameter_count", model->parameter_count()}});

  const ParameterGroups groups = model->parameter_groups();
  const ParameterList params = model->parameters();
  AdamW optimizer({cfg.train.beta1, cfg.train.beta2, cfg.train.eps, cfg.train.weight_decay});
  const std::vector<Episode> val = validation_split(cfg);
  const std::size_t per_batch = cfg.episodes_per_batch();

  std::vector<Matrix> best_values;
  result.best_val.metrics.ap_av = -1.0;

  auto run_eval = [&](std::uint64_t step) {
    const EvalMetrics m = evaluate(*model, val, cfg.loss);
    result.evals.push_back({step, m});
    json rec = metrics_json(m);
    rec["event"] = "eval";
    rec["step"] = step;
    rec["split"] = "val";
    log.write(std::move(rec));
    if (m.ap_av > result.best_val.metrics.ap_av) {
      result.best_val = {step, m};
      if (options.write_outputs) best_values = snapshot(params);
    }
    result.final_val = m;
  };

  for (std::uint64_t step = 1; step <= cfg.train.steps; ++step) {
    const std::uint64_t first = (step - 1) * per_batch;
    std::vector<std::uint64_t> seeds;
    std::vector<PredictionBundle> bundles;
    FrameLabels labels;
    for (std::size_t j = 0; j < per_batch; ++j) {
      seeds.push_back(episode_seed(cfg.seed, cfg.splits.train_seed_offset, first + j));
      const Episode ep = generate_episode(cfg.data, seeds.back());
      bundles.push_back(model->forward(ep.audio, ep.video).predictions);
      labels.append(ep.labels);
    }
    const LossTerms losses =
        compute_losses(PredictionBundle::concat(bundles), labels, cfg.loss);

    StepRecord rec;
    rec.step = step;
    rec.cls = losses.cls.item();
    rec.mal = losses.mal.item();
    rec.opp = losses.opp.item();
    rec.total = losses.total.item();
    rec.lr_encoder = lr_schedule(step - 1, cfg.train.lr_encoder, cfg.train.decay,
                                 cfg.train.decay_interval);
    rec.lr_decoder = lr_schedule(step - 1, cfg.train.lr_decoder, cfg.train.decay,
                                 cfg.train.decay_interval);
    if (!std::isfinite(rec.total)) {
      json seed_list = seeds;
      const std::string msg = "non-finite loss at step " + std::to_string(step);
      log.write({{"event", "error"},
                 {"step", step},
                 {"message", msg},
                 {"episode_seeds", seed_list}});
      log.flush();
      throw TrainingAborted(step, seeds, msg + "; batch episode seeds " + seed_list.dump());
    }

    for (const auto& p : params) {
      Tensor handle = p.tensor;
      handle.zero_grad();
    }
    losses.total.backward();
    const ParamGroup step_groups[] = {{groups.encoder, rec.lr_encoder},
                                      {groups.decoder, rec.lr_decoder}};
    rec.applied = optimizer.step(step_groups) == StepStatus::kApplied;
    result.steps.push_back(rec);
    log.write({{"event", "step"},
               {"step", step},
               {"cls", rec.cls},
               {"mal", rec.mal},
               {"opp", rec.opp},
               {"total", rec.total},
               {"lr_encoder", rec.lr_encoder},
               {"lr_decoder", rec.lr_decoder},
               {"status", rec.applied ? "applied" : "rejected_non_finite"}});

    if (step % cfg.train.eval_interval == 0 || step == cfg.train.steps) run_eval(step);
  }
  if (cfg.train.steps == 0) run_eval(0);

  if (options.write_outputs) {
    const fs::path ckpt = out_dir / "checkpoints";
    const std::string config_json = to_json(cfg);
    save_checkpoint(ckpt / "final", params,
                    {result.config_hash, cfg.train.steps, metrics_map(result.final_val),
                     config_json});
    const std::vector<Matrix> final_values = snapshot(params);
    for (std::size_t i = 0; i < params.size(); ++i) {
      Tensor handle = params[i].tensor;
      handle.mutable_value() = best_values[i];
    }
    save_checkpoint(ckpt / "best", params,
                    {result.config_hash, result.best_val.step,
                     metrics_map(result.best_val.metrics), config_json});
    for (std::size_t i = 0; i < params.size(); ++i) {
      Tensor handle = params[i].tensor;
      handle.mutable_value() = final_values[i];
    }
  }
  log.flush();
  // The model keeps no graph from the last step.
  for (const auto& p : params) {
    Tensor handle = p.tensor;
    handle.zero_grad();
  }
  result.model = std::move(model);
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace gatefusion
