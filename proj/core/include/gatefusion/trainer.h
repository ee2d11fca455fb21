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

// Training loop and evaluation.
//
// metrics.jsonl holds one JSON object per line, each with "event" and
// "config_hash":
//   {"event": "config", "config": {...}, "parameter_count"}
//   {"event": "step", "step", "cls", "mal", "opp", "total",
//    "lr_encoder", "lr_decoder", "status": "applied" | "rejected_non_finite"}
//   {"event": "eval", "step", "split": "val", "ap_av", "ap_a", "ap_v",
//    "cls", "mal", "opp", "total"}
//   {"event": "error", "step", "message", "episode_seeds"}
// Checkpoints go to <output_dir>/checkpoints/{final,best}.

#ifndef GATEFUSION_TRAINER_H_
#define GATEFUSION_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "gatefusion/config.h"
#include "gatefusion/errors.h"
#include "gatefusion/model.h"
#include "gatefusion/synthdata.h"

namespace gatefusion {

struct EvalMetrics {
  double ap_av = 0.0;
  double ap_a = 0.0;
  double ap_v = 0.0;
  double cls = 0.0;
  double mal = 0.0;
  double opp = 0.0;
  double total = 0.0;
};

struct EvalOptions {
  double audio_sigma = 0.0;
  double video_sigma = 0.0;
  std::uint64_t noise_seed = 0;
};

/// Deterministic metrics of `model` on `episodes`; scores are p[:, 1].
/// Runs without building a graph.
EvalMetrics evaluate(const GateFusionModel& model,
                     const std::vector<Episode>& episodes,
                     const LossWeights& weights, const EvalOptions& options = {});

/// Rebuilds the model recorded in a checkpoint directory and loads it.
/// Throws IoError if the checkpoint is missing or malformed.
struct LoadedModel {
  RunConfig config;
  std::unique_ptr<GateFusionModel> model;
  std::uint64_t step = 0;
};
LoadedModel load_model(const std::filesystem::path& checkpoint_dir);

/// Episodes [offset + first, offset + first + count) of the run's stream.
std::vector<Episode> make_episodes(const RunConfig& cfg, std::uint64_t offset,
                                   std::uint64_t first, std::size_t count);
std::vector<Episode> validation_split(const RunConfig& cfg);
std::vector<Episode> test_split(const RunConfig& cfg);

struct StepRecord {
  std::uint64_t step = 0;
  double cls = 0.0;
  double mal = 0.0;
  double opp = 0.0;
  double total = 0.0;
  double lr_encoder = 0.0;
  double lr_decoder = 0.0;
  bool applied = true;
};

struct EvalRecord {
  std::uint64_t step = 0;
  EvalMetrics metrics;
};

struct TrainResult {
  std::string config_hash;
  std::vector<StepRecord> steps;
  std::vector<EvalRecord> evals;
  EvalMetrics final_val;
  EvalRecord best_val;
  std::shared_ptr<GateFusionModel> model;  // final parameters
  double wall_seconds = 0.0;
};

/// Raised when the loss turns non-finite. Carries the offending step and
/// the seeds of the episodes in its batch.
class TrainingAborted : public EvaluationError {
 public:
  TrainingAborted(std::uint64_t step, std::vector<std::uint64_t> seeds,
                  const std::string& what);
  std::uint64_t step() const { return step_; }
  const std::vector<std::uint64_t>& episode_seeds() const { return seeds_; }

 private:
  std::uint64_t step_;
  std::vector<std::uint64_t> seeds_;
};

struct TrainOptions {
  /// Write metrics.jsonl and checkpoints under cfg.output_dir.
  bool write_outputs = true;
};

TrainResult train(const RunConfig& cfg, const TrainOptions& options = {});

}  // namespace gatefusion

#endif  // GATEFUSION_TRAINER_H_
