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

// Run configuration: JSON schema, validation, overrides and the canonical
// hash stamped into every output artifact.
//
// {
//   "seed": 1,
//   "output_dir": "runs/default",
//   "decoder": "higate",                       // higate|sum|concat|crossatten
//   "encoder": {"layers": 6, "width": 32, "heads": 4, "ffn_mult": 2},
//   "fusion":  {"layers": [1, 2, 4, 6], "width": 32, "gate": "vector"},
//   "loss":    {"lambda_mal": 0.01, "lambda_opp": 0.1},
//   "data":    {"video_frames": 64, "rate": 4, "audio_width": 8,
//               "video_width": 8, "p_speech": 0.4,
//               "p_distractor_video": 0.3, "p_distractor_audio": 0.3,
//               "noise_sigma": 0.5, "train_seed_offset": 0,
//               "val_seed_offset": 1000000, "test_seed_offset": 2000000,
//               "val_episodes": 16, "test_episodes": 16},
//   "train":   {"steps": 2000, "batch_frames": 256, "lr_encoder": 5e-5,
//               "lr_decoder": 1e-4, "decay": 0.95, "decay_interval": 300,
//               "weight_decay": 0.01, "beta1": 0.9, "beta2": 0.999,
//               "eps": 1e-8, "eval_interval": 100},
//   "ablation": {"seeds": [1, 2, 3, 4, 5],
//                "decoders": ["higate", "sum", "concat", "crossatten"],
//                "noise_sigma": 1.0}
// }
//
// Every key is optional; unknown keys are rejected.

#ifndef GATEFUSION_CONFIG_H_
#define GATEFUSION_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gatefusion/baselines.h"
#include "gatefusion/encoder.h"
#include "gatefusion/higate.h"
#include "gatefusion/losses.h"
#include "gatefusion/model.h"
#include "gatefusion/synthdata.h"

namespace gatefusion {

struct EncoderSettings {
  std::size_t layers = 6;
  std::size_t width = 32;
  std::size_t heads = 4;
  std::size_t ffn_mult = 2;
};

struct DataSplits {
  std::uint64_t train_seed_offset = 0;
  std::uint64_t val_seed_offset = 1'000'000;
  std::uint64_t test_seed_offset = 2'000'000;
  std::size_t val_episodes = 16;
  std::size_t test_episodes = 16;
};

struct TrainConfig {
  std::size_t steps = 2000;
  std::size_t batch_frames = 256;
  double lr_encoder = 5e-5;
  double lr_decoder = 1e-4;
  double decay = 0.95;
  std::size_t decay_interval = 300;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t eval_interval = 100;

  void validate() const;
};

struct AblationSettings {
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::vector<DecoderKind> decoders = {kAllDecoderKinds.begin(),
                                       kAllDecoderKinds.end()};
  /// Audio corruption strength for robustness comparisons.
  double noise_sigma = 1.0;
};

struct RunConfig {
  std::uint64_t seed = 1;
  std::string output_dir = "runs/default";
  DecoderKind decoder = DecoderKind::kHiGate;
  EncoderSettings encoder;
  FusionSpec fusion{{1, 2, 4, 6}, 32, GateMode::kVector};
  LossWeights loss;
  EpisodeConfig data;
  DataSplits splits;
  TrainConfig train;
  AblationSettings ablation;

  /// Throws ConfigError with an actionable message.
  void validate() const;
  ModelConfig model_config() const;
  /// Whole episodes packed per optimizer step (at least one).
  std::size_t episodes_per_batch() const;
};

/// Parses JSON text, applies `key.path=value` overrides in order, then the
/// GATEFUSION_SEED environment variable if `use_env` is set, and validates.
RunConfig parse_run_config(std::string_view json_text,
                           const std::vector<std::string>& overrides = {},
                           bool use_env = true);
/// Reads a config file. Throws IoError naming the path if unreadable.
RunConfig load_run_config(const std::filesystem::path& path,
                          const std::vector<std::string>& overrides = {},
                          bool use_env = true);

/// Applies one `key.path=value` override to an already-resolved config.
RunConfig with_override(const RunConfig& cfg, std::string_view assignment);

/// Fully resolved config as JSON with sorted keys.
std::string to_json(const RunConfig& cfg, int indent = -1);
/// 16 hex digits identifying the resolved config, ignoring output_dir.
std::string config_hash(const RunConfig& cfg);

}  // namespace gatefusion

#endif  // GATEFUSION_CONFIG_H_
