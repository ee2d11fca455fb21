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

// gatefusion command-line interface. Every subcommand is callable in-process
// so tests can drive it without spawning a shell.

#ifndef GATEFUSION_TOOLS_CLI_H_
#define GATEFUSION_TOOLS_CLI_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gatefusion/config.h"
#include "gatefusion/grad_suite.h"
#include "gatefusion/trainer.h"

namespace gatefusion::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // a check failed (gradcheck)
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitAborted = 4;
inline constexpr int kExitUsage = 64;

/// Parses argv and dispatches. Errors become one JSON line on `err`:
/// {"error": {"type": ..., "message": ...}}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct ConfigArgs {
  std::string config_path;  // empty: built-in defaults
  std::vector<std::string> overrides;
};

RunConfig resolve_config(const ConfigArgs& args);

int cmd_train(const ConfigArgs& args, std::ostream& out);

struct EvalArgs {
  std::string checkpoint;
  std::string data;            // GFEP file; empty uses the checkpoint's split
  std::string split = "val";   // val | test
  double corrupt_audio = -1.0;  // < 0: not requested
  double corrupt_video = -1.0;
  std::uint64_t noise_seed = 0;
};
int cmd_eval(const EvalArgs& args, std::ostream& out);

/// One self-contained training run of an ablation.
struct Arm {
  std::string name;
  RunConfig config;
};

struct ArmOutcome {
  Arm arm;
  EvalMetrics val;
  std::string config_hash;
  double wall_seconds = 0.0;
};

/// Trains every arm, up to `parallel` at a time; results keep arm order.
std::vector<ArmOutcome> run_arms(const std::vector<Arm>& arms, std::size_t parallel,
                                 bool write_outputs);

/// Decoder comparison (auxiliary losses off), or with `components` the
/// HiGate / MAL / OPP on-off grid.
std::vector<Arm> decoder_arms(const RunConfig& base, bool components);
std::vector<Arm> fusion_arms(const RunConfig& base);

struct AblateArgs {
  ConfigArgs config;
  std::size_t parallel = 1;
  std::string output;  // CSV path; empty: <output_dir>/<command>.csv
  bool components = false;
};
int cmd_ablate_decoders(const AblateArgs& args, std::ostream& out);
int cmd_ablate_fusion(const AblateArgs& args, std::ostream& out);

/// Prints one line per case and a per-op max relative error table.
int cmd_gradcheck(const GradSuiteOptions& options, std::ostream& out);

struct GenDataArgs {
  ConfigArgs config;
  std::string out_path;
  std::string split = "train";  // train | val | test
  std::size_t episodes = 0;     // 0: the split's configured size (train: one batch)
};
int cmd_gen_data(const GenDataArgs& args, std::ostream& out);

}  // namespace gatefusion::cli

#endif  // GATEFUSION_TOOLS_CLI_H_
