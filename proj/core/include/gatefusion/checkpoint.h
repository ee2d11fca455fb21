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

// Checkpoint directories.
//
//   <dir>/manifest.json   {"format": "gatefusion-checkpoint", "version": 1,
//                          "config_hash", "step", "metrics", "config",
//                          "parameters": [{"name", "file", "rows", "cols"}]}
//   <dir>/<name>.bin      "GFTN" u32 version, u32 rank (2), u64 rows,
//                         u64 cols, then rows * cols little-endian f64
//                         values in row-major order.

#ifndef GATEFUSION_CHECKPOINT_H_
#define GATEFUSION_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "gatefusion/tensor.h"

namespace gatefusion {

inline constexpr std::uint32_t kTensorFormatVersion = 1;

struct CheckpointManifest {
  std::string config_hash;
  std::uint64_t step = 0;
  std::map<std::string, double> metrics;
  std::string config_json;  // resolved RunConfig, compact
};

void write_tensor_file(const std::filesystem::path& path, const Matrix& m);
Matrix read_tensor_file(const std::filesystem::path& path);

/// Creates or replaces `dir`.
void save_checkpoint(const std::filesystem::path& dir,
                     const ParameterList& params,
                     const CheckpointManifest& manifest);

CheckpointManifest read_manifest(const std::filesystem::path& dir);

/// Overwrites every parameter value in place. Throws IoError when the
/// directory, a file or a parameter is missing, or a shape disagrees.
CheckpointManifest load_checkpoint(const std::filesystem::path& dir,
                                   const ParameterList& params);

}  // namespace gatefusion

#endif  // GATEFUSION_CHECKPOINT_H_
