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

// Fusion-layer sweeps for the layer-count ablation.

#ifndef GATEFUSION_FUSION_PRESETS_H_
#define GATEFUSION_FUSION_PRESETS_H_

#include <cstddef>
#include <string>
#include <vector>

namespace gatefusion {

struct FusionPreset {
  std::string kind;
  std::vector<std::size_t> layers;
};

/// Reference lists for a 12-layer encoder, rescaled to `depth` with
/// ceil(i * depth / 12) and de-duplicated. The first preset ("none") has no
/// fusion points. Throws ConfigError for depth 0.
std::vector<FusionPreset> fusion_presets(std::size_t depth);

std::string format_layers(const std::vector<std::size_t>& layers);

}  // namespace gatefusion

#endif  // GATEFUSION_FUSION_PRESETS_H_
