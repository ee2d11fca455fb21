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

#include "gatefusion/fusion_presets.h"

#include <algorithm>

#include "gatefusion/errors.h"

namespace gatefusion {
namespace {

constexpr std::size_t kReferenceDepth = 12;

struct Reference {
  const char* kind;
  std::vector<std::size_t> layers;
};

const std::vector<Reference>& references() {
  static const std::vector<Reference> refs = {
      {"none", {}},
      {"single-deep", {10}},
      {"spaced-2", {7, 10}},
      {"spaced-3", {4, 7, 10}},
      {"spaced-4", {1, 4, 7, 10}},
      {"spaced-6", {1, 3, 5, 7, 9, 11}},
      {"dense", {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12}},
  };
  return refs;
}

}  // namespace

std::vector<FusionPreset> fusion_presets(std::size_t depth) {
  if (depth == 0) throw ConfigError("fusion presets need an encoder depth >= 1");
  std::vector<FusionPreset> out;
  for (const auto& ref : references()) {
    FusionPreset p{ref.kind, {}};
    for (const auto i : ref.layers) {
      const std::size_t scaled = (i * depth + kReferenceDepth - 1) / kReferenceDepth;
      if (p.layers.empty() || p.layers.back() != scaled) p.layers.push_back(scaled);
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::string format_layers(const std::vector<std::size_t>& layers) {
  std::string s = "[";
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (i > 0) s += ' ';
    s += std::to_string(layers[i]);
  }
  return s + "]";
}

}  // namespace gatefusion
