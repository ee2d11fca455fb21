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

#include "gatefusion/higate.h"

namespace gatefusion {

std::string_view to_string(GateMode mode) {
  return mode == GateMode::kScalar ? "scalar" : "vector";
}

GateMode parse_gate_mode(std::string_view name) {
  if (name == "vector") return GateMode::kVector;
  if (name == "scalar") return GateMode::kScalar;
  throw ConfigError("unknown gate mode '" + std::string(name) +
                    "' (expected vector or scalar)");
}

void FusionSpec::validate(std::size_t depth) const {
  if (width == 0) throw ConfigError("fusion width must be positive");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i] < 1 || layers[i] > depth) {
      throw ConfigError("fusion layer " + std::to_string(layers[i]) +
                        " is outside the encoder depth [1, " +
                        std::to_string(depth) + "]");
    }
    if (i > 0 && layers[i] <= layers[i - 1]) {
      throw ConfigError("fusion layers must be strictly increasing");
    }
  }
}

std::vector<RowBin> align_bins(std::size_t t_in, std::size_t t_target) {
  if (t_in == 0 || t_target == 0) {
    throw DimensionError("align: frame counts must be positive");
  }
  std::vector<RowBin> bins(t_target);
  for (std::size_t i = 0; i < t_target; ++i) {
    if (t_target <= t_in) {
      bins[i] = {i * t_in / t_target, (i + 1) * t_in / t_target};
    } else {
      const std::size_t src = i * t_in / t_target;
      bins[i] = {src, src + 1};
    }
  }
  return bins;
}

Tensor align(const Tensor& x, std::size_t t_target) {
  if (x.rows() == t_target) return x;
  const auto bins = align_bins(x.rows(), t_target);
  return pool_rows(x, bins);
}

GateUnit GateUnit::create(std::size_t width, GateMode mode, ParamInit& init) {
  const std::size_t out = mode == GateMode::kScalar ? 1 : width;
  return GateUnit{Linear::create(2 * width, out, init)};
}

void GateUnit::collect(const std::string& prefix, ParameterList& out) const {
  linear.collect(prefix, out);
}

Tensor project(const Tensor& h, const Linear& projection) {
  return projection(h);
}

Tensor gate(const Tensor& f_p, const Tensor& h_c, const GateUnit& unit) {
  return sigmoid(unit.linear(concat_cols(f_p, h_c)));
}

Tensor fuse_step(const Tensor& f_p, const Tensor& h_c, const Tensor& g,
                 const LayerNorm& norm) {
  return norm(add(f_p, mul(h_c, g)));
}

Tensor combine(const Tensor& fused_audio, const Tensor& fused_video) {
  return add(align(fused_audio, fused_video.rows()), fused_video);
}

HiGateDirection HiGateDirection::create(const FusionSpec& spec,
                                        std::size_t context_width,
                                        ParamInit& init) {
  HiGateDirection d;
  d.steps.reserve(spec.layers.size());
  for (const std::size_t layer : spec.layers) {
    FusionStep step;
    step.layer = layer;
    step.context_projection = Linear::create(context_width, spec.width, init);
    step.gate = GateUnit::create(spec.width, spec.gate_mode, init);
    step.norm = LayerNorm::create(spec.width, init);
    d.steps.push_back(std::move(step));
  }
  return d;
}

Tensor HiGateDirection::forward(const Tensor& primary,
                                const HiddenStack& context) const {
  Tensor f = primary;
  for (const auto& step : steps) {
    if (step.layer >= context.size()) {
      throw ConfigError("fusion layer " + std::to_string(step.layer) +
                        " exceeds context depth " +
                        std::to_string(context.size() - 1));
    }
    const Tensor c =
        align(project(context[step.layer], step.context_projection), f.rows());
    const Tensor g = gate(f, c, step.gate);
    f = fuse_step(f, c, g, step.norm);
  }
  return f;
}

void HiGateDirection::collect(const std::string& prefix,
                              ParameterList& out) const {
  for (const auto& step : steps) {
    const std::string p = prefix + ".layer" + std::to_string(step.layer);
    step.context_projection.collect(p + ".context_proj", out);
    step.gate.collect(p + ".gate", out);
    step.norm.collect(p + ".norm", out);
  }
}

HiGateDecoder::HiGateDecoder(const FusionSpec& spec, std::size_t audio_width,
                             std::size_t video_width, ParamInit& init)
    : spec_(spec) {
  audio_primary_ = HiGateDirection::create(spec, video_width, init);
  video_primary_ = HiGateDirection::create(spec, audio_width, init);
}

Tensor HiGateDecoder::forward_direction(Direction direction,
                                        const Tensor& primary,
                                        const HiddenStack& context) const {
  const HiGateDirection& d =
      direction == Direction::kAudioPrimary ? audio_primary_ : video_primary_;
  return d.forward(primary, context);
}

HiGateOutput HiGateDecoder::forward(const Tensor& f_audio,
                                    const Tensor& f_video,
                                    const HiddenStack& audio_stack,
                                    const HiddenStack& video_stack) const {
  HiGateOutput out;
  out.fused_audio = audio_primary_.forward(f_audio, video_stack);
  out.fused_video = video_primary_.forward(f_video, audio_stack);
  out.combined = combine(out.fused_audio, out.fused_video);
  return out;
}

void HiGateDecoder::collect(const std::string& prefix,
                            ParameterList& out) const {
  audio_primary_.collect(prefix + ".audio_primary", out);
  video_primary_.collect(prefix + ".video_primary", out);
}

}  // namespace gatefusion
