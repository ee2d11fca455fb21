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

// Hierarchical gated fusion decoder.
//
// For each selected context layer l (ascending), the primary feature f is
// refined as
//
//   c = align(project_l(h_c^l), T_p)
//   g = sigmoid(W_g [f; c] + b_g)
//   f = LN_l(f + g * c)
//
// Both directions (audio-primary and video-primary) run with independent
// parameters; `combine` merges them on the video frame grid.

#ifndef GATEFUSION_HIGATE_H_
#define GATEFUSION_HIGATE_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "gatefusion/encoder.h"
#include "gatefusion/layers.h"
#include "gatefusion/ops.h"
#include "gatefusion/tensor.h"

namespace gatefusion {

enum class GateMode {
  kVector,  // one gate per feature
  kScalar,  // one gate per frame, broadcast over features
};

std::string_view to_string(GateMode mode);
GateMode parse_gate_mode(std::string_view name);

enum class Direction { kAudioPrimary, kVideoPrimary };

struct FusionSpec {
  /// Strictly increasing encoder layer indices in [1, depth].
  std::vector<std::size_t> layers;
  std::size_t width = 32;
  GateMode gate_mode = GateMode::kVector;

  /// Throws ConfigError unless indices are strictly increasing and lie in
  /// [1, depth].
  void validate(std::size_t depth) const;
};

/// Pooling bins for resampling T_in rows onto T_target rows. Downsampling
/// averages floor-boundary bins; upsampling replicates row floor(i*T_in/T).
std::vector<RowBin> align_bins(std::size_t t_in, std::size_t t_target);
Tensor align(const Tensor& x, std::size_t t_target);

struct GateUnit {
  Linear linear;  // 2F -> F (vector) or 2F -> 1 (scalar)

  static GateUnit create(std::size_t width, GateMode mode, ParamInit& init);
  void collect(const std::string& prefix, ParameterList& out) const;
};

Tensor project(const Tensor& h, const Linear& projection);
/// sigmoid(W_g [f_p; h_c] + b_g), every entry in (0, 1).
Tensor gate(const Tensor& f_p, const Tensor& h_c, const GateUnit& unit);
/// LN(f_p + g * h_c). `g` may be T x F or T x 1.
Tensor fuse_step(const Tensor& f_p, const Tensor& h_c, const Tensor& g,
                 const LayerNorm& norm);
/// align(f_a, T_v) + f_v.
Tensor combine(const Tensor& fused_audio, const Tensor& fused_video);

struct FusionStep {
  std::size_t layer = 0;
  Linear context_projection;
  GateUnit gate;
  LayerNorm norm;
};

/// Parameters for one fusion direction.
struct HiGateDirection {
  std::vector<FusionStep> steps;

  static HiGateDirection create(const FusionSpec& spec,
                                std::size_t context_width, ParamInit& init);
  /// Refines `primary` with the selected layers of `context`. Throws
  /// ConfigError if a fusion index exceeds the context depth. With no steps
  /// the input handle is returned unchanged.
  Tensor forward(const Tensor& primary, const HiddenStack& context) const;
  void collect(const std::string& prefix, ParameterList& out) const;
};

struct HiGateOutput {
  Tensor fused_audio;  // T_a x F
  Tensor fused_video;  // T_v x F
  Tensor combined;     // T_v x F
};

class HiGateDecoder {
 public:
  HiGateDecoder() = default;
  HiGateDecoder(const FusionSpec& spec, std::size_t audio_width,
                std::size_t video_width, ParamInit& init);

  Tensor forward_direction(Direction direction, const Tensor& primary,
                           const HiddenStack& context) const;
  HiGateOutput forward(const Tensor& f_audio, const Tensor& f_video,
                       const HiddenStack& audio_stack,
                       const HiddenStack& video_stack) const;

  HiGateDirection& direction(Direction d) {
    return d == Direction::kAudioPrimary ? audio_primary_ : video_primary_;
  }
  const FusionSpec& spec() const { return spec_; }
  void collect(const std::string& prefix, ParameterList& out) const;

 private:
  FusionSpec spec_;
  HiGateDirection audio_primary_;  // context: video hidden states
  HiGateDirection video_primary_;  // context: audio hidden states
};

}  // namespace gatefusion

#endif  // GATEFUSION_HIGATE_H_
