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

// Late-fusion decoders used as comparison arms. All consume the projected
// final encoder outputs and return T_v x F features for the shared
// multimodal classifier.

#ifndef GATEFUSION_BASELINES_H_
#define GATEFUSION_BASELINES_H_

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

#include "gatefusion/layers.h"
#include "gatefusion/tensor.h"

namespace gatefusion {

enum class DecoderKind { kHiGate, kSum, kConcat, kCrossAtten };

inline constexpr std::array<DecoderKind, 4> kAllDecoderKinds = {
    DecoderKind::kHiGate, DecoderKind::kSum, DecoderKind::kConcat,
    DecoderKind::kCrossAtten};

std::string_view to_string(DecoderKind kind);
/// Accepts higate, sum, concat, crossatten. Throws ConfigError otherwise.
DecoderKind parse_decoder_kind(std::string_view name);

/// proj(align(f_a, T_v) + f_v)
Tensor sum_fuse(const Tensor& f_audio, const Tensor& f_video,
                const Linear& projection);
/// proj([align(f_a, T_v); f_v])
Tensor concat_fuse(const Tensor& f_audio, const Tensor& f_video,
                   const Linear& projection);

struct SumDecoder {
  Linear projection;  // F -> F

  static SumDecoder create(std::size_t width, ParamInit& init);
  Tensor operator()(const Tensor& f_audio, const Tensor& f_video) const;
  void collect(const std::string& prefix, ParameterList& out) const;
};

struct ConcatDecoder {
  Linear projection;  // 2F -> F

  static ConcatDecoder create(std::size_t width, ParamInit& init);
  Tensor operator()(const Tensor& f_audio, const Tensor& f_video) const;
  void collect(const std::string& prefix, ParameterList& out) const;
};

inline constexpr std::size_t kCrossAttenHeads = 4;

/// Bidirectional cross-attention, then one residual self-attention layer over
/// the concatenated streams, then a 2F -> F projection.
struct CrossAttenDecoder {
  MultiHeadAttention video_query;  // queries f_v, attends over f_a
  MultiHeadAttention audio_query;  // queries f_a, attends over f_v
  MultiHeadAttention self_attention;  // width 2F
  LayerNorm norm;                     // width 2F
  Linear projection;                  // 2F -> F

  static CrossAttenDecoder create(std::size_t width, ParamInit& init,
                                  std::size_t heads = kCrossAttenHeads);
  Tensor operator()(const Tensor& f_audio, const Tensor& f_video) const;
  void collect(const std::string& prefix, ParameterList& out) const;
};

Tensor crossatten_fuse(const Tensor& f_audio, const Tensor& f_video,
                       const CrossAttenDecoder& params);

}  // namespace gatefusion

#endif  // GATEFUSION_BASELINES_H_
