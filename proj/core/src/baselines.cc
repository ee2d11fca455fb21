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

#include "gatefusion/baselines.h"

#include "gatefusion/errors.h"
#include "gatefusion/higate.h"
#include "gatefusion/ops.h"

namespace gatefusion {

std::string_view to_string(DecoderKind kind) {
  switch (kind) {
    case DecoderKind::kHiGate:
      return "higate";
    case DecoderKind::kSum:
      return "sum";
    case DecoderKind::kConcat:
      return "concat";
    case DecoderKind::kCrossAtten:
      return "crossatten";
  }
  return "unknown";
}

DecoderKind parse_decoder_kind(std::string_view name) {
  for (const DecoderKind kind : kAllDecoderKinds) {
    if (name == to_string(kind)) return kind;
  }
  throw ConfigError("unknown decoder '" + std::string(name) +
                    "' (expected higate, sum, concat or crossatten)");
}

Tensor sum_fuse(const Tensor& f_audio, const Tensor& f_video,
                const Linear& projection) {
  return projection(add(align(f_audio, f_video.rows()), f_video));
}

Tensor concat_fuse(const Tensor& f_audio, const Tensor& f_video,
                   const Linear& projection) {
  return projection(concat_cols(align(f_audio, f_video.rows()), f_video));
}

SumDecoder SumDecoder::create(std::size_t width, ParamInit& init) {
  return SumDecoder{Linear::create(width, width, init)};
}

Tensor SumDecoder::operator()(const Tensor& f_audio,
                              const Tensor& f_video) const {
  return sum_fuse(f_audio, f_video, projection);
}

void SumDecoder::collect(const std::string& prefix, ParameterList& out) const {
  projection.collect(prefix + ".proj", out);
}

ConcatDecoder ConcatDecoder::create(std::size_t width, ParamInit& init) {
  return ConcatDecoder{Linear::create(2 * width, width, init)};
}

Tensor ConcatDecoder::operator()(const Tensor& f_audio,
                                 const Tensor& f_video) const {
  return concat_fuse(f_audio, f_video, projection);
}

void ConcatDecoder::collect(const std::string& prefix,
                            ParameterList& out) const {
  projection.collect(prefix + ".proj", out);
}

CrossAttenDecoder CrossAttenDecoder::create(std::size_t width,
                                            ParamInit& init,
                                            std::size_t heads) {
  CrossAttenDecoder d;
  d.video_query = MultiHeadAttention::create(width, heads, init);
  d.audio_query = MultiHeadAttention::create(width, heads, init);
  d.self_attention = MultiHeadAttention::create(2 * width, heads, init);
  d.norm = LayerNorm::create(2 * width, init);
  d.projection = Linear::create(2 * width, width, init);
  return d;
}

Tensor crossatten_fuse(const Tensor& f_audio, const Tensor& f_video,
                       const CrossAttenDecoder& params) {
  const Tensor x_video = params.video_query(f_video, f_audio);
  const Tensor x_audio =
      align(params.audio_query(f_audio, f_video), f_video.rows());
  const Tensor joint = concat_cols(x_audio, x_video);
  const Tensor mixed = params.norm(add(joint, params.self_attention(joint, joint)));
  return params.projection(mixed);
}

Tensor CrossAttenDecoder::operator()(const Tensor& f_audio,
                                     const Tensor& f_video) const {
  return crossatten_fuse(f_audio, f_video, *this);
}

void CrossAttenDecoder::collect(const std::string& prefix,
                                ParameterList& out) const {
  video_query.collect(prefix + ".video_query", out);
  audio_query.collect(prefix + ".audio_query", out);
  self_attention.collect(prefix + ".self_attn", out);
  norm.collect(prefix + ".norm", out);
  projection.collect(prefix + ".proj", out);
}

}  // namespace gatefusion
