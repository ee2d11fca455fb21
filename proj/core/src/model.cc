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

#include "gatefusion/model.h"

#include <algorithm>

#include "gatefusion/ops.h"

namespace gatefusion {

void ModelConfig::validate() const {
  audio.validate();
  video.validate();
  // Audio-primary fusion reads video hidden states and vice versa.
  fusion.validate(std::min(audio.layers, video.layers));
}

GateFusionModel::GateFusionModel(const ModelConfig& cfg, std::uint64_t seed)
    : cfg_(cfg) {
  cfg_.validate();
  // One generator, fixed draw order: every initial value follows from seed.
  ParamInit init(seed);
  audio_encoder_ = Encoder(cfg_.audio, init);
  video_encoder_ = Encoder(cfg_.video, init);
  const std::size_t width = cfg_.fusion.width;
  audio_projection_ = Linear::create(cfg_.audio.width, width, init);
  video_projection_ = Linear::create(cfg_.video.width, width, init);
  switch (cfg_.decoder) {
    case DecoderKind::kHiGate:
      decoder_ = HiGateDecoder(cfg_.fusion, cfg_.audio.width, cfg_.video.width,
                               init);
      break;
    case DecoderKind::kSum:
      decoder_ = SumDecoder::create(width, init);
      break;
    case DecoderKind::kConcat:
      decoder_ = ConcatDecoder::create(width, init);
      break;
    case DecoderKind::kCrossAtten:
      decoder_ = CrossAttenDecoder::create(width, init);
      break;
  }
  av_head_ = AvClassifier::create(width, init);
  audio_head_ = UniClassifier::create(width, init);
  video_head_ = UniClassifier::create(width, init);
}

ModelOutput GateFusionModel::forward(const Tensor& audio,
                                     const Tensor& video) const {
  const HiddenStack audio_stack = audio_encoder_.encode(audio);
  const HiddenStack video_stack = video_encoder_.encode(video);

  ModelOutput out;
  out.f_audio = audio_projection_(audio_stack.back());
  out.f_video = video_projection_(video_stack.back());
  out.fused = std::visit(
      [&](const auto& decoder) -> Tensor {
        using D = std::decay_t<decltype(decoder)>;
        if constexpr (std::is_same_v<D, HiGateDecoder>) {
          return decoder.forward(out.f_audio, out.f_video, audio_stack,
                                 video_stack)
              .combined;
        } else {
          return decoder(out.f_audio, out.f_video);
        }
      },
      decoder_);
  out.logits_av = av_head_(out.fused);
  // Unimodal heads read the pre-fusion features.
  const Tensor logits_a = audio_head_(align(out.f_audio, out.f_video.rows()));
  const Tensor logits_v = video_head_(out.f_video);
  out.predictions =
      PredictionBundle::from_logits(out.logits_av, logits_a, logits_v);
  return out;
}

ModelOutput GateFusionModel::forward(const Matrix& audio,
                                     const Matrix& video) const {
  return forward(Tensor::constant(audio), Tensor::constant(video));
}

ParameterGroups GateFusionModel::parameter_groups() const {
  ParameterGroups groups;
  audio_encoder_.collect("encoder.audio", groups.encoder);
  video_encoder_.collect("encoder.video", groups.encoder);
  audio_projection_.collect("proj.audio", groups.decoder);
  video_projection_.collect("proj.video", groups.decoder);
  std::visit([&](const auto& d) { d.collect("decoder", groups.decoder); },
             decoder_);
  av_head_.collect("head.av", groups.decoder);
  audio_head_.collect("head.audio", groups.decoder);
  video_head_.collect("head.video", groups.decoder);
  return groups;
}

ParameterList GateFusionModel::parameters() const {
  ParameterGroups groups = parameter_groups();
  ParameterList all = std::move(groups.encoder);
  all.insert(all.end(), groups.decoder.begin(), groups.decoder.end());
  return all;
}

std::size_t GateFusionModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : parameters()) {
    n += static_cast<std::size_t>(p.tensor.value().size());
  }
  return n;
}

HiGateDecoder* GateFusionModel::higate() {
  return std::get_if<HiGateDecoder>(&decoder_);
}

}  // namespace gatefusion
