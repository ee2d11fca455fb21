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

// End-to-end audio-visual speaker model: two encoders, final projections,
// a fusion decoder and the three classifier heads.

#ifndef GATEFUSION_MODEL_H_
#define GATEFUSION_MODEL_H_

#include <cstdint>
#include <string>
#include <type_traits>
#include <variant>

#include "gatefusion/baselines.h"
#include "gatefusion/encoder.h"
#include "gatefusion/higate.h"
#include "gatefusion/losses.h"
#include "gatefusion/tensor.h"

namespace gatefusion {

struct ModelConfig {
  EncoderConfig audio;
  EncoderConfig video;
  FusionSpec fusion;
  DecoderKind decoder = DecoderKind::kHiGate;

  void validate() const;
};

/// Parameters split by learning-rate group.
struct ParameterGroups {
  ParameterList encoder;  // both encoders
  ParameterList decoder;  // projections, fusion decoder, classifier heads
};

struct ModelOutput {
  Tensor f_audio;   // T_a x F, pre-fusion
  Tensor f_video;   // T_v x F, pre-fusion
  Tensor fused;     // T_v x F, decoder output fed to the AV classifier
  Tensor logits_av;
  PredictionBundle predictions;
};

class GateFusionModel {
 public:
  GateFusionModel(const ModelConfig& cfg, std::uint64_t seed);

  /// audio: T_a x D_a, video: T_v x D_v (constants or tensors).
  ModelOutput forward(const Tensor& audio, const Tensor& video) const;
  ModelOutput forward(const Matrix& audio, const Matrix& video) const;

  const ModelConfig& config() const { return cfg_; }
  ParameterGroups parameter_groups() const;
  /// Encoder group followed by decoder group, in a stable order.
  ParameterList parameters() const;
  std::size_t parameter_count() const;

  Encoder& audio_encoder() { return audio_encoder_; }
  Encoder& video_encoder() { return video_encoder_; }
  HiGateDecoder* higate();

 private:
  using Decoder =
      std::variant<HiGateDecoder, SumDecoder, ConcatDecoder, CrossAttenDecoder>;

  ModelConfig cfg_;
  Encoder audio_encoder_;
  Encoder video_encoder_;
  Linear audio_projection_;  // phi for f_a
  Linear video_projection_;  // phi for f_v
  Decoder decoder_;
  AvClassifier av_head_;
  UniClassifier audio_head_;
  UniClassifier video_head_;
};

}  // namespace gatefusion

#endif  // GATEFUSION_MODEL_H_
