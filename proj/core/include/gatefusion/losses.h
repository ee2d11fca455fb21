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

// Classification heads and the three-term training objective.

#ifndef GATEFUSION_LOSSES_H_
#define GATEFUSION_LOSSES_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gatefusion/layers.h"
#include "gatefusion/tensor.h"

namespace gatefusion {

/// Per-video-frame binary speaking labels.
struct FrameLabels {
  std::vector<std::uint8_t> y;

  std::size_t size() const { return y.size(); }
  /// Indices i with y[i] == 1.
  std::vector<std::size_t> positives() const;
  std::vector<std::size_t> negatives() const;
  /// T x 2 one-hot encoding.
  Matrix one_hot() const;
  /// Appends another segment (batch packing).
  void append(const FrameLabels& other);
};

/// Linear -> GELU -> Linear(F -> 2); the multimodal classifier.
struct AvClassifier {
  Linear hidden;
  Linear out;

  static AvClassifier create(std::size_t width, ParamInit& init);
  Tensor operator()(const Tensor& features) const;
  void collect(const std::string& prefix, ParameterList& out) const;
};

/// Single linear map F -> 2; the audio-only and video-only classifiers.
struct UniClassifier {
  Linear linear;

  static UniClassifier create(std::size_t width, ParamInit& init);
  Tensor operator()(const Tensor& features) const;
  void collect(const std::string& prefix, ParameterList& out) const;
};

/// Per-frame class probabilities, all T_v x 2.
struct PredictionBundle {
  Tensor p_av_live;      // carries gradient into the fusion path (CLS)
  Tensor p_av_detached;  // softmax of stop_grad(logits) (MAL target)
  Tensor p_a;
  Tensor p_v;

  /// Builds both p_av branches from one evaluation of the classifier logits.
  static PredictionBundle from_logits(const Tensor& logits_av,
                                      const Tensor& logits_a,
                                      const Tensor& logits_v);
  /// Row-concatenates per-episode bundles into one batch bundle.
  static PredictionBundle concat(const std::vector<PredictionBundle>& parts);
};

struct LossWeights {
  double mal = 0.01;
  double opp = 0.1;

  void validate() const;
};

/// KL(p_av_detached || p_m) summed over positive frames for m in {a, v},
/// divided by 2|S|. Zero when there are no positive frames.
Tensor mal_loss(const PredictionBundle& bundle, const FrameLabels& labels);
/// Mean over all frames of p_v[1] * (1 - y).
Tensor opp_loss(const Tensor& p_v, const FrameLabels& labels);
/// Mean cross-entropy of p_av against one-hot labels.
Tensor cls_loss(const Tensor& p_av_live, const FrameLabels& labels);
Tensor total_loss(const Tensor& cls, const Tensor& mal, const Tensor& opp,
                  const LossWeights& weights);

struct LossTerms {
  Tensor cls;
  Tensor mal;
  Tensor opp;
  Tensor total;
};

LossTerms compute_losses(const PredictionBundle& bundle,
                         const FrameLabels& labels,
                         const LossWeights& weights);

}  // namespace gatefusion

#endif  // GATEFUSION_LOSSES_H_
