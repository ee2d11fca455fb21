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

#include "gatefusion/losses.h"

#include <cmath>

#include "gatefusion/errors.h"
#include "gatefusion/ops.h"

namespace gatefusion {

std::vector<std::size_t> FrameLabels::positives() const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != 0) idx.push_back(i);
  }
  return idx;
}

std::vector<std::size_t> FrameLabels::negatives() const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 0) idx.push_back(i);
  }
  return idx;
}

Matrix FrameLabels::one_hot() const {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(y.size()), 2);
  for (std::size_t i = 0; i < y.size(); ++i) {
    m(static_cast<Eigen::Index>(i), y[i] != 0 ? 1 : 0) = 1.0;
  }
  return m;
}

void FrameLabels::append(const FrameLabels& other) {
  y.insert(y.end(), other.y.begin(), other.y.end());
}

AvClassifier AvClassifier::create(std::size_t width, ParamInit& init) {
  return AvClassifier{Linear::create(width, width, init),
                      Linear::create(width, 2, init)};
}

Tensor AvClassifier::operator()(const Tensor& features) const {
  return out(gelu(hidden(features)));
}

void AvClassifier::collect(const std::string& prefix, ParameterList& out_list) const {
  hidden.collect(prefix + ".hidden", out_list);
  out.collect(prefix + ".out", out_list);
}

UniClassifier UniClassifier::create(std::size_t width, ParamInit& init) {
  return UniClassifier{Linear::create(width, 2, init)};
}

Tensor UniClassifier::operator()(const Tensor& features) const {
  return linear(features);
}

void UniClassifier::collect(const std::string& prefix, ParameterList& out) const {
  linear.collect(prefix, out);
}

PredictionBundle PredictionBundle::from_logits(const Tensor& logits_av,
                                               const Tensor& logits_a,
                                               const Tensor& logits_v) {
  PredictionBundle b;
  b.p_av_live = softmax_rows(logits_av);
  b.p_av_detached = softmax_rows(stop_grad(logits_av));
  b.p_a = softmax_rows(logits_a);
  b.p_v = softmax_rows(logits_v);
  return b;
}

PredictionBundle PredictionBundle::concat(
    const std::vector<PredictionBundle>& parts) {
  if (parts.size() == 1) return parts.front();
  std::vector<Tensor> live, detached, a, v;
  for (const auto& p : parts) {
    live.push_back(p.p_av_live);
    detached.push_back(p.p_av_detached);
    a.push_back(p.p_a);
    v.push_back(p.p_v);
  }
  return PredictionBundle{concat_rows(live), concat_rows(detached),
                          concat_rows(a), concat_rows(v)};
}

void LossWeights::validate() const {
  if (!std::isfinite(mal) || !std::isfinite(opp) || mal < 0.0 || opp < 0.0) {
    throw ConfigError("loss weights must be finite and non-negative");
  }
}

namespace {

void check_rows(const Tensor& p, const FrameLabels& labels, const char* what) {
  if (p.rows() != labels.size() || p.cols() != 2) {
    throw DimensionError(std::string(what) + ": probabilities " +
                         p.shape().str() + " do not match " +
                         std::to_string(labels.size()) + " labels");
  }
}

// Sum over rows of KL(target || p), target rows constant.
Tensor kl_sum(const Tensor& target, const Tensor& log_target, const Tensor& p) {
  return sum(mul(target, sub(log_target, log(p))));
}

}  // namespace

Tensor mal_loss(const PredictionBundle& bundle, const FrameLabels& labels) {
  check_rows(bundle.p_av_detached, labels, "mal");
  check_rows(bundle.p_a, labels, "mal");
  check_rows(bundle.p_v, labels, "mal");
  const auto pos = labels.positives();
  if (pos.empty()) return Tensor::scalar(0.0);
  const Tensor target = select_rows(bundle.p_av_detached, pos);
  const Tensor log_target = log(target);
  const Tensor kl_a = kl_sum(target, log_target, select_rows(bundle.p_a, pos));
  const Tensor kl_v = kl_sum(target, log_target, select_rows(bundle.p_v, pos));
  return scale(add(kl_a, kl_v), 1.0 / (2.0 * static_cast<double>(pos.size())));
}

Tensor opp_loss(const Tensor& p_v, const FrameLabels& labels) {
  check_rows(p_v, labels, "opp");
  Matrix negative_mask(static_cast<Eigen::Index>(labels.size()), 1);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    negative_mask(static_cast<Eigen::Index>(i), 0) = labels.y[i] != 0 ? 0.0 : 1.0;
  }
  return mean(mul(slice_cols(p_v, 1, 1), Tensor::constant(negative_mask)));
}

Tensor cls_loss(const Tensor& p_av_live, const FrameLabels& labels) {
  check_rows(p_av_live, labels, "cls");
  const Tensor target = Tensor::constant(labels.one_hot());
  const double m = static_cast<double>(labels.size());
  return scale(sum(mul(target, log(p_av_live))), -1.0 / m);
}

Tensor total_loss(const Tensor& cls, const Tensor& mal, const Tensor& opp,
                  const LossWeights& weights) {
  return add(add(cls, scale(mal, weights.mal)), scale(opp, weights.opp));
}

LossTerms compute_losses(const PredictionBundle& bundle,
                         const FrameLabels& labels,
                         const LossWeights& weights) {
  LossTerms t;
  t.cls = cls_loss(bundle.p_av_live, labels);
  t.mal = mal_loss(bundle, labels);
  t.opp = opp_loss(bundle.p_v, labels);
  t.total = total_loss(t.cls, t.mal, t.opp, weights);
  return t;
}

}  // namespace gatefusion
