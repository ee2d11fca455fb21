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

#include "gatefusion/optim.h"

#include <cmath>

namespace gatefusion {

double lr_schedule(std::uint64_t step, double base, double decay,
                   std::uint64_t interval) {
  if (interval == 0) return base;
  const auto k = static_cast<int>(step / interval);
  return base * std::pow(decay, k);
}

void adamw_update(Matrix& param, const Matrix& grad, Matrix& m, Matrix& v,
                  std::uint64_t t, double lr, const AdamWConfig& cfg) {
  if (m.size() == 0) m = Matrix::Zero(param.rows(), param.cols());
  if (v.size() == 0) v = Matrix::Zero(param.rows(), param.cols());
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
  v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  const auto m_hat = m.array() / c1;
  const auto v_hat = v.array() / c2;
  param.array() -=
      lr * (m_hat / (v_hat.sqrt() + cfg.eps) + cfg.weight_decay * param.array());
}

StepStatus AdamW::step(std::span<const ParamGroup> groups) {
  std::vector<Matrix> grads;
  for (const auto& group : groups) {
    for (const auto& p : group.params) {
      grads.push_back(p.tensor.grad());
      if (!grads.back().allFinite()) return StepStatus::kRejectedNonFinite;
    }
  }
  if (state_.first_moment.empty()) {
    state_.first_moment.resize(grads.size());
    state_.second_moment.resize(grads.size());
  }
  ++state_.step;
  std::size_t i = 0;
  for (const auto& group : groups) {
    if (group.lr == 0.0) {  // frozen group: parameters stay bitwise fixed
      i += group.params.size();
      continue;
    }
    for (const auto& p : group.params) {
      Tensor handle = p.tensor;
      adamw_update(handle.mutable_value(), grads[i], state_.first_moment[i],
                   state_.second_moment[i], state_.step, group.lr, cfg_);
      ++i;
    }
  }
  return StepStatus::kApplied;
}

}  // namespace gatefusion
