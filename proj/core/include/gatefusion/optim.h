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

// AdamW with decoupled weight decay and a step-decay learning-rate schedule.

#ifndef GATEFUSION_OPTIM_H_
#define GATEFUSION_OPTIM_H_

#include <cstdint>
#include <span>
#include <vector>

#include "gatefusion/tensor.h"

namespace gatefusion {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

/// base * decay^floor(step / interval)
double lr_schedule(std::uint64_t step, double base, double decay,
                   std::uint64_t interval);

/// One AdamW update of a single tensor at 1-based step t:
///   m <- b1 m + (1 - b1) g;  v <- b2 v + (1 - b2) g^2
///   theta <- theta - lr (m_hat / (sqrt(v_hat) + eps) + wd theta)
void adamw_update(Matrix& param, const Matrix& grad, Matrix& m, Matrix& v,
                  std::uint64_t t, double lr, const AdamWConfig& cfg);

struct ParamGroup {
  ParameterList params;
  double lr = 0.0;
};

enum class StepStatus { kApplied, kRejectedNonFinite };

struct OptimizerState {
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
  std::uint64_t step = 0;
};

class AdamW {
 public:
  explicit AdamW(const AdamWConfig& cfg) : cfg_(cfg) {}

  /// Reads each parameter's accumulated gradient (zero if none arrived).
  /// If any gradient is non-finite nothing is modified and the step is
  /// rejected. Group layout must stay the same across calls.
  StepStatus step(std::span<const ParamGroup> groups);

  const OptimizerState& state() const { return state_; }
  const AdamWConfig& config() const { return cfg_; }

 private:
  AdamWConfig cfg_;
  OptimizerState state_;
};

}  // namespace gatefusion

#endif  // GATEFUSION_OPTIM_H_
