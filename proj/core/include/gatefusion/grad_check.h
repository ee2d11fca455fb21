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

// Central finite-difference verification of reverse-mode gradients.

#ifndef GATEFUSION_GRAD_CHECK_H_
#define GATEFUSION_GRAD_CHECK_H_

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gatefusion/tensor.h"

namespace gatefusion {

/// Central difference weights: 3-point (f(x+h) - f(x-h)) / 2h, or the
/// 5-point stencil over x +- h, x +- 2h.
enum class FdStencil { kThreePoint, kFivePoint };

struct GradCheckOptions {
  double step = 1e-3;
  FdStencil stencil = FdStencil::kFivePoint;
  double rel_tol = 1e-4;
  double abs_tol = 1e-6;
};

struct ParamCheck {
  std::string name;
  /// Over entries outside the absolute tolerance.
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  /// Every entry satisfied rel < rel_tol or abs < abs_tol.
  bool passed = true;
};

struct GradCheckReport {
  std::vector<ParamCheck> params;

  bool passed() const;
  double max_rel_error() const;
  double max_abs_error() const;
};

/// `loss` rebuilds the graph from the current parameter values and returns a
/// 1 x 1 tensor. Parameters are perturbed in place and restored afterwards.
/// Throws EvaluationError if the loss is non-finite at any perturbed point.
GradCheckReport grad_check(const std::function<Tensor()>& loss,
                           std::span<const NamedTensor> params,
                           const GradCheckOptions& options = {});

}  // namespace gatefusion

#endif  // GATEFUSION_GRAD_CHECK_H_
