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

// Finite-difference sweep over every differentiable op and module.

#ifndef GATEFUSION_GRAD_SUITE_H_
#define GATEFUSION_GRAD_SUITE_H_

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "gatefusion/grad_check.h"
#include "gatefusion/tensor.h"

namespace gatefusion {

using UnaryOp = std::function<Tensor(const Tensor&)>;

struct GradSuiteOptions {
  std::size_t instances = 20;
  std::uint64_t seed = 0;
  GradCheckOptions check;
  /// Replaces the op under test in the case of the same name ("sigmoid",
  /// "exp", "log", "gelu"). Fault-injection hook.
  std::map<std::string, UnaryOp> overrides;
  /// Empty runs every module.
  std::vector<std::string> modules;
};

struct GradCaseResult {
  std::string module;
  std::string op;
  std::size_t instances = 0;
  /// One entry per parameter name, worst case over all instances.
  GradCheckReport report;
  bool passed() const { return report.passed(); }
};

struct GradSuiteReport {
  std::vector<GradCaseResult> cases;
  bool passed() const;
  std::size_t failures() const;
};

/// Module names, in run order.
std::vector<std::string> grad_suite_modules();

GradSuiteReport run_grad_suite(const GradSuiteOptions& options = {});

}  // namespace gatefusion

#endif  // GATEFUSION_GRAD_SUITE_H_
