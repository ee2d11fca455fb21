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

#include "gatefusion/grad_check.h"

#include <algorithm>
#include <cmath>

namespace gatefusion {

bool GradCheckReport::passed() const {
  return std::all_of(params.begin(), params.end(),
                     [](const ParamCheck& p) { return p.passed; });
}

double GradCheckReport::max_rel_error() const {
  double m = 0.0;
  for (const auto& p : params) m = std::max(m, p.max_rel_error);
  return m;
}

double GradCheckReport::max_abs_error() const {
  double m = 0.0;
  for (const auto& p : params) m = std::max(m, p.max_abs_error);
  return m;
}

namespace {

double evaluate(const std::function<Tensor()>& loss, const std::string& where) {
  const double v = loss().item();
  if (!std::isfinite(v)) {
    throw EvaluationError("grad_check: non-finite loss at " + where);
  }
  return v;
}

}  // namespace

GradCheckReport grad_check(const std::function<Tensor()>& loss,
                           std::span<const NamedTensor> params,
                           const GradCheckOptions& options) {
  for (const auto& p : params) {
    Tensor handle = p.tensor;
    handle.zero_grad();
  }
  {
    const Tensor out = loss();
    if (!std::isfinite(out.item())) {
      throw EvaluationError("grad_check: non-finite loss at base point");
    }
    out.backward();
  }

  GradCheckReport report;
  for (const auto& named : params) {
    Tensor param = named.tensor;
    const Matrix analytic = param.grad();
    ParamCheck check{named.name};
    Matrix& values = param.mutable_value();
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      const double original = values.data()[i];
      const std::string where = named.name + "[" + std::to_string(i) + "]";
      auto at = [&](double offset) {
        values.data()[i] = original + offset;
        return evaluate(loss, where);
      };
      const double h = options.step;
      double numeric;
      if (options.stencil == FdStencil::kThreePoint) {
        numeric = (at(h) - at(-h)) / (2.0 * h);
      } else {
        numeric = (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h);
      }
      values.data()[i] = original;
      const double a = analytic.data()[i];
      const double abs_err = std::abs(a - numeric);
      const double denom = std::max(std::abs(a), std::abs(numeric));
      const double rel_err = denom > 0.0 ? abs_err / denom : 0.0;
      check.max_abs_error = std::max(check.max_abs_error, abs_err);
      // Entries inside the absolute tolerance pass regardless of their
      // relative error, so they do not count toward the reported maximum.
      if (abs_err >= options.abs_tol) {
        check.max_rel_error = std::max(check.max_rel_error, rel_err);
        if (rel_err >= options.rel_tol) check.passed = false;
      }
    }
    param.zero_grad();
    report.params.push_back(std::move(check));
  }
  return report;
}

}  // namespace gatefusion
