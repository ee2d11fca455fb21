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

#include "gatefusion/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gatefusion/errors.h"

namespace gatefusion {

double average_precision(std::span<const double> scores,
                         std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) {
    throw DimensionError("average_precision: " + std::to_string(scores.size()) +
                         " scores vs " + std::to_string(labels.size()) +
                         " labels");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  // Double-double accumulation so the result is the correctly rounded value
  // of the exact rational sum for short inputs.
  std::size_t hits = 0;
  double hi = 0.0;
  double lo = 0.0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (labels[order[rank]] == 0) continue;
    ++hits;
    const double h = static_cast<double>(hits);
    const double r = static_cast<double>(rank + 1);
    const double q = h / r;
    const double q_err = std::fma(-q, r, h) / r;
    const double s = hi + q;
    const double bb = s - hi;
    const double s_err = (hi - (s - bb)) + (q - bb);
    hi = s;
    lo += s_err + q_err;
  }
  if (hits == 0) {
    throw UndefinedMetricError("average_precision: no positive labels");
  }
  const double n = static_cast<double>(hits);
  const double d = hi / n;
  const double rem = std::fma(-d, n, hi) + lo;
  return d + rem / n;
}

}  // namespace gatefusion
