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

#ifndef GATEFUSION_METRICS_H_
#define GATEFUSION_METRICS_H_

#include <cstdint>
#include <span>
#include <stdexcept>

namespace gatefusion {

/// Average precision is undefined without positive labels.
class UndefinedMetricError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Non-interpolated AP: rank by descending score (ties by ascending index)
/// and average the precision at each positive.
double average_precision(std::span<const double> scores,
                         std::span<const std::uint8_t> labels);

}  // namespace gatefusion

#endif  // GATEFUSION_METRICS_H_
