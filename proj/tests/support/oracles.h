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


// Independent reference implementations used by the tests.

#ifndef GATEFUSION_TESTS_ORACLES_H_
#define GATEFUSION_TESTS_ORACLES_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "gatefusion/layers.h"
#include "gatefusion/tensor.h"

namespace gatefusion::testing {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng,
                     double stddev = 1.0);

/// Multi-head attention built from primitive ops only (slice, matmul,
/// transpose, scale, softmax, concat).
Tensor composed_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                          std::size_t heads);

/// Loop-based pooling / replication straight from the bin formula.
Matrix align_oracle(const Matrix& x, std::size_t t_target);

/// Area under the step PR curve, summed as an exact fraction and rounded
/// once. Ties go to the lower index. Lengths up to 20.
double brute_force_ap(std::span<const double> scores,
                      std::span<const std::uint8_t> labels);

/// Softmax of a row computed directly, for small hand-checked cases.
std::vector<double> softmax_row(std::span<const double> logits);

/// Layer norm of one row with unit gain and zero shift.
std::vector<double> layer_norm_row(std::span<const double> x, double eps);

LayerNorm identity_norm(std::size_t width);

/// Every parameter's value replaced with N(0, stddev^2) draws.
void scramble(const ParameterList& params, std::mt19937_64& rng,
              double stddev);

bool bitwise_equal(const Matrix& a, const Matrix& b);

}  // namespace gatefusion::testing

#endif  // GATEFUSION_TESTS_ORACLES_H_
