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

// Differentiable operations on Tensor. Binary elementwise ops accept an
// operand of identical shape, a 1 x C row (broadcast over rows) or a T x 1
// column (broadcast over features).

#ifndef GATEFUSION_OPS_H_
#define GATEFUSION_OPS_H_

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "gatefusion/tensor.h"

namespace gatefusion {

inline constexpr double kLogClamp = 1e-12;
inline constexpr double kLayerNormEps = 1e-5;

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& x);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);
Tensor add_scalar(const Tensor& x, double offset);

Tensor sigmoid(const Tensor& x);
Tensor exp(const Tensor& x);
/// Natural log with the input clamped below at kLogClamp.
Tensor log(const Tensor& x);
/// Exact erf form: x * Phi(x).
Tensor gelu(const Tensor& x);

/// Elementwise map with a caller-supplied derivative. `derivative` receives
/// the input and output values and returns dy/dx elementwise.
Tensor unary_map(const Tensor& x, const char* name,
                 const std::function<double(double)>& forward,
                 const std::function<double(double, double)>& derivative);

/// x W + b as one node. b is 1 x out.
Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b);

/// Multi-head scaled dot-product attention as one node. q is Tq x D, k and
/// v are Tk x D, D divisible by heads. Head h uses columns
/// [h D/heads, (h+1) D/heads). When `weights` is non-null it receives the
/// Tq x Tk softmax matrix of each head.
Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                            std::size_t heads,
                            std::vector<Matrix>* weights = nullptr);

/// Row-wise softmax with max subtraction.
Tensor softmax_rows(const Tensor& logits);
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  double eps = kLayerNormEps);

/// Identity forward, zero backward.
Tensor stop_grad(const Tensor& x);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

Tensor concat_cols(std::span<const Tensor> parts);
Tensor concat_cols(const Tensor& a, const Tensor& b);
Tensor concat_rows(std::span<const Tensor> parts);
Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t count);
Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t count);
/// Gathers the listed rows in order. Duplicates accumulate on backward.
Tensor select_rows(const Tensor& x, std::span<const std::size_t> rows);

/// Half-open row range [begin, end) averaged into one output row.
struct RowBin {
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Output row i is the mean of input rows in bins[i].
Tensor pool_rows(const Tensor& x, std::span<const RowBin> bins);

}  // namespace gatefusion

#endif  // GATEFUSION_OPS_H_
