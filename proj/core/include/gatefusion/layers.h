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

#ifndef GATEFUSION_LAYERS_H_
#define GATEFUSION_LAYERS_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gatefusion/ops.h"
#include "gatefusion/tensor.h"

namespace gatefusion {

inline constexpr double kInitStddev = 0.02;

/// Seeded parameter initializer: weights ~ N(0, stddev^2), biases 0,
/// layer-norm affine at identity.
class ParamInit {
 public:
  explicit ParamInit(std::uint64_t seed) : engine_(seed) {}

  Tensor normal(std::size_t rows, std::size_t cols,
                double stddev = kInitStddev);
  Tensor zeros(std::size_t rows, std::size_t cols);
  Tensor ones(std::size_t rows, std::size_t cols);

 private:
  std::mt19937_64 engine_;
};

/// y = x W + b with W stored in x out layout.
struct Linear {
  Tensor weight;
  Tensor bias;

  static Linear create(std::size_t in, std::size_t out, ParamInit& init);
  /// Constant-valued layer from explicit weights, for tests and oracles.
  static Linear from_values(Matrix weight, Matrix bias);

  Tensor operator()(const Tensor& x) const;
  std::size_t in_features() const { return weight.rows(); }
  std::size_t out_features() const { return weight.cols(); }
  void collect(const std::string& prefix, ParameterList& out) const;
};

struct LayerNorm {
  Tensor gamma;
  Tensor beta;

  static LayerNorm create(std::size_t width, ParamInit& init);
  Tensor operator()(const Tensor& x) const;
  void collect(const std::string& prefix, ParameterList& out) const;
};

/// Multi-head scaled dot-product attention with input/output projections.
/// No masking. Query rows attend over every key/value row.
struct MultiHeadAttention {
  std::size_t heads = 1;
  Linear query;
  Linear key;
  Linear value;
  Linear output;

  static MultiHeadAttention create(std::size_t width, std::size_t heads,
                                   ParamInit& init);

  /// When `weights` is non-null it receives one Tq x Tk probability matrix
  /// per head.
  Tensor operator()(const Tensor& queries, const Tensor& keys_values,
                    std::vector<Tensor>* weights = nullptr) const;
  void collect(const std::string& prefix, ParameterList& out) const;
};

}  // namespace gatefusion

#endif  // GATEFUSION_LAYERS_H_
