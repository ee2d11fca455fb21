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

#include "gatefusion/layers.h"

#include <cmath>
#include <stdexcept>

namespace gatefusion {

Tensor ParamInit::normal(std::size_t rows, std::size_t cols, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(engine_);
  return Tensor::parameter(std::move(m));
}

Tensor ParamInit::zeros(std::size_t rows, std::size_t cols) {
  return Tensor::zeros(rows, cols, /*requires_grad=*/true);
}

Tensor ParamInit::ones(std::size_t rows, std::size_t cols) {
  return Tensor::parameter(Matrix::Ones(static_cast<Eigen::Index>(rows),
                                        static_cast<Eigen::Index>(cols)));
}

Linear Linear::create(std::size_t in, std::size_t out, ParamInit& init) {
  return Linear{init.normal(in, out), init.zeros(1, out)};
}

Linear Linear::from_values(Matrix weight, Matrix bias) {
  return Linear{Tensor::parameter(std::move(weight)),
                Tensor::parameter(std::move(bias))};
}

Tensor Linear::operator()(const Tensor& x) const {
  return affine(x, weight, bias);
}

void Linear::collect(const std::string& prefix, ParameterList& out) const {
  out.push_back({prefix + ".weight", weight});
  out.push_back({prefix + ".bias", bias});
}

LayerNorm LayerNorm::create(std::size_t width, ParamInit& init) {
  return LayerNorm{init.ones(1, width), init.zeros(1, width)};
}

Tensor LayerNorm::operator()(const Tensor& x) const {
  return layer_norm(x, gamma, beta);
}

void LayerNorm::collect(const std::string& prefix, ParameterList& out) const {
  out.push_back({prefix + ".gamma", gamma});
  out.push_back({prefix + ".beta", beta});
}

MultiHeadAttention MultiHeadAttention::create(std::size_t width,
                                              std::size_t heads,
                                              ParamInit& init) {
  if (heads == 0 || width % heads != 0) {
    throw std::invalid_argument("attention width " + std::to_string(width) +
                                " is not divisible by " +
                                std::to_string(heads) + " heads");
  }
  MultiHeadAttention mha;
  mha.heads = heads;
  mha.query = Linear::create(width, width, init);
  mha.key = Linear::create(width, width, init);
  mha.value = Linear::create(width, width, init);
  mha.output = Linear::create(width, width, init);
  return mha;
}

Tensor MultiHeadAttention::operator()(const Tensor& queries,
                                      const Tensor& keys_values,
                                      std::vector<Tensor>* weights) const {
  const Tensor q = query(queries);
  const Tensor k = key(keys_values);
  const Tensor v = value(keys_values);
  std::vector<Matrix> probs;
  const Tensor merged = scaled_dot_attention(q, k, v, heads,
                                             weights != nullptr ? &probs : nullptr);
  if (weights != nullptr) {
    for (auto& p : probs) weights->push_back(Tensor::constant(std::move(p)));
  }
  return output(merged);
}

void MultiHeadAttention::collect(const std::string& prefix,
                                 ParameterList& out) const {
  query.collect(prefix + ".query", out);
  key.collect(prefix + ".key", out);
  value.collect(prefix + ".value", out);
  output.collect(prefix + ".output", out);
}

}  // namespace gatefusion
