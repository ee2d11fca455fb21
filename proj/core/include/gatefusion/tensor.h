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

#ifndef GATEFUSION_TENSOR_H_
#define GATEFUSION_TENSOR_H_

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gatefusion/errors.h"

namespace gatefusion {

/// Dense row-major storage used for every real-valued quantity.
using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Rank-2 shape. Vectors are stored as 1 x N rows, scalars as 1 x 1.
struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  friend bool operator==(const Shape&, const Shape&) = default;
  std::string str() const;
};

namespace detail {

// One record on the reverse-mode tape. Outputs own their inputs, never the
// other way around, so graphs are freed when the last handle goes away.
struct Node {
  Matrix value;
  Matrix grad;  // empty until something accumulates into it
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads this node's grad and accumulates into the inputs.
  std::function<void(const Matrix& grad_out)> backward;

  void accumulate(const Matrix& g);
  void accumulate(Matrix&& g);
};

}  // namespace detail

/// Handle to a node of the differentiation graph. Copies share the node.
class Tensor {
 public:
  Tensor() = default;

  static Tensor constant(Matrix values);
  static Tensor parameter(Matrix values);
  static Tensor zeros(std::size_t rows, std::size_t cols,
                      bool requires_grad = false);
  static Tensor scalar(double v);
  static Tensor row(std::vector<double> values);

  bool defined() const { return node_ != nullptr; }
  const Matrix& value() const { return node_->value; }
  Matrix& mutable_value() { return node_->value; }
  Shape shape() const;
  std::size_t rows() const { return static_cast<std::size_t>(value().rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(value().cols()); }
  double item() const;
  double at(std::size_t r, std::size_t c) const { return value()(r, c); }

  bool requires_grad() const { return node_ && node_->requires_grad; }
  bool has_grad() const { return node_ && node_->grad.size() > 0; }
  /// Gradient accumulated by backward(); a zero matrix when none arrived.
  Matrix grad() const;
  void zero_grad();
  const char* op_name() const { return node_->op; }

  /// Reverse sweep from a 1 x 1 tensor. Every reachable node is visited once.
  void backward() const;

  /// Same values, no graph ancestry.
  Tensor detach() const;

  /// Builds an op output. Used by op implementations only; the output is
  /// attached to the graph iff any input requires grad.
  static Tensor make_result(Matrix value, const char* op,
                            std::vector<Tensor> inputs,
                            std::function<void(const Matrix&)> backward);

  detail::Node* node() const { return node_.get(); }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node)
      : node_(std::move(node)) {}

  std::shared_ptr<detail::Node> node_;
};

/// Named handle used for parameter registries, checkpoints and grad checks.
/// While alive on this thread, op outputs are never attached to the graph.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

  static bool active();

 private:
  bool previous_;
};

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

using ParameterList = std::vector<NamedTensor>;

bool all_finite(const Matrix& m);

}  // namespace gatefusion

#endif  // GATEFUSION_TENSOR_H_
