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

#include "gatefusion/tensor.h"

#include <unordered_set>
#include <utility>

namespace gatefusion {

std::string Shape::str() const {
  return "[" + std::to_string(rows) + "x" + std::to_string(cols) + "]";
}

namespace detail {

void Node::accumulate(const Matrix& g) {
  if (!requires_grad) return;
  if (grad.size() == 0) {
    grad = g;
  } else {
    grad += g;
  }
}

void Node::accumulate(Matrix&& g) {
  if (!requires_grad) return;
  if (grad.size() == 0) {
    grad = std::move(g);
  } else {
    grad += g;
  }
}

}  // namespace detail

Tensor Tensor::constant(Matrix values) {
  auto node = std::make_shared<detail::Node>();
  node->value = std::move(values);
  return Tensor(std::move(node));
}

Tensor Tensor::parameter(Matrix values) {
  auto node = std::make_shared<detail::Node>();
  node->value = std::move(values);
  node->requires_grad = true;
  return Tensor(std::move(node));
}

Tensor Tensor::zeros(std::size_t rows, std::size_t cols, bool requires_grad) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(rows),
                          static_cast<Eigen::Index>(cols));
  return requires_grad ? parameter(std::move(m)) : constant(std::move(m));
}

Tensor Tensor::scalar(double v) {
  Matrix m(1, 1);
  m(0, 0) = v;
  return constant(std::move(m));
}

Tensor Tensor::row(std::vector<double> values) {
  Matrix m(1, static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    m(0, static_cast<Eigen::Index>(i)) = values[i];
  }
  return constant(std::move(m));
}

Shape Tensor::shape() const { return Shape{rows(), cols()}; }

double Tensor::item() const {
  if (value().size() != 1) {
    throw DimensionError("item() requires a 1x1 tensor, got " +
                         shape().str());
  }
  return value()(0, 0);
}

Matrix Tensor::grad() const {
  if (has_grad()) return node_->grad;
  return Matrix::Zero(value().rows(), value().cols());
}

void Tensor::zero_grad() {
  if (node_) node_->grad.resize(0, 0);
}

Tensor Tensor::detach() const { return constant(value()); }

namespace {
thread_local bool g_no_grad = false;
}  // namespace

NoGradGuard::NoGradGuard() : previous_(g_no_grad) { g_no_grad = true; }
NoGradGuard::~NoGradGuard() { g_no_grad = previous_; }
bool NoGradGuard::active() { return g_no_grad; }

Tensor Tensor::make_result(Matrix value, const char* op,
                           std::vector<Tensor> inputs,
                           std::function<void(const Matrix&)> backward) {
  auto node = std::make_shared<detail::Node>();
  node->value = std::move(value);
  node->op = op;
  bool needs_grad = false;
  if (!g_no_grad) {
    for (const auto& in : inputs) needs_grad = needs_grad || in.requires_grad();
  }
  if (needs_grad) {
    node->requires_grad = true;
    node->inputs.reserve(inputs.size());
    // Constant inputs are retained too: backward closures read their values.
    for (auto& in : inputs) node->inputs.push_back(std::move(in.node_));
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

void Tensor::backward() const {
  if (value().size() != 1) {
    throw DimensionError("backward() requires a scalar (1x1) root, got " +
                         shape().str());
  }
  if (!requires_grad()) return;

  // Iterative post-order DFS gives a topological order.
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> seen;
  std::vector<std::pair<detail::Node*, std::size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      detail::Node* child = node->inputs[next++].get();
      if (child->requires_grad && seen.insert(child).second) {
        stack.emplace_back(child, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  node_->accumulate(Matrix::Ones(1, 1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* node = *it;
    if (node->backward && node->grad.size() > 0) node->backward(node->grad);
  }
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace gatefusion
