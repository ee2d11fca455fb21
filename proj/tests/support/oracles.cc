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


#include "oracles.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "gatefusion/ops.h"

namespace gatefusion::testing {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng,
                     double stddev) {
  std::normal_distribution<double> normal(0.0, stddev);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

Tensor composed_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                          std::size_t heads) {
  const std::size_t dh = q.cols() / heads;
  const double inv = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<Tensor> parts;
  for (std::size_t h = 0; h < heads; ++h) {
    const Tensor qh = slice_cols(q, h * dh, dh);
    const Tensor kh = slice_cols(k, h * dh, dh);
    const Tensor vh = slice_cols(v, h * dh, dh);
    const Tensor p = softmax_rows(scale(matmul(qh, transpose(kh)), inv));
    parts.push_back(matmul(p, vh));
  }
  return concat_cols(parts);
}

Matrix align_oracle(const Matrix& x, std::size_t t_target) {
  const std::size_t t_in = static_cast<std::size_t>(x.rows());
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(t_target), x.cols());
  for (std::size_t i = 0; i < t_target; ++i) {
    if (t_target > t_in) {
      out.row(i) = x.row(i * t_in / t_target);
      continue;
    }
    const std::size_t lo = i * t_in / t_target;
    const std::size_t hi = (i + 1) * t_in / t_target;
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      double s = 0.0;
      for (std::size_t r = lo; r < hi; ++r) s += x(r, c);
      out(i, c) = s / static_cast<double>(hi - lo);
    }
  }
  return out;
}

double brute_force_ap(std::span<const double> scores,
                      std::span<const std::uint8_t> labels) {
  const std::size_t n = scores.size();
  std::size_t positives = 0;
  for (auto y : labels) positives += y != 0;
  // Sweep the threshold through each item in rank order. Every step in
  // recall is 1/P, weighted by the precision at that cut.
  std::vector<std::size_t> rank(n);
  std::iota(rank.begin(), rank.end(), std::size_t{0});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool swap = scores[rank[j]] > scores[rank[i]] ||
                        (scores[rank[j]] == scores[rank[i]] && rank[j] < rank[i]);
      if (swap) std::swap(rank[i], rank[j]);
    }
  }
  std::int64_t lcm = 1;
  for (std::size_t d = 1; d <= n; ++d) lcm = std::lcm(lcm, std::int64_t(d));
  std::int64_t num = 0;  // sum of precisions, over lcm
  std::int64_t tp = 0;
  std::int64_t prev_recall = 0;
  for (std::size_t cut = 1; cut <= n; ++cut) {
    tp += labels[rank[cut - 1]] != 0;
    if (tp != prev_recall) {
      num += (tp - prev_recall) * tp * (lcm / std::int64_t(cut));
      prev_recall = tp;
    }
  }
  const std::int64_t den = lcm * std::int64_t(positives);
  return static_cast<double>(num) / static_cast<double>(den);
}

std::vector<double> softmax_row(std::span<const double> logits) {
  double m = logits[0];
  for (double x : logits) m = std::max(m, x);
  std::vector<double> out(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    z += out[i];
  }
  for (double& x : out) x /= z;
  return out;
}

std::vector<double> layer_norm_row(std::span<const double> x, double eps) {
  double mu = 0.0;
  for (double v : x) mu += v;
  mu /= static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - mu) * (v - mu);
  var /= static_cast<double>(x.size());
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = (x[i] - mu) / std::sqrt(var + eps);
  }
  return out;
}

LayerNorm identity_norm(std::size_t width) {
  return LayerNorm{Tensor::parameter(Matrix::Ones(1, width)),
                   Tensor::parameter(Matrix::Zero(1, width))};
}

void scramble(const ParameterList& params, std::mt19937_64& rng,
              double stddev) {
  for (const auto& p : params) {
    NamedTensor copy = p;
    copy.tensor.mutable_value() =
        random_matrix(p.tensor.rows(), p.tensor.cols(), rng, stddev);
  }
}

bool bitwise_equal(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return std::memcmp(a.data(), b.data(),
                     static_cast<std::size_t>(a.size()) * sizeof(double)) == 0;
}

}  // namespace gatefusion::testing
