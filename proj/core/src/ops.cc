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

#include "gatefusion/ops.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <string>

namespace gatefusion {
namespace {

using detail::Node;
using Index = Eigen::Index;

enum class Broadcast { kNone, kRow, kCol, kScalar };

Broadcast classify(const Tensor& a, const Tensor& b, const char* op) {
  const Shape sa = a.shape();
  const Shape sb = b.shape();
  if (sa == sb) return Broadcast::kNone;
  if (sb.rows == 1 && sb.cols == sa.cols) return Broadcast::kRow;
  if (sb.cols == 1 && sb.rows == sa.rows) return Broadcast::kCol;
  if (sb.rows == 1 && sb.cols == 1) return Broadcast::kScalar;
  throw DimensionError(std::string(op) + ": incompatible shapes " + sa.str() +
                       " and " + sb.str());
}

// Expands b to the shape of a.
Matrix expand(const Matrix& b, Index rows, Index cols, Broadcast mode) {
  switch (mode) {
    case Broadcast::kNone:
      return b;
    case Broadcast::kRow:
      return b.replicate(rows, 1);
    case Broadcast::kCol:
      return b.replicate(1, cols);
    case Broadcast::kScalar:
      return Matrix::Constant(rows, cols, b(0, 0));
  }
  return b;
}

// Sums g down to the broadcast operand's shape.
Matrix reduce(const Matrix& g, Broadcast mode) {
  switch (mode) {
    case Broadcast::kNone:
      return g;
    case Broadcast::kRow:
      return g.colwise().sum();
    case Broadcast::kCol:
      return g.rowwise().sum();
    case Broadcast::kScalar: {
      Matrix s(1, 1);
      s(0, 0) = g.sum();
      return s;
    }
  }
  return g;
}

double stable_sigmoid(double x) {
  constexpr double kLo = std::numeric_limits<double>::min();
  constexpr double kHi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
  double y;
  if (x >= 0.0) {
    y = 1.0 / (1.0 + std::exp(-x));
  } else {
    const double e = std::exp(x);
    y = e / (1.0 + e);
  }
  return std::clamp(y, kLo, kHi);
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions disagree for " +
                         a.shape().str() + " and " + b.shape().str());
  }
  Matrix out;
  out.noalias() = a.value() * b.value();
  Node* na = a.node();
  Node* nb = b.node();
  return Tensor::make_result(std::move(out), "matmul", {a, b},
                             [na, nb](const Matrix& g) {
                               if (na->requires_grad) {
                                 Matrix da;
                                 da.noalias() = g * nb->value.transpose();
                                 na->accumulate(da);
                               }
                               if (nb->requires_grad) {
                                 Matrix db;
                                 db.noalias() = na->value.transpose() * g;
                                 nb->accumulate(db);
                               }
                             });
}

Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b) {
  if (x.cols() != w.rows() || b.rows() != 1 || b.cols() != w.cols()) {
    throw DimensionError("affine: shapes " + x.shape().str() + " * " +
                         w.shape().str() + " + " + b.shape().str() +
                         " do not compose");
  }
  Matrix out;
  out.noalias() = x.value() * w.value();
  out.rowwise() += b.value().row(0);
  Node* nx = x.node();
  Node* nw = w.node();
  Node* nb = b.node();
  return Tensor::make_result(std::move(out), "affine", {x, w, b},
                             [nx, nw, nb](const Matrix& g) {
                               if (nx->requires_grad) {
                                 Matrix dx;
                                 dx.noalias() = g * nw->value.transpose();
                                 nx->accumulate(dx);
                               }
                               if (nw->requires_grad) {
                                 Matrix dw;
                                 dw.noalias() = nx->value.transpose() * g;
                                 nw->accumulate(dw);
                               }
                               if (nb->requires_grad) {
                                 nb->accumulate(g.colwise().sum());
                               }
                             });
}

Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                            std::size_t heads, std::vector<Matrix>* weights) {
  const Index width = static_cast<Index>(q.cols());
  if (heads == 0 || width % static_cast<Index>(heads) != 0 ||
      k.cols() != q.cols() || v.cols() != q.cols() || k.rows() != v.rows() ||
      k.rows() == 0) {
    throw DimensionError("scaled_dot_attention: incompatible q " +
                         q.shape().str() + ", k " + k.shape().str() + ", v " +
                         v.shape().str() + " for " + std::to_string(heads) +
                         " heads");
  }
  const Index d = width / static_cast<Index>(heads);
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(d));
  const Matrix& qv = q.value();
  const Matrix& kv = k.value();
  const Matrix& vv = v.value();

  auto probs = std::make_shared<std::vector<Matrix>>(heads);
  Matrix out(qv.rows(), width);
  Matrix kt;
  for (Index h = 0; h < static_cast<Index>(heads); ++h) {
    Matrix& p = (*probs)[static_cast<std::size_t>(h)];
    p.resize(qv.rows(), kv.rows());
    kt = kv.middleCols(h * d, d).transpose();
    // Scores and softmax one query row at a time; the inner dimension is
    // short, so this beats a blocked product.
    for (Index r = 0; r < p.rows(); ++r) {
      auto row = p.row(r);
      row = (qv(r, h * d) * inv_sqrt) * kt.row(0);
      for (Index j = 1; j < d; ++j) row += (qv(r, h * d + j) * inv_sqrt) * kt.row(j);
      row.array() = (row.array() - row.maxCoeff()).exp();
      row /= row.sum();
    }
    out.middleCols(h * d, d).noalias() = p * vv.middleCols(h * d, d);
  }
  if (weights != nullptr) weights->insert(weights->end(), probs->begin(), probs->end());

  Node* nq = q.node();
  Node* nk = k.node();
  Node* nv = v.node();
  return Tensor::make_result(
      std::move(out), "scaled_dot_attention", {q, k, v},
      [nq, nk, nv, probs, d, inv_sqrt](const Matrix& g) {
        const Matrix& qv = nq->value;
        const Matrix& kv = nk->value;
        const Matrix& vv = nv->value;
        Matrix dq(qv.rows(), qv.cols());
        Matrix dk(kv.rows(), kv.cols());
        Matrix dv(vv.rows(), vv.cols());
        Matrix ds;
        Matrix vt;
        for (Index h = 0; h < static_cast<Index>(probs->size()); ++h) {
          const Matrix& p = (*probs)[static_cast<std::size_t>(h)];
          const auto gh = g.middleCols(h * d, d);
          dv.middleCols(h * d, d).noalias() = p.transpose() * gh;
          vt = vv.middleCols(h * d, d).transpose();
          ds.resize(p.rows(), p.cols());
          for (Index r = 0; r < p.rows(); ++r) {
            auto row = ds.row(r);
            row = gh(r, 0) * vt.row(0);
            for (Index j = 1; j < d; ++j) row += gh(r, j) * vt.row(j);
            // Softmax backward, then the 1/sqrt(d) scale.
            const double dot = p.row(r).dot(row);
            row.array() = p.row(r).array() * (row.array() - dot) * inv_sqrt;
          }
          dq.middleCols(h * d, d).noalias() = ds * kv.middleCols(h * d, d);
          dk.middleCols(h * d, d).noalias() = ds.transpose() * qv.middleCols(h * d, d);
        }
        nq->accumulate(std::move(dq));
        nk->accumulate(std::move(dk));
        nv->accumulate(std::move(dv));
      });
}

Tensor transpose(const Tensor& x) {
  Node* nx = x.node();
  return Tensor::make_result(
      x.value().transpose(), "transpose", {x},
      [nx](const Matrix& g) { nx->accumulate(g.transpose()); });
}

Tensor add(const Tensor& a, const Tensor& b) {
  const Broadcast mode = classify(a, b, "add");
  Matrix out = a.value();
  switch (mode) {
    case Broadcast::kNone:
      out += b.value();
      break;
    case Broadcast::kRow:
      out.rowwise() += b.value().row(0);
      break;
    case Broadcast::kCol:
      out.colwise() += b.value().col(0);
      break;
    case Broadcast::kScalar:
      out.array() += b.value()(0, 0);
      break;
  }
  Node* na = a.node();
  Node* nb = b.node();
  return Tensor::make_result(std::move(out), "add", {a, b},
                             [na, nb, mode](const Matrix& g) {
                               na->accumulate(g);
                               if (nb->requires_grad) {
                                 nb->accumulate(reduce(g, mode));
                               }
                             });
}

Tensor sub(const Tensor& a, const Tensor& b) { return add(a, scale(b, -1.0)); }

Tensor mul(const Tensor& a, const Tensor& b) {
  const Broadcast mode = classify(a, b, "mul");
  const Matrix bb = expand(b.value(), a.value().rows(), a.value().cols(), mode);
  Matrix out = a.value().cwiseProduct(bb);
  Node* na = a.node();
  Node* nb = b.node();
  return Tensor::make_result(
      std::move(out), "mul", {a, b}, [na, nb, mode, bb](const Matrix& g) {
        if (na->requires_grad) na->accumulate(g.cwiseProduct(bb));
        if (nb->requires_grad) {
          nb->accumulate(reduce(g.cwiseProduct(na->value), mode));
        }
      });
}

Tensor scale(const Tensor& x, double factor) {
  Node* nx = x.node();
  return Tensor::make_result(
      x.value() * factor, "scale", {x},
      [nx, factor](const Matrix& g) { nx->accumulate(g * factor); });
}

Tensor add_scalar(const Tensor& x, double offset) {
  Node* nx = x.node();
  return Tensor::make_result((x.value().array() + offset).matrix(),
                             "add_scalar", {x},
                             [nx](const Matrix& g) { nx->accumulate(g); });
}

Tensor unary_map(const Tensor& x, const char* name,
                 const std::function<double(double)>& forward,
                 const std::function<double(double, double)>& derivative) {
  Matrix out = x.value().unaryExpr(forward);
  Node* nx = x.node();
  Matrix y = out;
  return Tensor::make_result(
      std::move(out), name, {x},
      [nx, y = std::move(y), derivative](const Matrix& g) {
        Matrix d(g.rows(), g.cols());
        for (Index i = 0; i < g.size(); ++i) {
          d.data()[i] =
              g.data()[i] * derivative(nx->value.data()[i], y.data()[i]);
        }
        nx->accumulate(d);
      });
}

Tensor sigmoid(const Tensor& x) {
  Matrix out = x.value().unaryExpr(&stable_sigmoid);
  Node* nx = x.node();
  Matrix y = out;
  return Tensor::make_result(
      std::move(out), "sigmoid", {x}, [nx, y = std::move(y)](const Matrix& g) {
        nx->accumulate(
            (g.array() * y.array() * (1.0 - y.array())).matrix());
      });
}

Tensor exp(const Tensor& x) {
  Matrix out = x.value().array().exp().matrix();
  Node* nx = x.node();
  Matrix y = out;
  return Tensor::make_result(std::move(out), "exp", {x},
                             [nx, y = std::move(y)](const Matrix& g) {
                               nx->accumulate(g.cwiseProduct(y));
                             });
}

Tensor log(const Tensor& x) {
  Matrix out = x.value().array().max(kLogClamp).log().matrix();
  Node* nx = x.node();
  return Tensor::make_result(
      std::move(out), "log", {x}, [nx](const Matrix& g) {
        const auto& v = nx->value.array();
        nx->accumulate(
            (v >= kLogClamp).select(g.array() / v, 0.0).matrix());
      });
}

Tensor gelu(const Tensor& x) {
  constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;
  constexpr double kInvSqrt2Pi = std::numbers::inv_sqrtpi / std::numbers::sqrt2;
  Matrix out = x.value().unaryExpr([](double v) {
    return 0.5 * v * (1.0 + std::erf(v * kInvSqrt2));
  });
  Node* nx = x.node();
  return Tensor::make_result(
      std::move(out), "gelu", {x}, [nx](const Matrix& g) {
        Matrix d = nx->value.unaryExpr([](double v) {
          const double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
          const double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
          return cdf + v * pdf;
        });
        nx->accumulate(g.cwiseProduct(d));
      });
}

Tensor softmax_rows(const Tensor& logits) {
  if (logits.cols() == 0) {
    throw DimensionError("softmax_rows: empty rows in " +
                         logits.shape().str());
  }
  const Matrix& z = logits.value();
  Matrix out(z.rows(), z.cols());
  for (Index r = 0; r < z.rows(); ++r) {
    const double m = z.row(r).maxCoeff();
    out.row(r) = (z.row(r).array() - m).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  Node* nx = logits.node();
  Matrix y = out;
  return Tensor::make_result(
      std::move(out), "softmax_rows", {logits},
      [nx, y = std::move(y)](const Matrix& g) {
        Matrix gy = g.cwiseProduct(y);
        Eigen::VectorXd dots = gy.rowwise().sum();
        Matrix d = gy;
        d -= (y.array().colwise() * dots.array()).matrix();
        nx->accumulate(d);
      });
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  double eps) {
  const Index cols = static_cast<Index>(x.cols());
  if (gamma.rows() != 1 || static_cast<Index>(gamma.cols()) != cols ||
      beta.rows() != 1 || static_cast<Index>(beta.cols()) != cols) {
    throw DimensionError("layer_norm: affine shapes " + gamma.shape().str() +
                         ", " + beta.shape().str() + " do not match input " +
                         x.shape().str());
  }
  const Matrix& v = x.value();
  Matrix xhat(v.rows(), cols);
  Eigen::VectorXd inv_std(v.rows());
  for (Index r = 0; r < v.rows(); ++r) {
    const double mu = v.row(r).mean();
    const auto centered = (v.row(r).array() - mu);
    const double var = centered.square().mean();
    inv_std(r) = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = (centered * inv_std(r)).matrix();
  }
  Matrix out = xhat;
  out.array().rowwise() *= gamma.value().row(0).array();
  out.rowwise() += beta.value().row(0);

  Node* nx = x.node();
  Node* ng = gamma.node();
  Node* nb = beta.node();
  return Tensor::make_result(
      std::move(out), "layer_norm", {x, gamma, beta},
      [nx, ng, nb, xhat = std::move(xhat),
       inv_std = std::move(inv_std)](const Matrix& g) {
        if (ng->requires_grad) ng->accumulate(g.cwiseProduct(xhat).colwise().sum());
        if (nb->requires_grad) nb->accumulate(g.colwise().sum());
        if (!nx->requires_grad) return;
        const double n = static_cast<double>(xhat.cols());
        Matrix dxhat = g;
        dxhat.array().rowwise() *= ng->value.row(0).array();
        Matrix dx(g.rows(), g.cols());
        for (Index r = 0; r < g.rows(); ++r) {
          const double s1 = dxhat.row(r).sum();
          const double s2 = dxhat.row(r).dot(xhat.row(r));
          dx.row(r) = ((n * dxhat.row(r).array() - s1 -
                        xhat.row(r).array() * s2) *
                       (inv_std(r) / n))
                          .matrix();
        }
        nx->accumulate(dx);
      });
}

Tensor stop_grad(const Tensor& x) {
  return Tensor::make_result(x.value(), "stop_grad", {}, nullptr);
}

Tensor sum(const Tensor& x) {
  Matrix out(1, 1);
  out(0, 0) = x.value().sum();
  Node* nx = x.node();
  const Index rows = x.value().rows();
  const Index cols = x.value().cols();
  return Tensor::make_result(std::move(out), "sum", {x},
                             [nx, rows, cols](const Matrix& g) {
                               nx->accumulate(Matrix::Constant(rows, cols, g(0, 0)));
                             });
}

Tensor mean(const Tensor& x) {
  const double n = static_cast<double>(x.value().size());
  Matrix out(1, 1);
  out(0, 0) = x.value().sum() / n;
  Node* nx = x.node();
  const Index rows = x.value().rows();
  const Index cols = x.value().cols();
  return Tensor::make_result(
      std::move(out), "mean", {x}, [nx, rows, cols, n](const Matrix& g) {
        nx->accumulate(Matrix::Constant(rows, cols, g(0, 0) / n));
      });
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  const Index rows = static_cast<Index>(parts[0].rows());
  Index cols = 0;
  for (const auto& p : parts) {
    if (static_cast<Index>(p.rows()) != rows) {
      throw DimensionError("concat_cols: row counts differ: " +
                           parts[0].shape().str() + " vs " + p.shape().str());
    }
    cols += static_cast<Index>(p.cols());
  }
  Matrix out(rows, cols);
  std::vector<Node*> nodes;
  std::vector<Index> widths;
  Index offset = 0;
  for (const auto& p : parts) {
    const Index w = static_cast<Index>(p.cols());
    out.middleCols(offset, w) = p.value();
    offset += w;
    nodes.push_back(p.node());
    widths.push_back(w);
  }
  return Tensor::make_result(
      std::move(out), "concat_cols", {parts.begin(), parts.end()},
      [nodes = std::move(nodes), widths = std::move(widths)](const Matrix& g) {
        Index off = 0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
          if (nodes[i]->requires_grad) {
            nodes[i]->accumulate(g.middleCols(off, widths[i]));
          }
          off += widths[i];
        }
      });
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  const Tensor parts[] = {a, b};
  return concat_cols(parts);
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  const Index cols = static_cast<Index>(parts[0].cols());
  Index rows = 0;
  for (const auto& p : parts) {
    if (static_cast<Index>(p.cols()) != cols) {
      throw DimensionError("concat_rows: column counts differ: " +
                           parts[0].shape().str() + " vs " + p.shape().str());
    }
    rows += static_cast<Index>(p.rows());
  }
  Matrix out(rows, cols);
  std::vector<Node*> nodes;
  std::vector<Index> heights;
  Index offset = 0;
  for (const auto& p : parts) {
    const Index h = static_cast<Index>(p.rows());
    out.middleRows(offset, h) = p.value();
    offset += h;
    nodes.push_back(p.node());
    heights.push_back(h);
  }
  return Tensor::make_result(
      std::move(out), "concat_rows", {parts.begin(), parts.end()},
      [nodes = std::move(nodes),
       heights = std::move(heights)](const Matrix& g) {
        Index off = 0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
          if (nodes[i]->requires_grad) {
            nodes[i]->accumulate(g.middleRows(off, heights[i]));
          }
          off += heights[i];
        }
      });
}

Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t count) {
  if (begin + count > x.rows() || count == 0) {
    throw DimensionError("slice_rows: range [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") out of " +
                         x.shape().str());
  }
  const Index b = static_cast<Index>(begin);
  const Index n = static_cast<Index>(count);
  Node* nx = x.node();
  return Tensor::make_result(
      x.value().middleRows(b, n), "slice_rows", {x}, [nx, b, n](const Matrix& g) {
        Matrix d = Matrix::Zero(nx->value.rows(), nx->value.cols());
        d.middleRows(b, n) = g;
        nx->accumulate(d);
      });
}

Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t count) {
  if (begin + count > x.cols() || count == 0) {
    throw DimensionError("slice_cols: range [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") out of " +
                         x.shape().str());
  }
  const Index b = static_cast<Index>(begin);
  const Index n = static_cast<Index>(count);
  Node* nx = x.node();
  return Tensor::make_result(
      x.value().middleCols(b, n), "slice_cols", {x}, [nx, b, n](const Matrix& g) {
        Matrix d = Matrix::Zero(nx->value.rows(), nx->value.cols());
        d.middleCols(b, n) = g;
        nx->accumulate(d);
      });
}

Tensor select_rows(const Tensor& x, std::span<const std::size_t> rows) {
  if (rows.empty()) throw DimensionError("select_rows: empty selection");
  Matrix out(static_cast<Index>(rows.size()), x.value().cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= x.rows()) {
      throw DimensionError("select_rows: row " + std::to_string(rows[i]) +
                           " out of " + x.shape().str());
    }
    out.row(static_cast<Index>(i)) = x.value().row(static_cast<Index>(rows[i]));
  }
  Node* nx = x.node();
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return Tensor::make_result(
      std::move(out), "select_rows", {x},
      [nx, idx = std::move(idx)](const Matrix& g) {
        Matrix d = Matrix::Zero(nx->value.rows(), nx->value.cols());
        for (std::size_t i = 0; i < idx.size(); ++i) {
          d.row(static_cast<Index>(idx[i])) += g.row(static_cast<Index>(i));
        }
        nx->accumulate(d);
      });
}

Tensor pool_rows(const Tensor& x, std::span<const RowBin> bins) {
  const Matrix& v = x.value();
  Matrix out(static_cast<Index>(bins.size()), v.cols());
  for (std::size_t i = 0; i < bins.size(); ++i) {
    const RowBin& bin = bins[i];
    if (bin.end <= bin.begin || bin.end > x.rows()) {
      throw DimensionError("pool_rows: bad bin [" + std::to_string(bin.begin) +
                           ", " + std::to_string(bin.end) + ") for " +
                           x.shape().str());
    }
    auto row = out.row(static_cast<Index>(i));
    row = v.row(static_cast<Index>(bin.begin));
    for (std::size_t j = bin.begin + 1; j < bin.end; ++j) {
      row += v.row(static_cast<Index>(j));
    }
    row /= static_cast<double>(bin.end - bin.begin);
  }
  Node* nx = x.node();
  std::vector<RowBin> saved(bins.begin(), bins.end());
  return Tensor::make_result(
      std::move(out), "pool_rows", {x},
      [nx, saved = std::move(saved)](const Matrix& g) {
        Matrix d = Matrix::Zero(nx->value.rows(), nx->value.cols());
        for (std::size_t i = 0; i < saved.size(); ++i) {
          const double w = 1.0 / static_cast<double>(saved[i].end - saved[i].begin);
          for (std::size_t j = saved[i].begin; j < saved[i].end; ++j) {
            d.row(static_cast<Index>(j)) += g.row(static_cast<Index>(i)) * w;
          }
        }
        nx->accumulate(d);
      });
}

}  // namespace gatefusion
