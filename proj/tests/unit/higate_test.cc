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


#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "gatefusion/grad_suite.h"
#include "gatefusion/higate.h"
#include "oracles.h"

namespace gatefusion {
namespace {

using testing::align_oracle;
using testing::bitwise_equal;
using testing::random_matrix;

Tensor col(std::initializer_list<double> values) {
  Matrix m(values.size(), 1);
  Eigen::Index i = 0;
  for (double v : values) m(i++, 0) = v;
  return Tensor::constant(m);
}

TEST(Project, Examples) {
  const Linear zero = Linear::from_values(Matrix::Zero(3, 2), Matrix::Zero(1, 2));
  std::mt19937_64 rng(1);
  EXPECT_TRUE(project(Tensor::constant(random_matrix(4, 3, rng)), zero).value().isZero(0.0));
  const Linear id = Linear::from_values(Matrix::Identity(3, 3), Matrix::Zero(1, 3));
  const Matrix h = random_matrix(4, 3, rng);
  EXPECT_EQ(project(Tensor::constant(h), id).value(), h);
  const Linear sum = Linear::from_values(Matrix{{1.0}, {1.0}}, Matrix::Zero(1, 1));
  EXPECT_EQ(project(Tensor::constant(Matrix{{2.0, 3.0}}), sum).item(), 5.0);
}

TEST(Align, Examples) {
  EXPECT_EQ(align(col({1, 2, 3, 4}), 2).value(), col({1.5, 3.5}).value());
  EXPECT_EQ(align(col({1, 2, 3}), 2).value(), col({1.0, 2.5}).value());
  EXPECT_EQ(align(col({10, 20}), 4).value(), col({10, 10, 20, 20}).value());
  const Tensor x = col({4, 5, 6});
  EXPECT_EQ(align(x, 3).node(), x.node());
}

TEST(Align, MatchesBinOracleForAllSmallPairs) {
  std::mt19937_64 rng(2);
  for (std::size_t t_in = 1; t_in <= 12; ++t_in) {
    for (std::size_t t_out = 1; t_out <= 12; ++t_out) {
      const Matrix x = random_matrix(t_in, 3, rng);
      const Matrix got = align(Tensor::constant(x), t_out).value();
      EXPECT_TRUE(bitwise_equal(got, align_oracle(x, t_out)))
          << t_in << " -> " << t_out;
    }
  }
}

TEST(Align, DivisibleDownsamplingKeepsMean) {
  std::mt19937_64 rng(3);
  for (std::size_t t_out = 1; t_out <= 12; ++t_out) {
    for (std::size_t k = 1; t_out * k <= 12; ++k) {
      const Matrix x = random_matrix(t_out * k, 4, rng);
      const Matrix y = align(Tensor::constant(x), t_out).value();
      for (Eigen::Index c = 0; c < x.cols(); ++c) {
        EXPECT_NEAR(y.col(c).mean(), x.col(c).mean(), 1e-12);
      }
    }
  }
}

TEST(Align, ZeroFramesIsDimensionError) {
  EXPECT_THROW(align_bins(0, 3), DimensionError);
  EXPECT_THROW(align_bins(3, 0), DimensionError);
}

TEST(Gate, Examples) {
  ParamInit init(4);
  GateUnit unit = GateUnit::create(3, GateMode::kVector, init);
  unit.linear.weight.mutable_value().setZero();
  std::mt19937_64 rng(4);
  const Tensor f = Tensor::constant(random_matrix(2, 3, rng));
  const Tensor c = Tensor::constant(random_matrix(2, 3, rng));
  EXPECT_TRUE((gate(f, c, unit).value().array() == 0.5).all());

  unit.linear.bias.mutable_value().setConstant(-1e4);
  const Matrix closed = gate(f, c, unit).value();
  EXPECT_GT(closed.minCoeff(), 0.0);
  EXPECT_LT(closed.maxCoeff(), 1e-300);

  const GateUnit one{Linear::from_values(Matrix{{1.0}, {1.0}}, Matrix::Zero(1, 1))};
  EXPECT_NEAR(gate(Tensor::scalar(1.0), Tensor::scalar(2.0), one).item(), 0.952574, 1e-6);
}

TEST(Gate, StrictlyInsideUnitInterval) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const GateUnit unit{Linear::from_values(random_matrix(8, 4, rng, 30.0),
                                            random_matrix(1, 4, rng, 30.0))};
    const Matrix g = gate(Tensor::constant(random_matrix(3, 4, rng, 10.0)),
                          Tensor::constant(random_matrix(3, 4, rng, 10.0)), unit)
                         .value();
    EXPECT_GT(g.minCoeff(), 0.0);
    EXPECT_LT(g.maxCoeff(), 1.0);
  }
}

TEST(Gate, ScalarModeBroadcastsOverFeatures) {
  ParamInit init(6);
  const GateUnit unit = GateUnit::create(4, GateMode::kScalar, init);
  std::mt19937_64 rng(6);
  const Tensor g = gate(Tensor::constant(random_matrix(3, 4, rng)),
                        Tensor::constant(random_matrix(3, 4, rng)), unit);
  EXPECT_EQ(g.cols(), 1u);
  const Tensor f = Tensor::constant(random_matrix(3, 4, rng));
  const Tensor h = Tensor::constant(random_matrix(3, 4, rng));
  const Matrix fused = fuse_step(f, h, g, testing::identity_norm(4)).value();
  EXPECT_EQ(fused.rows(), 3);
  EXPECT_EQ(fused.cols(), 4);
}

TEST(FuseStep, Examples) {
  const LayerNorm ln = testing::identity_norm(2);
  std::mt19937_64 rng(7);
  const Tensor f = Tensor::constant(random_matrix(3, 2, rng));
  const Tensor h = Tensor::constant(random_matrix(3, 2, rng));
  const Tensor closed = Tensor::constant(Matrix::Zero(3, 2));
  EXPECT_TRUE(bitwise_equal(fuse_step(f, h, closed, ln).value(), ln(f).value()));

  const Tensor open = Tensor::constant(Matrix::Ones(3, 2));
  EXPECT_TRUE(bitwise_equal(fuse_step(Tensor::constant(Matrix::Zero(3, 2)), h, open, ln).value(),
                            ln(h).value()));

  const LayerNorm ln_exact{Tensor::constant(Matrix::Ones(1, 2)), Tensor::constant(Matrix::Zero(1, 2))};
  const Tensor y = layer_norm(add(Tensor::constant(Matrix{{1.0, 3.0}}),
                                  mul(Tensor::constant(Matrix{{2.0, 2.0}}),
                                      Tensor::constant(Matrix{{0.5, 0.5}}))),
                              ln_exact.gamma, ln_exact.beta, 1e-15);
  EXPECT_NEAR(y.at(0, 0), -1.0, 1e-12);
  EXPECT_NEAR(y.at(0, 1), 1.0, 1e-12);
  const Matrix y_default = fuse_step(Tensor::constant(Matrix{{1.0, 3.0}}),
                                     Tensor::constant(Matrix{{2.0, 2.0}}),
                                     Tensor::constant(Matrix{{0.5, 0.5}}), ln)
                               .value();
  EXPECT_NEAR(y_default(0, 1), 1.0, 1e-5);
}

FusionSpec spec_of(std::vector<std::size_t> layers, std::size_t width) {
  FusionSpec s;
  s.layers = std::move(layers);
  s.width = width;
  return s;
}

HiddenStack random_stack(std::size_t depth, std::size_t t, std::size_t width,
                         std::mt19937_64& rng) {
  HiddenStack stack;
  for (std::size_t l = 0; l <= depth; ++l) {
    stack.push_back(Tensor::constant(random_matrix(t, width, rng)));
  }
  return stack;
}

TEST(HiGateForward, NoFusionLayersIsIdentity) {
  ParamInit init(8);
  const HiGateDirection d = HiGateDirection::create(spec_of({}, 4), 5, init);
  std::mt19937_64 rng(8);
  const Tensor f = Tensor::parameter(random_matrix(6, 4, rng));
  const Tensor out = d.forward(f, random_stack(3, 12, 5, rng));
  EXPECT_EQ(out.node(), f.node());
  EXPECT_TRUE(bitwise_equal(out.value(), f.value()));
}

TEST(HiGateForward, ClosedGatesReduceToRepeatedNorm) {
  std::mt19937_64 rng(9);
  for (std::size_t n = 1; n <= 4; ++n) {
    std::vector<std::size_t> layers;
    for (std::size_t i = 1; i <= n; ++i) layers.push_back(i);
    ParamInit init(9 + n);
    HiGateDirection d = HiGateDirection::create(spec_of(layers, 4), 3, init);
    for (auto& step : d.steps) {
      step.gate.linear.bias.mutable_value().setConstant(-1e4);
    }
    const Tensor f = Tensor::constant(random_matrix(5, 4, rng, 2.0));
    const Matrix out = d.forward(f, random_stack(n, 10, 3, rng)).value();
    const LayerNorm ln = testing::identity_norm(4);
    Tensor chain = f;
    for (std::size_t i = 0; i < n; ++i) chain = ln(chain);
    EXPECT_TRUE(bitwise_equal(out, chain.value())) << n;
    // Each extra pass moves a unit-variance row by O(eps).
    EXPECT_LE((out - ln(f).value()).cwiseAbs().maxCoeff(), 1e-4) << n;
  }
}

// Direct Eigen arithmetic for one direction, independent of the op library.
Matrix manual_direction(const Matrix& primary, const HiddenStack& context,
                        const HiGateDirection& d) {
  Matrix f = primary;
  for (const auto& step : d.steps) {
    const Matrix& h = context[step.layer].value();
    Matrix proj = h * step.context_projection.weight.value();
    proj.rowwise() += step.context_projection.bias.value().row(0);
    const Matrix c = align_oracle(proj, static_cast<std::size_t>(f.rows()));
    Matrix joined(f.rows(), f.cols() + c.cols());
    joined << f, c;
    Matrix z = joined * step.gate.linear.weight.value();
    z.rowwise() += step.gate.linear.bias.value().row(0);
    const Matrix g = z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
    const Matrix pre = (f.array() + g.array() * c.array()).matrix();
    for (Eigen::Index r = 0; r < f.rows(); ++r) {
      std::vector<double> row(pre.row(r).data(), pre.row(r).data() + pre.cols());
      const auto n = testing::layer_norm_row(row, kLayerNormEps);
      for (Eigen::Index k = 0; k < f.cols(); ++k) {
        f(r, k) = n[k] * step.norm.gamma.at(0, k) + step.norm.beta.at(0, k);
      }
    }
  }
  return f;
}

TEST(HiGateForward, TwoLayersMatchManualComposition) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    ParamInit init(100 + trial);
    HiGateDirection d = HiGateDirection::create(spec_of({1, 3}, 2), 3, init);
    ParameterList params;
    d.collect("d", params);
    testing::scramble(params, rng, 0.7);
    const Matrix f = random_matrix(2, 2, rng);
    const HiddenStack ctx = random_stack(3, 8, 3, rng);
    const Matrix got = d.forward(Tensor::constant(f), ctx).value();
    const Matrix want = manual_direction(f, ctx, d);
    EXPECT_LE((got - want).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(HiGateForward, FusionIndexBeyondStackIsConfigError) {
  ParamInit init(11);
  const HiGateDirection d = HiGateDirection::create(spec_of({2, 5}, 4), 4, init);
  std::mt19937_64 rng(11);
  EXPECT_THROW(d.forward(Tensor::constant(random_matrix(3, 4, rng)), random_stack(3, 3, 4, rng)),
               ConfigError);
  EXPECT_THROW(spec_of({2, 5}, 4).validate(4), ConfigError);
  EXPECT_THROW(spec_of({3, 2}, 4).validate(4), ConfigError);
  EXPECT_NO_THROW(spec_of({2, 4}, 4).validate(4));
}

TEST(HiGateForward, MirroredDirectionsAgree) {
  std::mt19937_64 rng(12);
  ParamInit init(12);
  HiGateDecoder dec(spec_of({1, 2}, 4), 5, 5, init);
  ParameterList a;
  ParameterList v;
  dec.direction(Direction::kAudioPrimary).collect("a", a);
  dec.direction(Direction::kVideoPrimary).collect("v", v);
  testing::scramble(a, rng, 0.5);
  ASSERT_EQ(a.size(), v.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    v[i].tensor.mutable_value() = a[i].tensor.value();
  }
  const Tensor f = Tensor::constant(random_matrix(6, 4, rng));
  const HiddenStack stack = random_stack(2, 6, 5, rng);
  const HiGateOutput out = dec.forward(f, f, stack, stack);
  EXPECT_TRUE(bitwise_equal(out.fused_audio.value(), out.fused_video.value()));
}

TEST(Combine, Examples) {
  std::mt19937_64 rng(13);
  const Matrix v = random_matrix(3, 2, rng);
  EXPECT_EQ(combine(Tensor::constant(Matrix::Zero(6, 2)), Tensor::constant(v)).value(), v);
  const Matrix x = random_matrix(3, 2, rng);
  EXPECT_EQ(combine(Tensor::constant(x), Tensor::constant(x)).value(), (2.0 * x).eval());
  EXPECT_EQ(combine(col({1, 2, 3, 4}), col({10, 20})).value(), col({11.5, 23.5}).value());
}

TEST(GradSuite, HigateModulePasses) {
  GradSuiteOptions options;
  options.modules = {"higate"};
  const GradSuiteReport report = run_grad_suite(options);
  ASSERT_FALSE(report.cases.empty());
  for (const auto& c : report.cases) {
    EXPECT_TRUE(c.passed()) << c.op << " max_rel=" << c.report.max_rel_error();
  }
}

}  // namespace
}  // namespace gatefusion
