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
#include "gatefusion/losses.h"
#include "gatefusion/model.h"
#include "oracles.h"

namespace gatefusion {
namespace {

using testing::random_matrix;

FrameLabels labels_of(std::vector<std::uint8_t> y) { return FrameLabels{std::move(y)}; }

Tensor probs(std::initializer_list<std::pair<double, double>> rows) {
  Matrix m(rows.size(), 2);
  Eigen::Index r = 0;
  for (auto [p0, p1] : rows) {
    m(r, 0) = p0;
    m(r++, 1) = p1;
  }
  return Tensor::constant(m);
}

// Bundle whose four distributions are given directly.
PredictionBundle bundle_of(const Tensor& p_av, const Tensor& p_a, const Tensor& p_v) {
  return PredictionBundle{p_av, p_av.detach(), p_a, p_v};
}

TEST(ClassifyAv, ZeroNetworkIsUniform) {
  ParamInit init(1);
  AvClassifier head = AvClassifier::create(4, init);
  ParameterList params;
  head.collect("h", params);
  for (auto p : params) p.tensor.mutable_value().setZero();
  std::mt19937_64 rng(1);
  const Matrix logits = head(Tensor::constant(random_matrix(3, 4, rng))).value();
  EXPECT_TRUE(logits.isZero(0.0));
  EXPECT_TRUE((softmax_rows(Tensor::constant(logits)).value().array() == 0.5).all());
}

TEST(ClassifyAv, OriginIsFixedPoint) {
  ParamInit init(2);
  AvClassifier head = AvClassifier::create(4, init);
  head.hidden.bias.mutable_value().setZero();
  head.out.bias.mutable_value().setZero();
  EXPECT_TRUE(head(Tensor::zeros(2, 4)).value().isZero(0.0));
}

TEST(ClassifyAv, ScalarGeluExample) {
  const AvClassifier head{Linear::from_values(Matrix{{1.0}}, Matrix::Zero(1, 1)),
                          Linear::from_values(Matrix{{1.0, -1.0}}, Matrix::Zero(1, 2))};
  const Matrix logits = head(Tensor::scalar(1.0)).value();
  EXPECT_NEAR(logits(0, 0), 0.841345, 1e-6);
  EXPECT_NEAR(logits(0, 1), -0.841345, 1e-6);
}

TEST(ClassifyUni, Examples) {
  ParamInit init(3);
  UniClassifier head = UniClassifier::create(5, init);
  std::mt19937_64 rng(3);
  const Tensor x = Tensor::constant(random_matrix(4, 5, rng));
  const Tensor logits = head(x);
  EXPECT_EQ(logits.rows(), 4u);
  EXPECT_EQ(logits.cols(), 2u);
  head.linear.weight.mutable_value().setZero();
  EXPECT_TRUE((softmax_rows(head(x)).value().array() == 0.5).all());

  const UniClassifier scalar{Linear::from_values(Matrix{{2.0, 0.0}}, Matrix::Zero(1, 2))};
  const Matrix p = softmax_rows(scalar(Tensor::scalar(1.0))).value();
  EXPECT_NEAR(p(0, 0), 0.880797, 1e-6);
  EXPECT_NEAR(p(0, 1), 0.119203, 1e-6);
}

TEST(Mal, Examples) {
  const Tensor p = probs({{0.8, 0.2}, {0.3, 0.7}});
  EXPECT_EQ(mal_loss(bundle_of(p, p, p), labels_of({1, 1})).item(), 0.0);
  EXPECT_EQ(mal_loss(bundle_of(p, probs({{0.5, 0.5}, {0.1, 0.9}}), p), labels_of({0, 0})).item(),
            0.0);

  const PredictionBundle b =
      bundle_of(probs({{0.8, 0.2}}), probs({{0.5, 0.5}}), probs({{0.8, 0.2}}));
  const double kl_a = 0.8 * std::log(0.8 / 0.5) + 0.2 * std::log(0.2 / 0.5);
  EXPECT_NEAR(kl_a, 0.192745, 1e-6);
  EXPECT_NEAR(mal_loss(b, labels_of({1})).item(), 0.096372, 1e-6);
}

TEST(Mal, NonNegativeAndZeroOnlyWhenMatched) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t t = 1 + rng() % 10;
    std::vector<std::uint8_t> y(t);
    for (auto& v : y) v = rng() % 2;
    const PredictionBundle b = PredictionBundle::from_logits(
        Tensor::constant(random_matrix(t, 2, rng, 2.0)),
        Tensor::constant(random_matrix(t, 2, rng, 2.0)),
        Tensor::constant(random_matrix(t, 2, rng, 2.0)));
    EXPECT_GE(mal_loss(b, labels_of(y)).item(), 0.0);
  }
}

TEST(Mal, NegativeFramesAreMaskedExactly) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t t = 2 + rng() % 10;
    std::vector<std::uint8_t> y(t);
    for (auto& v : y) v = rng() % 2;
    y[0] = 1;
    y[1] = 0;
    const Matrix av = random_matrix(t, 2, rng);
    const Matrix a = random_matrix(t, 2, rng);
    const Matrix v = random_matrix(t, 2, rng);
    Matrix a2 = a;
    Matrix v2 = v;
    for (std::size_t i = 0; i < t; ++i) {
      if (y[i] == 0) {
        a2.row(i) += random_matrix(1, 2, rng, 3.0);
        v2.row(i) += random_matrix(1, 2, rng, 3.0);
      }
    }
    auto mal = [&](const Matrix& la, const Matrix& lv) {
      return mal_loss(PredictionBundle::from_logits(Tensor::constant(av), Tensor::constant(la),
                                                    Tensor::constant(lv)),
                      labels_of(y))
          .item();
    };
    EXPECT_EQ(mal(a, v), mal(a2, v2));
  }
}

TEST(Opp, Examples) {
  EXPECT_EQ(opp_loss(probs({{0.1, 0.9}, {0.4, 0.6}}), labels_of({1, 1})).item(), 0.0);
  EXPECT_EQ(opp_loss(probs({{1.0, 0.0}, {1.0, 0.0}}), labels_of({0, 1})).item(), 0.0);
  EXPECT_NEAR(opp_loss(probs({{0.1, 0.9}, {0.4, 0.6}}), labels_of({1, 0})).item(), 0.3, 1e-12);
}

TEST(Opp, BoundedMonotoneAndBlindToPositives) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t t = 2 + rng() % 10;
    std::vector<std::uint8_t> y(t);
    for (auto& v : y) v = rng() % 2;
    y[0] = 0;
    y[1] = 1;
    Matrix p(t, 2);
    for (std::size_t i = 0; i < t; ++i) {
      p(i, 1) = u(rng);
      p(i, 0) = 1.0 - p(i, 1);
    }
    const double base = opp_loss(Tensor::constant(p), labels_of(y)).item();
    EXPECT_GE(base, 0.0);
    EXPECT_LE(base, 1.0);

    Matrix moved_pos = p;
    moved_pos(1, 1) = u(rng);
    moved_pos(1, 0) = 1.0 - moved_pos(1, 1);
    EXPECT_EQ(opp_loss(Tensor::constant(moved_pos), labels_of(y)).item(), base);

    Matrix raised = p;
    raised(0, 1) = p(0, 1) + (1.0 - p(0, 1)) * u(rng);
    raised(0, 0) = 1.0 - raised(0, 1);
    EXPECT_GE(opp_loss(Tensor::constant(raised), labels_of(y)).item(), base);
  }
}

TEST(Cls, Examples) {
  EXPECT_NEAR(cls_loss(probs({{0.5, 0.5}, {0.5, 0.5}}), labels_of({1, 0})).item(), std::log(2.0),
              1e-15);
  EXPECT_EQ(cls_loss(probs({{0.0, 1.0}, {1.0, 0.0}}), labels_of({1, 0})).item(), 0.0);
  EXPECT_NEAR(cls_loss(probs({{0.25, 0.75}}), labels_of({1})).item(), 0.287682, 1e-6);
  // A confidently wrong frame is capped by the log clamp.
  EXPECT_NEAR(cls_loss(probs({{1.0, 0.0}}), labels_of({1})).item(), -std::log(1e-12), 1e-9);
}

TEST(Cls, LogitGradientIsSoftmaxMinusOneHot) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t t = 1 + rng() % 8;
    std::vector<std::uint8_t> y(t);
    for (auto& v : y) v = rng() % 2;
    const FrameLabels labels = labels_of(y);
    const Tensor logits = Tensor::parameter(random_matrix(t, 2, rng, 2.0));
    cls_loss(softmax_rows(logits), labels).backward();
    const Matrix p = softmax_rows(logits.detach()).value();
    const Matrix want = (p - labels.one_hot()) / static_cast<double>(t);
    EXPECT_LE((logits.grad() - want).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(TotalLoss, Examples) {
  const Tensor cls = Tensor::scalar(0.693147);
  const Tensor mal = Tensor::scalar(0.096372);
  const Tensor opp = Tensor::scalar(0.3);
  EXPECT_EQ(total_loss(cls, mal, opp, LossWeights{0.0, 0.0}).item(), 0.693147);
  EXPECT_NEAR(total_loss(cls, mal, opp, LossWeights{}).item(), 0.724111, 1e-6);
  EXPECT_EQ(LossWeights{}.mal, 0.01);
  EXPECT_EQ(LossWeights{}.opp, 0.1);
  EXPECT_THROW((LossWeights{-1.0, 0.0}.validate()), ConfigError);
}

TEST(TotalLoss, AuxiliaryHeadsOnlyLearnFromTheirLosses) {
  std::mt19937_64 rng(8);
  const Tensor la = Tensor::parameter(random_matrix(4, 2, rng));
  const Tensor lv = Tensor::parameter(random_matrix(4, 2, rng));
  const Tensor lav = Tensor::parameter(random_matrix(4, 2, rng));
  const FrameLabels y = labels_of({1, 0, 1, 0});
  const LossTerms t = compute_losses(PredictionBundle::from_logits(lav, la, lv), y,
                                     LossWeights{0.0, 0.0});
  t.total.backward();
  EXPECT_TRUE(la.grad().isZero(0.0));
  EXPECT_TRUE(lv.grad().isZero(0.0));
  EXPECT_FALSE(lav.grad().isZero(0.0));
}

TEST(PredictionBundle, LiveAndDetachedAgree) {
  std::mt19937_64 rng(9);
  const Tensor logits = Tensor::parameter(random_matrix(5, 2, rng));
  const PredictionBundle b = PredictionBundle::from_logits(
      logits, Tensor::constant(random_matrix(5, 2, rng)), Tensor::constant(random_matrix(5, 2, rng)));
  EXPECT_TRUE(testing::bitwise_equal(b.p_av_live.value(), b.p_av_detached.value()));
  EXPECT_TRUE(b.p_av_live.requires_grad());
  EXPECT_FALSE(b.p_av_detached.requires_grad());
  for (const Tensor* p : {&b.p_av_live, &b.p_a, &b.p_v}) {
    for (Eigen::Index r = 0; r < 5; ++r) EXPECT_NEAR(p->value().row(r).sum(), 1.0, 1e-12);
  }
}

ModelConfig tiny_model(DecoderKind kind) {
  ModelConfig cfg;
  for (EncoderConfig* e : {&cfg.audio, &cfg.video}) {
    e->layers = 2;
    e->width = 4;
    e->heads = 2;
    e->input_width = 3;
    e->max_positions = 16;
  }
  cfg.fusion.layers = {1, 2};
  cfg.fusion.width = 4;
  cfg.decoder = kind;
  return cfg;
}

bool only_via_p_av(const std::string& name) {
  return name.rfind("decoder", 0) == 0 || name.rfind("head.av", 0) == 0;
}

TEST(StopGradSemantics, MalIgnoresMultimodalPathClsDoesNot) {
  std::mt19937_64 rng(10);
  for (DecoderKind kind : kAllDecoderKinds) {
    GateFusionModel model(tiny_model(kind), 10);
    const ParameterList params = model.parameters();
    testing::scramble(params, rng, 0.5);
    const Matrix audio = random_matrix(8, 3, rng);
    const Matrix video = random_matrix(4, 3, rng);
    const FrameLabels y = labels_of({1, 0, 1, 1});

    const ModelOutput out = model.forward(audio, video);
    mal_loss(out.predictions, y).backward();
    std::size_t checked = 0;
    for (const auto& p : params) {
      if (!only_via_p_av(p.name)) continue;
      ++checked;
      EXPECT_TRUE(p.tensor.grad().isZero(0.0)) << p.name;
    }
    EXPECT_GT(checked, 0u);

    for (auto p : params) p.tensor.zero_grad();
    const ModelOutput again = model.forward(audio, video);
    cls_loss(again.predictions.p_av_live, y).backward();
    for (const auto& p : params) {
      if (!only_via_p_av(p.name)) continue;
      // A few biases can cancel by symmetry; weights must all move.
      if (p.name.find("weight") != std::string::npos) {
        EXPECT_FALSE(p.tensor.grad().isZero(0.0)) << p.name;
      }
    }
    for (auto p : params) p.tensor.zero_grad();
  }
}

TEST(GradSuite, HeadsLossesModulePasses) {
  GradSuiteOptions options;
  options.modules = {"heads_losses"};
  const GradSuiteReport report = run_grad_suite(options);
  ASSERT_FALSE(report.cases.empty());
  for (const auto& c : report.cases) {
    EXPECT_TRUE(c.passed()) << c.op << " max_rel=" << c.report.max_rel_error();
  }
}

}  // namespace
}  // namespace gatefusion
