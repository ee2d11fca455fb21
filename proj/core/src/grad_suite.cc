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

#include "gatefusion/grad_suite.h"

#include <algorithm>
#include <random>

#include "gatefusion/baselines.h"
#include "gatefusion/encoder.h"
#include "gatefusion/higate.h"
#include "gatefusion/layers.h"
#include "gatefusion/losses.h"
#include "gatefusion/model.h"
#include "gatefusion/ops.h"
#include "gatefusion/synthdata.h"

namespace gatefusion {
namespace {

using Rng = std::mt19937_64;

struct Instance {
  ParameterList params;
  std::function<Tensor()> loss;
};

struct Case {
  const char* module;
  const char* op;
  std::function<Instance(Rng&, const GradSuiteOptions&)> make;
};

std::size_t dim(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

Matrix randn(Rng& rng, std::size_t r, std::size_t c, double s = 1.0) {
  std::normal_distribution<double> n(0.0, s);
  Matrix m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

Tensor param(Rng& rng, std::size_t r, std::size_t c, double s = 1.0) {
  return Tensor::parameter(randn(rng, r, c, s));
}

// Random linear functional of `out` so every output entry matters.
Tensor probe(const Tensor& out, const Matrix& weights) {
  return sum(mul(out, Tensor::constant(weights)));
}

std::function<Tensor()> probed(Rng& rng, std::size_t r, std::size_t c,
                               std::function<Tensor()> f) {
  Matrix w = randn(rng, r, c);
  return [f = std::move(f), w = std::move(w)] { return probe(f(), w); };
}

// Re-draws every parameter at a scale that gives generic gradients.
void scramble(ParameterList& params, Rng& rng, double s = 0.5) {
  for (auto& p : params) {
    p.tensor.mutable_value() = randn(rng, p.tensor.rows(), p.tensor.cols(), s);
  }
}

FrameLabels random_labels(Rng& rng, std::size_t t) {
  FrameLabels labels;
  std::bernoulli_distribution coin(0.5);
  for (std::size_t i = 0; i < t; ++i) labels.y.push_back(coin(rng) ? 1 : 0);
  labels.y[0] = 1;
  if (t > 1) labels.y[t - 1] = 0;
  return labels;
}

UnaryOp pick(const GradSuiteOptions& o, const std::string& name, UnaryOp fallback) {
  const auto it = o.overrides.find(name);
  return it == o.overrides.end() ? std::move(fallback) : it->second;
}

Case unary_case(const char* name, UnaryOp op, double offset, double spread) {
  return {"numerics", name, [=](Rng& rng, const GradSuiteOptions& o) {
            const std::size_t r = dim(rng, 1, 4), c = dim(rng, 1, 4);
            Matrix x = randn(rng, r, c, spread);
            if (offset > 0.0) x = x.array().abs() + offset;
            Tensor t = Tensor::parameter(x);
            UnaryOp f = pick(o, name, op);
            return Instance{{{"x", t}}, probed(rng, r, c, [=] { return f(t); })};
          }};
}

enum class Broadcast { kNone, kRow, kCol, kScalar };

Case binary_case(const char* name, Tensor (*op)(const Tensor&, const Tensor&),
                 Broadcast mode) {
  return {"numerics", name, [=](Rng& rng, const GradSuiteOptions&) {
            const std::size_t r = dim(rng, 1, 4), c = dim(rng, 1, 4);
            const std::size_t br = (mode == Broadcast::kNone || mode == Broadcast::kCol) ? r : 1;
            const std::size_t bc = (mode == Broadcast::kNone || mode == Broadcast::kRow) ? c : 1;
            Tensor a = param(rng, r, c), b = param(rng, br, bc);
            return Instance{{{"a", a}, {"b", b}},
                            probed(rng, r, c, [=] { return op(a, b); })};
          }};
}

std::vector<Case> numerics_cases() {
  std::vector<Case> cases;
  cases.push_back({"numerics", "matmul", [](Rng& rng, const GradSuiteOptions&) {
                     const std::size_t r = dim(rng, 1, 4), k = dim(rng, 1, 4), c = dim(rng, 1, 4);
                     Tensor a = param(rng, r, k), b = param(rng, k, c);
                     return Instance{{{"a", a}, {"b", b}},
                                     probed(rng, r, c, [=] { return matmul(a, b); })};
                   }});
  cases.push_back({"numerics", "transpose", [](Rng& rng, const GradSuiteOptions&) {
                     const std::size_t r = dim(rng, 1, 4), c = dim(rng, 1, 4);
                     Tensor x = param(rng, r, c);
                     return Instance{{{"x", x}}, probed(rng, c, r, [=] { return transpose(x); })};
                   }});
  cases.push_back(binary_case("add", add, Broadcast::kNone));
  cases.push_back(binary_case("add_row", add, Broadcast::kRow));
  cases.push_back(binary_case("add_col", add, Broadcast::kCol));
  cases.push_back(binary_case("add_scalar_tensor", add, Broadcast::kScalar));
  cases.push_back(binary_case("sub", sub, Broadcast::kNone));
  cases.push_back(binary_case("sub_row", sub, Broadcast::kRow));
  cases.push_back(binary_case("mul", mul, Broadcast::kNone));
  cases.push_back(binary_case("mul_row", mul, Broadcast::kRow));
  cases.push_back(binary_case("mul_col", mul, Broadcast::kCol));
  cases.push_back(binary_case("mul_scalar_tensor", mul, Broadcast::kScalar));
  cases.push_back(unary_case("scale", [](const Tensor& x) { return scale(x, -1.7); }, 0.0, 1.0));
  cases.push_back(unary_case("add_scalar", [](const Tensor& x) { return add_scalar(x, 0.3); }, 0.0, 1.0));
  cases.push_back(unary_case("sigmoid", [](const Tensor& x) { return sigmoid(x); }, 0.0, 2.0));
  cases.push_back(unary_case("exp", [](const Tensor& x) { return exp(x); }, 0.0, 1.0));
  cases.push_back(unary_case("log", [](const Tensor& x) { return log(x); }, 0.5, 1.0));
  cases.push_back(unary_case("gelu", [](const Tensor& x) { return gelu(x); }, 0.0, 2.0));
  cases.push_back(unary_case("softmax_rows", [](const Tensor& x) { return softmax_rows(x); }, 0.0, 1.5));
  cases.push_back({"numerics", "layer_norm", [](Rng& rng, const GradSuiteOptions&) {
                     const std::size_t r = dim(rng, 1, 4), c = dim(rng, 2, 6);
                     Tensor x = param(rng, r, c), g = param(rng, 1, c), b = param(rng, 1, c);
                     return Instance{{{"x", x}, {"gamma", g}, {"beta", b}},
                                     probed(rng, r, c, [=] { return layer_norm(x, g, b); })};
                   }});
  cases.push_back({"numerics", "sum", [](Rng& rng, const GradSuiteOptions&) {
                     Tensor x = param(rng, dim(rng, 1, 4), dim(rng, 1, 4));
                     return Instance{{{"x", x}}, [=] { return scale(sum(mul(x, x)), 0.5); }};
                   }});
  cases.push_back({"numerics", "mean", [](Rng& rng, const GradSuiteOptions&) {
                     Tensor x = param(rng, dim(rng, 1, 4), dim(rng, 1, 4));
                     return Instance{{{"x", x}}, [=] { return mean(mul(x, x)); }};
                   }});
  cases.push_back({"numerics", "concat_cols", [](Rng& rng, const GradSuiteOptions&) {
                     const std::size_t r = dim(rng, 1, 4), c1 = dim(rng, 1, 3), c2 = dim(rng, 1, 3);
                     Tensor a = param(rng, r, c1), b = param(rng, r, c2);
                     return Instance{{{"a", a}, {"b", b}},
                                     probed(rng, r, c1 + c2, [=] { return concat_cols(a, b); })};
                   }});
  cases.push_back({"numerics", "concat_rows", [](Rng& rng, const GradSuiteOptions&) {
                     const std::size_t c = dim(rng, 1, 4), r1 = dim(rng, 1, 3), r2 = dim(rng, 1, 3);
                     Tensor a = param(rng, r1, c), b = param(rng, r2, c);
                     return Instance{{{"a", a}, {"b", b}}, probed(rng, r1 + r2, c, [=] {
                                       const Tensor parts[] = {a, b};
                                       return concat_rows(parts);
                                     })};
                   }});
  cases.push_back({"numerics", "slice_rows", [](Rng& rng, const GradSuiteOptions&) {
                     const std::size_t r = dim(rng, 2, 5), c = dim(rng, 1, 4);
                     const std::size_t begin = dim(rng, 0, r - 1), count = dim(rng, 1, r - begin);
                     Tensor x = param(rng, r, c);
                     return Instance{{{"x", x}}, probed(rng, count, c, [=] {
                                       return slice_rows(x, begin, count);
                                     })};
                   }});
  cases.push_back({"numerics", "slice_cols", [](Rng& rng, const GradSuiteOptions&) {
                     const std::size_t r = dim(rng, 1, 4), c = dim(rng, 2, 5);
                     const std::size_t begin = dim(rng, 0, c - 1), count = dim(rng, 1, c - begin);
                     Tensor x = param(rng, r, c);
                     return Instance{{{"x", x}}, probed(rng, r, count, [=] {
                                       return slice_cols(x, begin, count);
                                     })};
                   }});
  cases.push_back({"numerics", "select_rows", [](Rng& rng, const GradSuiteOptions&) {
                     const std::size_t r = dim(rng, 1, 4), c = dim(rng, 1, 4), n = dim(rng, 1, 6);
                     std::vector<std::size_t> rows;
                     for (std::size_t i = 0; i < n; ++i) rows.push_back(dim(rng, 0, r - 1));
                     Tensor x = param(rng, r, c);
                     return Instance{{{"x", x}}, probed(rng, n, c, [=] { return select_rows(x, rows); })};
                   }});
  cases.push_back({"numerics", "align", [](Rng& rng, const GradSuiteOptions&) {
                     const std::size_t t_in = dim(rng, 1, 9), t_out = dim(rng, 1, 9), c = dim(rng, 1, 3);
                     Tensor x = param(rng, t_in, c);
                     return Instance{{{"x", x}}, probed(rng, t_out, c, [=] { return align(x, t_out); })};
                   }});
  return cases;
}

std::vector<Case> encoder_cases() {
  std::vector<Case> cases;
  cases.push_back({"encoder", "attention", [](Rng& rng, const GradSuiteOptions&) {
                     ParamInit init(rng());
                     const std::size_t tq = dim(rng, 1, 4), tk = dim(rng, 1, 4);
                     const auto mha = MultiHeadAttention::create(4, 2, init);
                     ParameterList params;
                     mha.collect("attention", params);
                     scramble(params, rng);
                     Tensor q = param(rng, tq, 4), kv = param(rng, tk, 4);
                     params.push_back({"queries", q});
                     params.push_back({"keys_values", kv});
                     return Instance{params, probed(rng, tq, 4, [=] { return mha(q, kv); })};
                   }});
  cases.push_back({"encoder", "transformer_block", [](Rng& rng, const GradSuiteOptions&) {
                     ParamInit init(rng());
                     const EncoderConfig cfg{1, 8, 2, 2, 8, 8};
                     const auto block = TransformerBlock::create(cfg, init);
                     ParameterList params;
                     block.collect("block", params);
                     scramble(params, rng);
                     const std::size_t t = dim(rng, 1, 4);
                     Tensor h = param(rng, t, 8);
                     params.push_back({"h", h});
                     return Instance{params, probed(rng, t, 8, [=] { return block(h); })};
                   }});
  cases.push_back({"encoder", "encoder", [](Rng& rng, const GradSuiteOptions&) {
                     ParamInit init(rng());
                     const EncoderConfig cfg{2, 8, 2, 2, 3, 6};
                     auto enc = std::make_shared<Encoder>(cfg, init);
                     ParameterList params;
                     enc->collect("encoder", params);
                     scramble(params, rng);
                     const std::size_t t = dim(rng, 1, 6);
                     Tensor raw = param(rng, t, 3);
                     params.push_back({"raw", raw});
                     // Every hidden state feeds the loss, as fusion reads them all.
                     std::vector<Matrix> w;
                     for (std::size_t l = 0; l <= cfg.layers; ++l) w.push_back(randn(rng, t, 8));
                     return Instance{params, [=] {
                                       const HiddenStack hs = enc->encode(raw);
                                       Tensor total = probe(hs[0], w[0]);
                                       for (std::size_t l = 1; l < hs.size(); ++l) {
                                         total = add(total, probe(hs[l], w[l]));
                                       }
                                       return total;
                                     }};
                   }});
  return cases;
}

HiddenStack random_stack(Rng& rng, std::size_t depth, std::size_t t, std::size_t width,
                         ParameterList& params, const std::string& name) {
  HiddenStack stack;
  for (std::size_t l = 0; l <= depth; ++l) {
    stack.push_back(param(rng, t, width));
    params.push_back({name + ".h" + std::to_string(l), stack.back()});
  }
  return stack;
}

std::vector<Case> higate_cases() {
  std::vector<Case> cases;
  for (const GateMode mode : {GateMode::kVector, GateMode::kScalar}) {
    cases.push_back({"higate", mode == GateMode::kVector ? "gate_vector" : "gate_scalar",
                     [mode](Rng& rng, const GradSuiteOptions&) {
                       ParamInit init(rng());
                       const std::size_t t = dim(rng, 1, 4), f = 4;
                       const GateUnit unit = GateUnit::create(f, mode, init);
                       ParameterList params;
                       unit.collect("gate", params);
                       scramble(params, rng);
                       Tensor fp = param(rng, t, f), hc = param(rng, t, f);
                       params.push_back({"f_p", fp});
                       params.push_back({"h_c", hc});
                       const std::size_t cols = mode == GateMode::kVector ? f : 1;
                       return Instance{params, probed(rng, t, cols, [=] { return gate(fp, hc, unit); })};
                     }});
  }
  cases.push_back({"higate", "fuse_step", [](Rng& rng, const GradSuiteOptions&) {
                     ParamInit init(rng());
                     const std::size_t t = dim(rng, 1, 4), f = 4;
                     const LayerNorm norm = LayerNorm::create(f, init);
                     ParameterList params;
                     norm.collect("norm", params);
                     scramble(params, rng);
                     Tensor fp = param(rng, t, f), hc = param(rng, t, f);
                     Tensor g = Tensor::parameter(randn(rng, t, f).array().abs().min(1.0));
                     params.push_back({"f_p", fp});
                     params.push_back({"h_c", hc});
                     params.push_back({"g", g});
                     return Instance{params, probed(rng, t, f, [=] { return fuse_step(fp, hc, g, norm); })};
                   }});
  cases.push_back({"higate", "direction", [](Rng& rng, const GradSuiteOptions&) {
                     ParamInit init(rng());
                     const std::size_t t_p = dim(rng, 1, 4), t_c = dim(rng, 1, 6);
                     const FusionSpec spec{{1, 2}, 8, GateMode::kVector};
                     const auto dir = HiGateDirection::create(spec, 3, init);
                     ParameterList params;
                     dir.collect("direction", params);
                     scramble(params, rng);
                     Tensor primary = param(rng, t_p, 8);
                     params.push_back({"primary", primary});
                     const HiddenStack ctx = random_stack(rng, 2, t_c, 3, params, "context");
                     return Instance{params, probed(rng, t_p, 8, [=] { return dir.forward(primary, ctx); })};
                   }});
  cases.push_back({"higate", "decoder", [](Rng& rng, const GradSuiteOptions&) {
                     ParamInit init(rng());
                     const std::size_t t_v = dim(rng, 1, 3), t_a = t_v * dim(rng, 1, 3);
                     const FusionSpec spec{{1, 3}, 8, GateMode::kVector};
                     auto dec = std::make_shared<HiGateDecoder>(spec, 3, 3, init);
                     ParameterList params;
                     dec->collect("decoder", params);
                     scramble(params, rng);
                     Tensor fa = param(rng, t_a, 8), fv = param(rng, t_v, 8);
                     params.push_back({"f_audio", fa});
                     params.push_back({"f_video", fv});
                     const HiddenStack as = random_stack(rng, 3, t_a, 3, params, "audio");
                     const HiddenStack vs = random_stack(rng, 3, t_v, 3, params, "video");
                     return Instance{params, probed(rng, t_v, 8, [=] {
                                       return dec->forward(fa, fv, as, vs).combined;
                                     })};
                   }});
  return cases;
}

std::vector<Case> heads_losses_cases() {
  std::vector<Case> cases;
  cases.push_back({"heads_losses", "av_classifier", [](Rng& rng, const GradSuiteOptions&) {
                     ParamInit init(rng());
                     const std::size_t t = dim(rng, 1, 4);
                     const auto head = AvClassifier::create(4, init);
                     ParameterList params;
                     head.collect("head", params);
                     scramble(params, rng);
                     Tensor x = param(rng, t, 4);
                     params.push_back({"x", x});
                     return Instance{params, probed(rng, t, 2, [=] { return head(x); })};
                   }});
  cases.push_back({"heads_losses", "uni_classifier", [](Rng& rng, const GradSuiteOptions&) {
                     ParamInit init(rng());
                     const std::size_t t = dim(rng, 1, 4);
                     const auto head = UniClassifier::create(4, init);
                     ParameterList params;
                     head.collect("head", params);
                     scramble(params, rng);
                     Tensor x = param(rng, t, 4);
                     params.push_back({"x", x});
                     return Instance{params, probed(rng, t, 2, [=] { return head(x); })};
                   }});
  cases.push_back({"heads_losses", "cls_loss", [](Rng& rng, const GradSuiteOptions&) {
                     const std::size_t t = dim(rng, 1, 6);
                     Tensor logits = param(rng, t, 2, 2.0);
                     const FrameLabels labels = random_labels(rng, t);
                     return Instance{{{"logits", logits}},
                                     [=] { return cls_loss(softmax_rows(logits), labels); }};
                   }});
  cases.push_back({"heads_losses", "mal_loss", [](Rng& rng, const GradSuiteOptions&) {
                     const std::size_t t = dim(rng, 1, 6);
                     Tensor la = param(rng, t, 2, 2.0), lv = param(rng, t, 2, 2.0);
                     const Tensor target = softmax_rows(Tensor::constant(randn(rng, t, 2, 2.0)));
                     const FrameLabels labels = random_labels(rng, t);
                     return Instance{{{"logits_a", la}, {"logits_v", lv}}, [=] {
                                       PredictionBundle b;
                                       b.p_av_live = target;
                                       b.p_av_detached = target;
                                       b.p_a = softmax_rows(la);
                                       b.p_v = softmax_rows(lv);
                                       return mal_loss(b, labels);
                                     }};
                   }});
  cases.push_back({"heads_losses", "opp_loss", [](Rng& rng, const GradSuiteOptions&) {
                     const std::size_t t = dim(rng, 1, 6);
                     Tensor lv = param(rng, t, 2, 2.0);
                     const FrameLabels labels = random_labels(rng, t);
                     return Instance{{{"logits_v", lv}},
                                     [=] { return opp_loss(softmax_rows(lv), labels); }};
                   }});
  cases.push_back({"heads_losses", "total_loss", [](Rng& rng, const GradSuiteOptions&) {
                     const std::size_t t = dim(rng, 1, 6);
                     Tensor lav = param(rng, t, 2, 2.0), la = param(rng, t, 2, 2.0),
                            lv = param(rng, t, 2, 2.0);
                     const FrameLabels labels = random_labels(rng, t);
                     // The MAL target is a stopped branch; hold it at its base value.
                     const Tensor frozen = softmax_rows(Tensor::constant(lav.value()));
                     const LossWeights w{0.5, 0.5};
                     return Instance{{{"logits_av", lav}, {"logits_a", la}, {"logits_v", lv}}, [=] {
                                       PredictionBundle b = PredictionBundle::from_logits(lav, la, lv);
                                       b.p_av_detached = frozen;
                                       return compute_losses(b, labels, w).total;
                                     }};
                   }});
  return cases;
}

template <typename Decoder>
Case decoder_case(const char* name, std::function<Decoder(ParamInit&)> make) {
  return {"baselines", name, [make](Rng& rng, const GradSuiteOptions&) {
            ParamInit init(rng());
            auto dec = std::make_shared<Decoder>(make(init));
            ParameterList params;
            dec->collect("decoder", params);
            scramble(params, rng);
            const std::size_t t_v = dim(rng, 1, 3), t_a = t_v * dim(rng, 1, 3);
            Tensor fa = param(rng, t_a, 4), fv = param(rng, t_v, 4);
            params.push_back({"f_audio", fa});
            params.push_back({"f_video", fv});
            return Instance{params, probed(rng, t_v, 4, [=] { return (*dec)(fa, fv); })};
          }};
}

std::vector<Case> baselines_cases() {
  return {
      decoder_case<SumDecoder>("sum", [](ParamInit& i) { return SumDecoder::create(4, i); }),
      decoder_case<ConcatDecoder>("concat",
                                  [](ParamInit& i) { return ConcatDecoder::create(4, i); }),
      decoder_case<CrossAttenDecoder>(
          "crossatten", [](ParamInit& i) { return CrossAttenDecoder::create(4, i, 2); }),
  };
}

std::vector<Case> end_to_end_cases() {
  std::vector<Case> cases;
  cases.push_back({"end_to_end", "total_loss", [](Rng& rng, const GradSuiteOptions&) {
                     ModelConfig cfg;
                     cfg.audio = EncoderConfig{2, 4, 2, 2, 3, 8};
                     cfg.video = EncoderConfig{2, 4, 2, 2, 3, 4};
                     cfg.fusion = FusionSpec{{1, 2}, 4, GateMode::kVector};
                     cfg.decoder = DecoderKind::kHiGate;
                     auto model = std::make_shared<GateFusionModel>(cfg, rng());
                     ParameterList params = model->parameters();
                     scramble(params, rng);
                     const std::size_t t_v = dim(rng, 2, 4), t_a = 2 * t_v;
                     const Matrix audio = randn(rng, t_a, 3), video = randn(rng, t_v, 3);
                     const FrameLabels labels = random_labels(rng, t_v);
                     const LossWeights w{0.5, 0.5};
                     // Hold the stopped MAL target at its base value, as backward does.
                     Matrix frozen;
                     {
                       NoGradGuard no_grad;
                       frozen = model->forward(audio, video).predictions.p_av_detached.value();
                     }
                     return Instance{params, [=] {
                                       PredictionBundle b = model->forward(audio, video).predictions;
                                       b.p_av_detached = Tensor::constant(frozen);
                                       return compute_losses(b, labels, w).total;
                                     }};
                   }});
  return cases;
}

std::vector<Case> all_cases() {
  std::vector<Case> cases;
  for (auto part : {numerics_cases(), encoder_cases(), higate_cases(), heads_losses_cases(),
                    baselines_cases(), end_to_end_cases()}) {
    for (auto& c : part) cases.push_back(std::move(c));
  }
  return cases;
}

void merge(GradCheckReport& into, const GradCheckReport& from) {
  for (const auto& p : from.params) {
    auto it = std::find_if(into.params.begin(), into.params.end(),
                           [&](const ParamCheck& q) { return q.name == p.name; });
    if (it == into.params.end()) {
      into.params.push_back(p);
      continue;
    }
    it->max_rel_error = std::max(it->max_rel_error, p.max_rel_error);
    it->max_abs_error = std::max(it->max_abs_error, p.max_abs_error);
    it->passed = it->passed && p.passed;
  }
}

}  // namespace

bool GradSuiteReport::passed() const { return failures() == 0; }

std::size_t GradSuiteReport::failures() const {
  return static_cast<std::size_t>(
      std::count_if(cases.begin(), cases.end(), [](const auto& c) { return !c.passed(); }));
}

std::vector<std::string> grad_suite_modules() {
  return {"numerics", "encoder", "higate", "heads_losses", "baselines", "end_to_end"};
}

GradSuiteReport run_grad_suite(const GradSuiteOptions& options) {
  GradSuiteReport report;
  std::uint64_t case_index = 0;
  for (const Case& c : all_cases()) {
    ++case_index;
    if (!options.modules.empty() &&
        std::find(options.modules.begin(), options.modules.end(), c.module) ==
            options.modules.end()) {
      continue;
    }
    GradCaseResult result{c.module, c.op, options.instances, {}};
    for (std::size_t i = 0; i < options.instances; ++i) {
      Rng rng(episode_seed(options.seed, case_index, i));
      const Instance inst = c.make(rng, options);
      merge(result.report, grad_check(inst.loss, inst.params, options.check));
    }
    report.cases.push_back(std::move(result));
  }
  return report;
}

}  // namespace gatefusion
