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


#include <random>

#include <benchmark/benchmark.h>

#include "gatefusion/config.h"
#include "gatefusion/losses.h"
#include "gatefusion/model.h"
#include "gatefusion/ops.h"
#include "gatefusion/trainer.h"

namespace gatefusion {
namespace {

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

void BM_Affine(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto t = state.range(0);
  const Tensor x = Tensor::parameter(gaussian(t, 32, rng));
  const Tensor w = Tensor::parameter(gaussian(32, 32, rng));
  const Tensor b = Tensor::parameter(gaussian(1, 32, rng));
  for (auto _ : state) {
    Tensor y = sum(affine(x, w, b));
    y.backward();
    benchmark::DoNotOptimize(w.grad().data());
  }
}
BENCHMARK(BM_Affine)->Arg(64)->Arg(256);

void BM_MatmulAdd(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto t = state.range(0);
  const Tensor x = Tensor::parameter(gaussian(t, 32, rng));
  const Tensor w = Tensor::parameter(gaussian(32, 32, rng));
  const Tensor b = Tensor::parameter(gaussian(t, 32, rng));
  for (auto _ : state) {
    Tensor y = sum(add(matmul(x, w), b));
    y.backward();
    benchmark::DoNotOptimize(w.grad().data());
  }
}
BENCHMARK(BM_MatmulAdd)->Arg(64)->Arg(256);

void BM_Attention(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto t = state.range(0);
  const Tensor q = Tensor::parameter(gaussian(t, 32, rng));
  const Tensor k = Tensor::parameter(gaussian(t, 32, rng));
  const Tensor v = Tensor::parameter(gaussian(t, 32, rng));
  for (auto _ : state) {
    Tensor y = sum(scaled_dot_attention(q, k, v, 4));
    y.backward();
    benchmark::DoNotOptimize(q.grad().data());
  }
}
BENCHMARK(BM_Attention)->Arg(64)->Arg(256);

void BM_ModelForwardBackward(benchmark::State& state) {
  RunConfig cfg;
  cfg.decoder = static_cast<DecoderKind>(state.range(0));
  const GateFusionModel model(cfg.model_config(), 1);
  const Episode ep = make_episodes(cfg, 0, 0, 1).front();
  const ParameterList params = model.parameters();
  for (auto _ : state) {
    const ModelOutput out = model.forward(ep.audio, ep.video);
    const Tensor loss = total_loss(cls_loss(out.predictions.p_av_live, ep.labels),
                                   mal_loss(out.predictions, ep.labels),
                                   opp_loss(out.predictions.p_v, ep.labels), cfg.loss);
    loss.backward();
    for (auto p : params) p.tensor.zero_grad();
  }
  state.SetLabel(std::string(to_string(cfg.decoder)));
}
BENCHMARK(BM_ModelForwardBackward)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

void BM_TrainSteps(benchmark::State& state) {
  RunConfig cfg;
  cfg.train.steps = 10;
  cfg.train.eval_interval = 1000;
  for (auto _ : state) {
    benchmark::DoNotOptimize(train(cfg, {false}).final_val.ap_av);
  }
}
BENCHMARK(BM_TrainSteps)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace gatefusion

BENCHMARK_MAIN();
