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

#include "gatefusion/encoder.h"

namespace gatefusion {

void EncoderConfig::validate() const {
  if (width == 0 || heads == 0 || width % heads != 0) {
    throw ConfigError("encoder width " + std::to_string(width) +
                      " must be a positive multiple of heads " +
                      std::to_string(heads));
  }
  if (ffn_mult == 0) throw ConfigError("encoder ffn_mult must be positive");
  if (input_width == 0) throw ConfigError("encoder input width must be positive");
  if (max_positions == 0) throw ConfigError("encoder max_positions must be positive");
}

TransformerBlock TransformerBlock::create(const EncoderConfig& cfg,
                                          ParamInit& init) {
  TransformerBlock b;
  b.attn_norm = LayerNorm::create(cfg.width, init);
  b.attention = MultiHeadAttention::create(cfg.width, cfg.heads, init);
  b.ffn_norm = LayerNorm::create(cfg.width, init);
  b.ffn_in = Linear::create(cfg.width, cfg.width * cfg.ffn_mult, init);
  b.ffn_out = Linear::create(cfg.width * cfg.ffn_mult, cfg.width, init);
  return b;
}

Tensor TransformerBlock::operator()(const Tensor& h,
                                    std::vector<Tensor>* attention_weights) const {
  const Tensor normed = attn_norm(h);
  const Tensor y = add(h, attention(normed, normed, attention_weights));
  return add(y, ffn_out(gelu(ffn_in(ffn_norm(y)))));
}

void TransformerBlock::collect(const std::string& prefix,
                               ParameterList& out) const {
  attn_norm.collect(prefix + ".attn_norm", out);
  attention.collect(prefix + ".attn", out);
  ffn_norm.collect(prefix + ".ffn_norm", out);
  ffn_in.collect(prefix + ".ffn_in", out);
  ffn_out.collect(prefix + ".ffn_out", out);
}

Encoder::Encoder(const EncoderConfig& cfg, ParamInit& init) : cfg_(cfg) {
  cfg_.validate();
  stem_ = Linear::create(cfg_.input_width, cfg_.width, init);
  positions_ = init.normal(cfg_.max_positions, cfg_.width);
  blocks_.reserve(cfg_.layers);
  for (std::size_t l = 0; l < cfg_.layers; ++l) {
    blocks_.push_back(TransformerBlock::create(cfg_, init));
  }
}

Tensor Encoder::embed_stem(const Tensor& raw) const {
  if (raw.cols() != cfg_.input_width) {
    throw DimensionError("embed_stem: expected " +
                         std::to_string(cfg_.input_width) +
                         " input features, got " + raw.shape().str());
  }
  if (raw.rows() > cfg_.max_positions) {
    throw ConfigError("embed_stem: sequence of " + std::to_string(raw.rows()) +
                      " frames exceeds max_positions " +
                      std::to_string(cfg_.max_positions));
  }
  return add(stem_(raw), slice_rows(positions_, 0, raw.rows()));
}

HiddenStack Encoder::encode(const Tensor& raw) const {
  HiddenStack stack;
  stack.reserve(cfg_.layers + 1);
  stack.push_back(embed_stem(raw));
  for (const auto& block : blocks_) stack.push_back(block(stack.back()));
  return stack;
}

void Encoder::collect(const std::string& prefix, ParameterList& out) const {
  stem_.collect(prefix + ".stem", out);
  out.push_back({prefix + ".positions", positions_});
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    blocks_[l].collect(prefix + ".block" + std::to_string(l + 1), out);
  }
}

}  // namespace gatefusion
