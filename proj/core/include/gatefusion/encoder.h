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

// Per-modality transformer encoder that keeps every hidden state.

#ifndef GATEFUSION_ENCODER_H_
#define GATEFUSION_ENCODER_H_

#include <cstddef>
#include <string>
#include <vector>

#include "gatefusion/errors.h"
#include "gatefusion/layers.h"
#include "gatefusion/tensor.h"

namespace gatefusion {

struct EncoderConfig {
  std::size_t layers = 6;
  std::size_t width = 32;
  std::size_t heads = 4;
  std::size_t ffn_mult = 2;
  std::size_t input_width = 8;
  std::size_t max_positions = 256;

  void validate() const;
};

/// Hidden states h^0 (stem output) through h^L, each T x width.
using HiddenStack = std::vector<Tensor>;

/// Pre-LN block: y = h + MHSA(LN(h)); out = y + FFN(LN(y)).
struct TransformerBlock {
  LayerNorm attn_norm;
  MultiHeadAttention attention;
  LayerNorm ffn_norm;
  Linear ffn_in;
  Linear ffn_out;

  static TransformerBlock create(const EncoderConfig& cfg, ParamInit& init);
  Tensor operator()(const Tensor& h,
                    std::vector<Tensor>* attention_weights = nullptr) const;
  void collect(const std::string& prefix, ParameterList& out) const;
};

class Encoder {
 public:
  Encoder() = default;
  Encoder(const EncoderConfig& cfg, ParamInit& init);

  /// Linear token embedding plus learned positions. Throws ConfigError if
  /// the sequence is longer than max_positions.
  Tensor embed_stem(const Tensor& raw) const;
  /// Returns h^0..h^L.
  HiddenStack encode(const Tensor& raw) const;

  const EncoderConfig& config() const { return cfg_; }
  Linear& stem() { return stem_; }
  Tensor& positions() { return positions_; }
  std::vector<TransformerBlock>& blocks() { return blocks_; }
  const std::vector<TransformerBlock>& blocks() const { return blocks_; }

  void collect(const std::string& prefix, ParameterList& out) const;

 private:
  EncoderConfig cfg_;
  Linear stem_;
  Tensor positions_;  // max_positions x width
  std::vector<TransformerBlock> blocks_;
};

}  // namespace gatefusion

#endif  // GATEFUSION_ENCODER_H_
