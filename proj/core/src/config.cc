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

#include "gatefusion/config.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gatefusion/errors.h"

namespace gatefusion {
namespace {

using nlohmann::json;

json encode(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["decoder"] = std::string(to_string(c.decoder));
  j["encoder"] = {{"layers", c.encoder.layers},
                  {"width", c.encoder.width},
                  {"heads", c.encoder.heads},
                  {"ffn_mult", c.encoder.ffn_mult}};
  j["fusion"] = {{"layers", c.fusion.layers},
                 {"width", c.fusion.width},
                 {"gate", std::string(to_string(c.fusion.gate_mode))}};
  j["loss"] = {{"lambda_mal", c.loss.mal}, {"lambda_opp", c.loss.opp}};
  j["data"] = {{"video_frames", c.data.video_frames},
               {"rate", c.data.rate},
               {"audio_width", c.data.audio_width},
               {"video_width", c.data.video_width},
               {"p_speech", c.data.p_speech},
               {"p_distractor_video", c.data.p_distractor_video},
               {"p_distractor_audio", c.data.p_distractor_audio},
               {"noise_sigma", c.data.noise_sigma},
               {"train_seed_offset", c.splits.train_seed_offset},
               {"val_seed_offset", c.splits.val_seed_offset},
               {"test_seed_offset", c.splits.test_seed_offset},
               {"val_episodes", c.splits.val_episodes},
               {"test_episodes", c.splits.test_episodes}};
  j["train"] = {{"steps", c.train.steps},
                {"batch_frames", c.train.batch_frames},
                {"lr_encoder", c.train.lr_encoder},
                {"lr_decoder", c.train.lr_decoder},
                {"decay", c.train.decay},
                {"decay_interval", c.train.decay_interval},
                {"weight_decay", c.train.weight_decay},
                {"beta1", c.train.beta1},
                {"beta2", c.train.beta2},
                {"eps", c.train.eps},
                {"eval_interval", c.train.eval_interval}};
  json decoders = json::array();
  for (const auto k : c.ablation.decoders) decoders.push_back(std::string(to_string(k)));
  j["ablation"] = {{"seeds", c.ablation.seeds},
                   {"decoders", decoders},
                   {"noise_sigma", c.ablation.noise_sigma}};
  return j;
}

std::uint64_t as_count(const json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  throw ConfigError(key + " must be a non-negative integer, got " + v.dump());
}

double as_real(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError(key + " must be a number, got " + v.dump());
  return v.get<double>();
}

std::string as_text(const json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError(key + " must be a string, got " + v.dump());
  return v.get<std::string>();
}

RunConfig decode(const json& j) {
  RunConfig c;
  c.seed = as_count(j["seed"], "seed");
  c.output_dir = as_text(j["output_dir"], "output_dir");
  c.decoder = parse_decoder_kind(as_text(j["decoder"], "decoder"));

  const json& e = j["encoder"];
  c.encoder.layers = as_count(e["layers"], "encoder.layers");
  c.encoder.width = as_count(e["width"], "encoder.width");
  c.encoder.heads = as_count(e["heads"], "encoder.heads");
  c.encoder.ffn_mult = as_count(e["ffn_mult"], "encoder.ffn_mult");

  const json& f = j["fusion"];
  if (!f["layers"].is_array()) throw ConfigError("fusion.layers must be an array");
  c.fusion.layers.clear();
  for (const auto& v : f["layers"]) {
    c.fusion.layers.push_back(as_count(v, "fusion.layers[]"));
  }
  c.fusion.width = as_count(f["width"], "fusion.width");
  c.fusion.gate_mode = parse_gate_mode(as_text(f["gate"], "fusion.gate"));

  c.loss.mal = as_real(j["loss"]["lambda_mal"], "loss.lambda_mal");
  c.loss.opp = as_real(j["loss"]["lambda_opp"], "loss.lambda_opp");

  const json& d = j["data"];
  c.data.video_frames = as_count(d["video_frames"], "data.video_frames");
  c.data.rate = as_count(d["rate"], "data.rate");
  c.data.audio_width = as_count(d["audio_width"], "data.audio_width");
  c.data.video_width = as_count(d["video_width"], "data.video_width");
  c.data.p_speech = as_real(d["p_speech"], "data.p_speech");
  c.data.p_distractor_video = as_real(d["p_distractor_video"], "data.p_distractor_video");
  c.data.p_distractor_audio = as_real(d["p_distractor_audio"], "data.p_distractor_audio");
  c.data.noise_sigma = as_real(d["noise_sigma"], "data.noise_sigma");
  c.splits.train_seed_offset = as_count(d["train_seed_offset"], "data.train_seed_offset");
  c.splits.val_seed_offset = as_count(d["val_seed_offset"], "data.val_seed_offset");
  c.splits.test_seed_offset = as_count(d["test_seed_offset"], "data.test_seed_offset");
  c.splits.val_episodes = as_count(d["val_episodes"], "data.val_episodes");
  c.splits.test_episodes = as_count(d["test_episodes"], "data.test_episodes");

  const json& t = j["train"];
  c.train.steps = as_count(t["steps"], "train.steps");
  c.train.batch_frames = as_count(t["batch_frames"], "train.batch_frames");
  c.train.lr_encoder = as_real(t["lr_encoder"], "train.lr_encoder");
  c.train.lr_decoder = as_real(t["lr_decoder"], "train.lr_decoder");
  c.train.decay = as_real(t["decay"], "train.decay");
  c.train.decay_interval = as_count(t["decay_interval"], "train.decay_interval");
  c.train.weight_decay = as_real(t["weight_decay"], "train.weight_decay");
  c.train.beta1 = as_real(t["beta1"], "train.beta1");
  c.train.beta2 = as_real(t["beta2"], "train.beta2");
  c.train.eps = as_real(t["eps"], "train.eps");
  c.train.eval_interval = as_count(t["eval_interval"], "train.eval_interval");

  const json& a = j["ablation"];
  if (!a["seeds"].is_array()) throw ConfigError("ablation.seeds must be an array");
  c.ablation.seeds.clear();
  for (const auto& v : a["seeds"]) c.ablation.seeds.push_back(as_count(v, "ablation.seeds[]"));
  if (!a["decoders"].is_array()) throw ConfigError("ablation.decoders must be an array");
  c.ablation.decoders.clear();
  for (const auto& v : a["decoders"]) {
    c.ablation.decoders.push_back(parse_decoder_kind(as_text(v, "ablation.decoders[]")));
  }
  c.ablation.noise_sigma = as_real(a["noise_sigma"], "ablation.noise_sigma");
  return c;
}

// Copies `patch` into `base`, rejecting keys that `base` does not define.
void strict_merge(json& base, const json& patch, const std::string& path) {
  if (!patch.is_object()) {
    throw ConfigError((path.empty() ? std::string("config") : path) +
                      " must be a JSON object");
  }
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError("unknown config key '" + key + "'");
    json& target = base[it.key()];
    if (target.is_object()) {
      strict_merge(target, it.value(), key);
    } else {
      target = it.value();
    }
  }
}

void apply_override(json& j, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override '" + std::string(assignment) +
                      "' is not of the form key.path=value");
  }
  const std::string path(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  json* node = &j;
  std::stringstream parts(path);
  std::string part;
  while (std::getline(parts, part, '.')) {
    if (!node->is_object() || !node->contains(part)) {
      throw ConfigError("unknown config key '" + path + "' in override");
    }
    node = &(*node)[part];
  }
  if (node->is_object()) {
    throw ConfigError("override '" + path + "' names a section, not a value");
  }
  json value = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = text;
  *node = std::move(value);
}

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const unsigned char ch : data) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunConfig resolve(const json& patch, const std::vector<std::string>& overrides,
                  bool use_env) {
  json j = encode(RunConfig{});
  strict_merge(j, patch, "");
  for (const auto& o : overrides) apply_override(j, o);
  if (use_env) {
    if (const char* env = std::getenv("GATEFUSION_SEED"); env != nullptr && *env != '\0') {
      char* end = nullptr;
      const unsigned long long s = std::strtoull(env, &end, 10);
      if (end == env || *end != '\0') {
        throw ConfigError("GATEFUSION_SEED must be an unsigned integer, got '" +
                          std::string(env) + "'");
      }
      j["seed"] = static_cast<std::uint64_t>(s);
    }
  }
  RunConfig cfg = decode(j);
  cfg.validate();
  return cfg;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(lr_encoder >= 0.0) || !(lr_decoder > 0.0)) {
    throw ConfigError("train.lr_decoder must be positive and train.lr_encoder "
                      "non-negative (0 freezes the encoders)");
  }
  if (!(decay > 0.0 && decay <= 1.0)) throw ConfigError("train.decay must lie in (0, 1]");
  if (decay_interval == 0) throw ConfigError("train.decay_interval must be positive");
  if (batch_frames == 0) throw ConfigError("train.batch_frames must be positive");
  if (eval_interval == 0) throw ConfigError("train.eval_interval must be positive");
  if (!(weight_decay >= 0.0)) throw ConfigError("train.weight_decay must be non-negative");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("train.beta1 and train.beta2 must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw ConfigError("train.eps must be positive");
}

void RunConfig::validate() const {
  data.validate();
  loss.validate();
  train.validate();
  if (encoder.width == 0 || encoder.heads == 0 || encoder.width % encoder.heads != 0) {
    throw ConfigError("encoder.width (" + std::to_string(encoder.width) +
                      ") must be a positive multiple of encoder.heads (" +
                      std::to_string(encoder.heads) + ")");
  }
  for (const auto l : fusion.layers) {
    if (l > encoder.layers) {
      throw ConfigError("fusion.layers contains " + std::to_string(l) +
                        " but the encoders only have " +
                        std::to_string(encoder.layers) +
                        " layers; use indices in [1, encoder.layers] or raise "
                        "encoder.layers");
    }
  }
  model_config().validate();
  if (decoder == DecoderKind::kCrossAtten && fusion.width % kCrossAttenHeads != 0) {
    throw ConfigError("fusion.width must be a multiple of " +
                      std::to_string(kCrossAttenHeads) +
                      " for the crossatten decoder");
  }
  if (splits.val_episodes == 0 || splits.test_episodes == 0) {
    throw ConfigError("data.val_episodes and data.test_episodes must be positive");
  }
  const std::uint64_t train_span =
      static_cast<std::uint64_t>(train.steps) * episodes_per_batch();
  if (splits.train_seed_offset + train_span > splits.val_seed_offset ||
      splits.val_seed_offset + splits.val_episodes > splits.test_seed_offset) {
    throw ConfigError("data seed ranges overlap: need train_seed_offset + "
                      "steps * episodes_per_batch <= val_seed_offset and "
                      "val_seed_offset + val_episodes <= test_seed_offset");
  }
  if (ablation.seeds.empty()) throw ConfigError("ablation.seeds must not be empty");
  if (ablation.decoders.empty()) throw ConfigError("ablation.decoders must not be empty");
  if (!(ablation.noise_sigma >= 0.0)) {
    throw ConfigError("ablation.noise_sigma must be non-negative");
  }
}

ModelConfig RunConfig::model_config() const {
  ModelConfig m;
  m.audio = EncoderConfig{encoder.layers,    encoder.width,
                          encoder.heads,     encoder.ffn_mult,
                          data.audio_width,  data.audio_frames()};
  m.video = EncoderConfig{encoder.layers,    encoder.width,
                          encoder.heads,     encoder.ffn_mult,
                          data.video_width,  data.video_frames};
  m.fusion = fusion;
  m.decoder = decoder;
  return m;
}

std::size_t RunConfig::episodes_per_batch() const {
  const std::size_t n = train.batch_frames / data.video_frames;
  return n == 0 ? 1 : n;
}

RunConfig parse_run_config(std::string_view json_text,
                           const std::vector<std::string>& overrides,
                           bool use_env) {
  const json patch = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (patch.is_discarded()) throw ConfigError("config is not valid JSON");
  return resolve(patch, overrides, use_env);
}

RunConfig load_run_config(const std::filesystem::path& path,
                          const std::vector<std::string>& overrides,
                          bool use_env) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const json patch = json::parse(buf.str(), nullptr, /*allow_exceptions=*/false);
  if (patch.is_discarded()) {
    throw ConfigError("config file '" + path.string() + "' is not valid JSON");
  }
  return resolve(patch, overrides, use_env);
}

RunConfig with_override(const RunConfig& cfg, std::string_view assignment) {
  json j = encode(cfg);
  apply_override(j, assignment);
  RunConfig out = decode(j);
  out.validate();
  return out;
}

std::string to_json(const RunConfig& cfg, int indent) {
  return encode(cfg).dump(indent);
}

std::string config_hash(const RunConfig& cfg) {
  json j = encode(cfg);
  j.erase("output_dir");
  return fnv1a_hex(j.dump());
}

}  // namespace gatefusion
