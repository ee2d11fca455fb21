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

#include "gatefusion/synthdata.h"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>

#include "gatefusion/errors.h"

namespace gatefusion {
namespace {

constexpr std::uint64_t kAudioPatternSeed = 0xA0D10A0D10ULL;
constexpr std::uint64_t kVideoPatternSeed = 0x5EE5EE5EEULL;
constexpr std::array<char, 4> kMagic = {'G', 'F', 'E', 'P'};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Eigen::VectorXd unit_direction(std::size_t width, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd d(static_cast<Eigen::Index>(width));
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = normal(engine);
  return d / d.norm();
}

void add_noise(Matrix& m, double sigma, std::mt19937_64& engine) {
  if (sigma == 0.0) return;
  std::normal_distribution<double> normal(0.0, sigma);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] += normal(engine);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> bytes = {
      static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
      static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  out.write(bytes.data(), bytes.size());
}

void put_f64(std::ostream& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  std::array<char, 8> bytes;
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

std::uint32_t get_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  in.read(reinterpret_cast<char*>(b.data()), b.size());
  if (!in) throw IoError("GFEP: truncated header");
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

void read_f64_block(std::istream& in, Matrix& m) {
  std::vector<unsigned char> buf(static_cast<std::size_t>(m.size()) * 8);
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size()));
  if (!in) throw IoError("GFEP: truncated feature block");
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) {
      v |= static_cast<std::uint64_t>(buf[static_cast<std::size_t>(i) * 8 + k])
           << (8 * k);
    }
    m.data()[i] = std::bit_cast<double>(v);
  }
}

}  // namespace

void EpisodeConfig::validate() const {
  if (video_frames == 0) throw ConfigError("data.video_frames must be positive");
  if (rate == 0) throw ConfigError("data.rate must be a positive integer");
  if (audio_width == 0 || video_width == 0) {
    throw ConfigError("data feature widths must be positive");
  }
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ConfigError(std::string("data.") + name + " must lie in [0, 1]");
    }
  };
  prob(p_speech, "p_speech");
  prob(p_distractor_video, "p_distractor_video");
  prob(p_distractor_audio, "p_distractor_audio");
  if (p_distractor_video + p_distractor_audio > 1.0) {
    throw ConfigError(
        "data.p_distractor_video + data.p_distractor_audio must not exceed 1");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw ConfigError("data.noise_sigma must be finite and non-negative");
  }
}

Eigen::VectorXd audio_pattern(std::size_t width) {
  return unit_direction(width, kAudioPatternSeed);
}

Eigen::VectorXd video_pattern(std::size_t width) {
  return unit_direction(width, kVideoPatternSeed);
}

std::uint64_t episode_seed(std::uint64_t run_seed, std::uint64_t split_offset,
                           std::uint64_t index) {
  return splitmix64(splitmix64(run_seed) + split_offset + index);
}

Episode generate_episode(const EpisodeConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  const std::size_t t_v = cfg.video_frames;
  const std::size_t t_a = cfg.audio_frames();
  const std::size_t segments = (t_v + kSegmentFrames - 1) / kSegmentFrames;
  const Eigen::RowVectorXd a_dir = audio_pattern(cfg.audio_width).transpose();
  const Eigen::RowVectorXd v_dir = video_pattern(cfg.video_width).transpose();

  Episode ep;
  ep.audio = Matrix::Zero(static_cast<Eigen::Index>(t_a),
                          static_cast<Eigen::Index>(cfg.audio_width));
  ep.video = Matrix::Zero(static_cast<Eigen::Index>(t_v),
                          static_cast<Eigen::Index>(cfg.video_width));
  ep.labels.y.assign(t_v, 0);
  ep.plant_log.resize(segments);

  for (std::size_t s = 0; s < segments; ++s) {
    PlantRecord& rec = ep.plant_log[s];
    if (uniform(engine) < cfg.p_speech) {
      rec = {true, true};
    } else {
      const double w = uniform(engine);
      if (w < cfg.p_distractor_video) {
        rec.video = true;
      } else if (w < cfg.p_distractor_video + cfg.p_distractor_audio) {
        rec.audio = true;
      }
    }
    const std::size_t v_begin = s * kSegmentFrames;
    const std::size_t v_end = std::min(t_v, v_begin + kSegmentFrames);
    for (std::size_t t = v_begin; t < v_end; ++t) {
      if (rec.video) ep.video.row(static_cast<Eigen::Index>(t)) += v_dir;
      ep.labels.y[t] = (rec.video && rec.audio) ? 1 : 0;
    }
    if (rec.audio) {
      for (std::size_t t = v_begin * cfg.rate; t < v_end * cfg.rate; ++t) {
        ep.audio.row(static_cast<Eigen::Index>(t)) += a_dir;
      }
    }
  }
  add_noise(ep.audio, cfg.noise_sigma, engine);
  add_noise(ep.video, cfg.noise_sigma, engine);
  return ep;
}

Matrix corrupt(const Matrix& x, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw ConfigError("corrupt: sigma must be non-negative");
  Matrix out = x;
  std::mt19937_64 engine(seed);
  add_noise(out, sigma, engine);
  return out;
}

void write_episode(std::ostream& out, const Episode& episode) {
  const auto t_v = static_cast<std::uint32_t>(episode.video.rows());
  const auto t_a = static_cast<std::uint32_t>(episode.audio.rows());
  if (t_v == 0 || t_a % t_v != 0 || episode.labels.size() != t_v) {
    throw IoError("GFEP: episode shapes are inconsistent");
  }
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, kEpisodeFormatVersion);
  put_u32(out, t_v);
  put_u32(out, t_a / t_v);
  put_u32(out, static_cast<std::uint32_t>(episode.audio.cols()));
  put_u32(out, static_cast<std::uint32_t>(episode.video.cols()));
  for (Eigen::Index i = 0; i < episode.audio.size(); ++i) {
    put_f64(out, episode.audio.data()[i]);
  }
  for (Eigen::Index i = 0; i < episode.video.size(); ++i) {
    put_f64(out, episode.video.data()[i]);
  }
  out.write(reinterpret_cast<const char*>(episode.labels.y.data()),
            static_cast<std::streamsize>(episode.labels.y.size()));
  if (!out) throw IoError("GFEP: write failed");
}

bool read_episode(std::istream& in, Episode& episode) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() == 0 && in.eof()) return false;
  if (!in || magic != kMagic) throw IoError("GFEP: bad magic");
  const std::uint32_t version = get_u32(in);
  if (version != kEpisodeFormatVersion) {
    throw IoError("GFEP: unsupported version " + std::to_string(version));
  }
  const std::uint32_t t_v = get_u32(in);
  const std::uint32_t rate = get_u32(in);
  const std::uint32_t d_a = get_u32(in);
  const std::uint32_t d_v = get_u32(in);
  episode.audio.resize(static_cast<Eigen::Index>(t_v) * rate, d_a);
  episode.video.resize(t_v, d_v);
  read_f64_block(in, episode.audio);
  read_f64_block(in, episode.video);
  episode.labels.y.resize(t_v);
  in.read(reinterpret_cast<char*>(episode.labels.y.data()), t_v);
  if (!in) throw IoError("GFEP: truncated labels");
  episode.plant_log.clear();
  return true;
}

void write_episodes(const std::filesystem::path& path,
                    const std::vector<Episode>& episodes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  for (const auto& ep : episodes) write_episode(out, ep);
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

std::vector<Episode> read_episodes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open episode file '" + path.string() + "'");
  std::vector<Episode> episodes;
  Episode ep;
  while (read_episode(in, ep)) episodes.push_back(ep);
  return episodes;
}

LabelBalance label_balance(const std::vector<Episode>& episodes) {
  LabelBalance b;
  for (const auto& ep : episodes) {
    b.frames += ep.labels.size();
    for (const auto y : ep.labels.y) b.positives += y != 0 ? 1 : 0;
  }
  return b;
}

}  // namespace gatefusion
