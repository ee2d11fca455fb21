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

// Synthetic paired audio/video episodes.
//
// An episode is cut into segments of kSegmentFrames video frames. Each
// segment is either speaking (both modality patterns planted, label 1),
// a video-only distractor, an audio-only distractor, or empty. A pattern is
// a fixed unit direction added to every frame of the segment, so neither
// modality alone determines the label.

#ifndef GATEFUSION_SYNTHDATA_H_
#define GATEFUSION_SYNTHDATA_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "gatefusion/losses.h"
#include "gatefusion/tensor.h"

namespace gatefusion {

inline constexpr std::size_t kSegmentFrames = 8;

struct EpisodeConfig {
  std::size_t video_frames = 64;  // T_v
  std::size_t rate = 4;           // audio frames per video frame
  std::size_t audio_width = 8;
  std::size_t video_width = 8;
  double p_speech = 0.4;
  double p_distractor_video = 0.3;
  double p_distractor_audio = 0.3;
  double noise_sigma = 0.5;

  std::size_t audio_frames() const { return rate * video_frames; }
  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

struct PlantRecord {
  bool video = false;
  bool audio = false;
};

struct Episode {
  Matrix audio;  // T_a x D_a
  Matrix video;  // T_v x D_v
  FrameLabels labels;
  std::vector<PlantRecord> plant_log;  // one per segment
};

/// Fully determined by (cfg, seed).
Episode generate_episode(const EpisodeConfig& cfg, std::uint64_t seed);

/// Unit pattern directions. Fixed across seeds so the task is learnable.
Eigen::VectorXd audio_pattern(std::size_t width);
Eigen::VectorXd video_pattern(std::size_t width);

/// x + N(0, sigma^2) i.i.d.; sigma == 0 returns x unchanged.
Matrix corrupt(const Matrix& x, double sigma, std::uint64_t seed);

/// Mixes a run seed, a split offset and an index into one episode seed.
std::uint64_t episode_seed(std::uint64_t run_seed, std::uint64_t split_offset,
                           std::uint64_t index);

// GFEP episode files: each record is a little-endian header
// {"GFEP", version u32, T_v u32, rate u32, D_a u32, D_v u32} followed by the
// audio then video rows as f64 and T_v label bytes. A file holds one or more
// records back to back.
inline constexpr std::uint32_t kEpisodeFormatVersion = 1;

void write_episode(std::ostream& out, const Episode& episode);
/// Returns false at clean end of stream; throws IoError on a malformed record.
bool read_episode(std::istream& in, Episode& episode);
void write_episodes(const std::filesystem::path& path,
                    const std::vector<Episode>& episodes);
std::vector<Episode> read_episodes(const std::filesystem::path& path);

struct LabelBalance {
  std::size_t frames = 0;
  std::size_t positives = 0;
  double positive_rate() const {
    return frames == 0 ? 0.0
                       : static_cast<double>(positives) /
                             static_cast<double>(frames);
  }
};

LabelBalance label_balance(const std::vector<Episode>& episodes);

}  // namespace gatefusion

#endif  // GATEFUSION_SYNTHDATA_H_
