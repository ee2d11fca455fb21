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


#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "gatefusion/synthdata.h"
#include "oracles.h"

namespace gatefusion {
namespace {

using testing::bitwise_equal;

TEST(GenerateEpisode, SameSeedSameBits) {
  const EpisodeConfig cfg;
  const Episode a = generate_episode(cfg, 42);
  const Episode b = generate_episode(cfg, 42);
  EXPECT_TRUE(bitwise_equal(a.audio, b.audio));
  EXPECT_TRUE(bitwise_equal(a.video, b.video));
  EXPECT_EQ(a.labels.y, b.labels.y);
  const Episode c = generate_episode(cfg, 43);
  EXPECT_FALSE(bitwise_equal(a.video, c.video));
}

TEST(GenerateEpisode, Shapes) {
  EpisodeConfig cfg;
  cfg.video_frames = 20;
  cfg.rate = 3;
  cfg.audio_width = 5;
  cfg.video_width = 7;
  const Episode e = generate_episode(cfg, 1);
  EXPECT_EQ(e.audio.rows(), 60);
  EXPECT_EQ(e.audio.cols(), 5);
  EXPECT_EQ(e.video.rows(), 20);
  EXPECT_EQ(e.video.cols(), 7);
  EXPECT_EQ(e.labels.size(), 20u);
  EXPECT_EQ(e.plant_log.size(), 3u);  // 8 + 8 + 4 frames
}

TEST(GenerateEpisode, CertainSpeechLabelsEverything) {
  EpisodeConfig cfg;
  cfg.p_speech = 1.0;
  cfg.p_distractor_audio = 0.0;
  cfg.p_distractor_video = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Episode e = generate_episode(cfg, seed);
    for (auto y : e.labels.y) EXPECT_EQ(y, 1);
  }
}

TEST(GenerateEpisode, NoiselessPlantsAreUnitPatterns) {
  EpisodeConfig cfg;
  cfg.noise_sigma = 0.0;
  const Episode e = generate_episode(cfg, 5);
  const Eigen::RowVectorXd a_dir = audio_pattern(cfg.audio_width).transpose();
  const Eigen::RowVectorXd v_dir = video_pattern(cfg.video_width).transpose();
  EXPECT_NEAR(a_dir.norm(), 1.0, 1e-15);
  EXPECT_NEAR(v_dir.norm(), 1.0, 1e-15);
  for (std::size_t s = 0; s < e.plant_log.size(); ++s) {
    for (std::size_t t = s * kSegmentFrames; t < (s + 1) * kSegmentFrames; ++t) {
      const Eigen::RowVectorXd want_v = e.plant_log[s].video ? v_dir : Eigen::RowVectorXd::Zero(v_dir.size());
      EXPECT_EQ(e.video.row(t), want_v);
      for (std::size_t k = 0; k < cfg.rate; ++k) {
        const Eigen::RowVectorXd want_a = e.plant_log[s].audio ? a_dir : Eigen::RowVectorXd::Zero(a_dir.size());
        EXPECT_EQ(e.audio.row(t * cfg.rate + k), want_a);
      }
    }
  }
}

TEST(GenerateEpisode, LabelsFollowPlantLog) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    EpisodeConfig cfg;
    cfg.video_frames = 1 + rng() % 40;
    cfg.rate = 1 + rng() % 4;
    cfg.audio_width = 1 + rng() % 4;
    cfg.video_width = 1 + rng() % 4;
    cfg.p_speech = u(rng);
    cfg.p_distractor_video = u(rng);
    cfg.p_distractor_audio = u(rng) * (1.0 - cfg.p_distractor_video);
    cfg.noise_sigma = u(rng);
    const Episode e = generate_episode(cfg, rng());
    ASSERT_EQ(e.plant_log.size(), (cfg.video_frames + kSegmentFrames - 1) / kSegmentFrames);
    for (std::size_t t = 0; t < cfg.video_frames; ++t) {
      const PlantRecord& rec = e.plant_log[t / kSegmentFrames];
      ASSERT_EQ(e.labels.y[t], (rec.audio && rec.video) ? 1 : 0);
    }
  }
}

TEST(GenerateEpisode, PositiveRateTracksPrior) {
  const EpisodeConfig cfg;
  std::size_t segments = 0;
  std::size_t positives = 0;
  std::size_t video_planted = 0;
  std::size_t video_planted_positive = 0;
  for (std::uint64_t seed = 0; segments < 10000; ++seed) {
    const Episode e = generate_episode(cfg, episode_seed(3, 0, seed));
    for (const auto& rec : e.plant_log) {
      ++segments;
      positives += rec.audio && rec.video;
      video_planted += rec.video;
      video_planted_positive += rec.audio && rec.video;
    }
  }
  EXPECT_NEAR(static_cast<double>(positives) / segments, cfg.p_speech, 0.02);
  // Video evidence alone cannot separate distractors from speech.
  const double video_precision = static_cast<double>(video_planted_positive) / video_planted;
  EXPECT_LT(video_precision, 0.8);
}

TEST(EpisodeConfig, Validation) {
  EpisodeConfig cfg;
  cfg.rate = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = EpisodeConfig{};
  cfg.p_speech = 1.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = EpisodeConfig{};
  cfg.noise_sigma = -1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = EpisodeConfig{};
  cfg.p_distractor_audio = 0.8;
  cfg.p_distractor_video = 0.8;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Corrupt, ZeroSigmaIsIdentity) {
  const Episode e = generate_episode(EpisodeConfig{}, 1);
  EXPECT_TRUE(bitwise_equal(corrupt(e.audio, 0.0, 9), e.audio));
  EXPECT_THROW(corrupt(e.audio, -0.1, 9), ConfigError);
}

TEST(Corrupt, NoiseMoments) {
  const double sigma = 0.7;
  const Matrix x = Matrix::Constant(1000, 100, 2.5);
  const Matrix d = corrupt(x, sigma, 11) - x;
  const double n = static_cast<double>(d.size());
  const double mean = d.mean();
  EXPECT_LE(std::abs(mean), 3.0 * sigma / std::sqrt(n));
  const double var = (d.array() - mean).square().sum() / (n - 1.0);
  EXPECT_NEAR(var, sigma * sigma, 0.05 * sigma * sigma);
  EXPECT_TRUE(bitwise_equal(corrupt(x, sigma, 11), corrupt(x, sigma, 11)));
}

std::string serialize(const std::vector<Episode>& eps) {
  std::ostringstream out(std::ios::binary);
  for (const auto& e : eps) write_episode(out, e);
  return out.str();
}

TEST(Gfep, RoundTripIsBitwise) {
  EpisodeConfig cfg;
  cfg.video_frames = 12;
  cfg.rate = 2;
  cfg.audio_width = 3;
  std::vector<Episode> eps;
  for (int i = 0; i < 3; ++i) eps.push_back(generate_episode(cfg, 100 + i));
  const auto path = std::filesystem::temp_directory_path() / "gatefusion_gfep_roundtrip.gfep";
  write_episodes(path, eps);
  const std::vector<Episode> back = read_episodes(path);
  std::filesystem::remove(path);
  ASSERT_EQ(back.size(), eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) {
    EXPECT_TRUE(bitwise_equal(back[i].audio, eps[i].audio));
    EXPECT_TRUE(bitwise_equal(back[i].video, eps[i].video));
    EXPECT_EQ(back[i].labels.y, eps[i].labels.y);
  }
}

TEST(Gfep, HeaderLayout) {
  EpisodeConfig cfg;
  cfg.video_frames = 10;
  cfg.rate = 3;
  cfg.audio_width = 2;
  cfg.video_width = 5;
  const Episode e = generate_episode(cfg, 1);
  const std::string bytes = serialize({e});
  ASSERT_GE(bytes.size(), 24u);
  EXPECT_EQ(bytes.substr(0, 4), "GFEP");
  auto u32 = [&](std::size_t off) {
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= std::uint32_t(static_cast<unsigned char>(bytes[off + k])) << (8 * k);
    return v;
  };
  EXPECT_EQ(u32(4), kEpisodeFormatVersion);
  EXPECT_EQ(u32(8), 10u);
  EXPECT_EQ(u32(12), 3u);
  EXPECT_EQ(u32(16), 2u);
  EXPECT_EQ(u32(20), 5u);
  EXPECT_EQ(bytes.size(), 24u + 8u * (30 * 2 + 10 * 5) + 10u);
  double first = 0.0;
  std::memcpy(&first, bytes.data() + 24, 8);  // host is little-endian
  EXPECT_EQ(first, e.audio(0, 0));
  EXPECT_EQ(static_cast<std::uint8_t>(bytes.back()), e.labels.y.back());
}

TEST(Gfep, RejectsBadInput) {
  std::string bytes = serialize({generate_episode(EpisodeConfig{}, 1)});
  std::string bad = bytes;
  bad[0] = 'X';
  Episode e;
  std::istringstream in_bad(bad, std::ios::binary);
  EXPECT_THROW(read_episode(in_bad, e), IoError);
  std::istringstream in_short(bytes.substr(0, bytes.size() - 3), std::ios::binary);
  EXPECT_THROW(read_episode(in_short, e), IoError);
  EXPECT_THROW(read_episodes("/nonexistent/dir/x.gfep"), IoError);
}

TEST(LabelBalance, MatchesRecount) {
  std::vector<Episode> eps;
  for (int i = 0; i < 5; ++i) eps.push_back(generate_episode(EpisodeConfig{}, 7 + i));
  const LabelBalance b = label_balance(eps);
  std::size_t pos = 0;
  for (const auto& e : eps) pos += std::count(e.labels.y.begin(), e.labels.y.end(), 1);
  EXPECT_EQ(b.positives, pos);
  EXPECT_EQ(b.frames, 5u * 64u);
}

TEST(EpisodeSeed, SplitsDoNotCollide) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t offset : {0ull, 1'000'000ull, 2'000'000ull}) {
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(episode_seed(1, offset, i));
  }
  EXPECT_EQ(seen.size(), 3000u);
}

}  // namespace
}  // namespace gatefusion
