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

#include "gatefusion/checkpoint.h"

#include <array>
#include <bit>
#include <fstream>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "gatefusion/errors.h"

namespace gatefusion {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::array<char, 4> kTensorMagic = {'G', 'F', 'T', 'N'};
constexpr const char* kManifestName = "manifest.json";
constexpr const char* kFormatName = "gatefusion-checkpoint";

template <typename U>
void put_le(std::string& buf, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
}

template <typename U>
U get_le(const unsigned char* p) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(p[i]) << (8 * i);
  return v;
}

std::string file_name(const std::string& param) { return param + ".bin"; }

}  // namespace

void write_tensor_file(const fs::path& path, const Matrix& m) {
  std::string buf(kTensorMagic.begin(), kTensorMagic.end());
  put_le<std::uint32_t>(buf, kTensorFormatVersion);
  put_le<std::uint32_t>(buf, 2);
  put_le<std::uint64_t>(buf, static_cast<std::uint64_t>(m.rows()));
  put_le<std::uint64_t>(buf, static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    put_le<std::uint64_t>(buf, std::bit_cast<std::uint64_t>(m.data()[i]));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("cannot write tensor file '" + path.string() + "'");
}

Matrix read_tensor_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read tensor file '" + path.string() + "'");
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  constexpr std::size_t kHeader = 4 + 4 + 4 + 8 + 8;
  if (bytes.size() < kHeader ||
      !std::equal(kTensorMagic.begin(), kTensorMagic.end(), bytes.begin())) {
    throw IoError("'" + path.string() + "' is not a GFTN tensor file");
  }
  const auto version = get_le<std::uint32_t>(bytes.data() + 4);
  const auto rank = get_le<std::uint32_t>(bytes.data() + 8);
  if (version != kTensorFormatVersion || rank != 2) {
    throw IoError("'" + path.string() + "': unsupported version or rank");
  }
  const auto rows = get_le<std::uint64_t>(bytes.data() + 12);
  const auto cols = get_le<std::uint64_t>(bytes.data() + 20);
  if (bytes.size() != kHeader + rows * cols * 8) {
    throw IoError("'" + path.string() + "': payload size does not match shape");
  }
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = std::bit_cast<double>(
        get_le<std::uint64_t>(bytes.data() + kHeader + static_cast<std::size_t>(i) * 8));
  }
  return m;
}

void save_checkpoint(const fs::path& dir, const ParameterList& params,
                     const CheckpointManifest& manifest) {
  std::error_code ec;
  fs::remove_all(dir, ec);
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create checkpoint dir '" + dir.string() + "': " + ec.message());

  json entries = json::array();
  for (const auto& p : params) {
    write_tensor_file(dir / file_name(p.name), p.tensor.value());
    entries.push_back({{"name", p.name},
                       {"file", file_name(p.name)},
                       {"rows", p.tensor.rows()},
                       {"cols", p.tensor.cols()}});
  }
  json j;
  j["format"] = kFormatName;
  j["version"] = kTensorFormatVersion;
  j["config_hash"] = manifest.config_hash;
  j["step"] = manifest.step;
  j["metrics"] = manifest.metrics;
  j["config"] = manifest.config_json.empty() ? json::object()
                                             : json::parse(manifest.config_json);
  j["parameters"] = std::move(entries);
  std::ofstream out(dir / kManifestName, std::ios::trunc);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("cannot write manifest in '" + dir.string() + "'");
}

CheckpointManifest read_manifest(const fs::path& dir) {
  const fs::path path = dir / kManifestName;
  std::ifstream in(path);
  if (!in) throw IoError("no checkpoint at '" + dir.string() + "' (missing " + kManifestName + ")");
  std::stringstream buf;
  buf << in.rdbuf();
  const json j = json::parse(buf.str(), nullptr, false);
  if (j.is_discarded() || !j.is_object() || j.value("format", "") != kFormatName) {
    throw IoError("'" + path.string() + "' is not a checkpoint manifest");
  }
  CheckpointManifest m;
  m.config_hash = j.value("config_hash", "");
  m.step = j.value("step", std::uint64_t{0});
  if (j.contains("metrics")) m.metrics = j["metrics"].get<std::map<std::string, double>>();
  if (j.contains("config")) m.config_json = j["config"].dump();
  return m;
}

CheckpointManifest load_checkpoint(const fs::path& dir, const ParameterList& params) {
  CheckpointManifest manifest = read_manifest(dir);
  for (const auto& p : params) {
    const fs::path path = dir / file_name(p.name);
    if (!fs::exists(path)) {
      throw IoError("checkpoint '" + dir.string() + "' has no parameter '" + p.name + "'");
    }
    Matrix m = read_tensor_file(path);
    if (m.rows() != p.tensor.value().rows() || m.cols() != p.tensor.value().cols()) {
      throw IoError("checkpoint parameter '" + p.name + "' has shape [" +
                    std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                    "], model expects " + p.tensor.shape().str());
    }
    Tensor handle = p.tensor;
    handle.mutable_value() = std::move(m);
  }
  return manifest;
}

}  // namespace gatefusion
