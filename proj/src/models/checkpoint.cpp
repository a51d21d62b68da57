// Copyright 2026 The qforge Authors. All rights reserved.
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

#include <cstring>
#include <fstream>

#include "qforge/models.hpp"
#include "util/binary_io.hpp"

namespace qforge {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'Q', 'F', 'G', 'C', 'K', 'P', 'T', '\0'};

template <typename T>
T get_le(std::istream& in, const std::string& what) {
  return io::get_le<T, CheckpointError>(in, what);
}

using io::put_le;

struct RawCheckpoint {
  json manifest;
  std::vector<std::vector<double>> values;
};

RawCheckpoint read_raw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
    throw CheckpointError(path.string() + " is not a qforge checkpoint (bad magic)");
  const auto version = get_le<std::uint32_t>(in, "version");
  if (version != kCheckpointVersion)
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  const auto length = get_le<std::uint64_t>(in, "manifest length");
  if (length > (std::uint64_t{1} << 32)) throw CheckpointError("implausible manifest length");
  std::string text(length, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(length)))
    throw CheckpointError("checkpoint truncated in manifest");

  RawCheckpoint raw;
  try {
    raw.manifest = json::parse(text);
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("checkpoint manifest is not valid JSON: ") + e.what());
  }
  if (!raw.manifest.contains("tensors") || !raw.manifest["tensors"].is_array() ||
      !raw.manifest.contains("model"))
    throw CheckpointError("checkpoint manifest lacks model or tensors");
  for (const auto& t : raw.manifest["tensors"]) {
    std::size_t n = 1;
    for (const auto& d : t.at("shape")) n *= d.get<std::size_t>();
    std::vector<double> v(n);
    for (double& x : v) x = get_le<double>(in, t.at("name").get<std::string>());
    raw.values.push_back(std::move(v));
  }
  if (in.peek() != std::ifstream::traits_type::eof())
    throw CheckpointError("checkpoint has trailing bytes");
  return raw;
}

void assign_state(const RawCheckpoint& raw, QNetwork& model) {
  const auto state = model.state();
  const auto& tensors = raw.manifest["tensors"];
  if (tensors.size() != state.size())
    throw CheckpointError("checkpoint holds " + std::to_string(tensors.size()) +
                          " tensors, model expects " + std::to_string(state.size()));
  for (std::size_t i = 0; i < state.size(); ++i) {
    const auto name = tensors[i].at("name").get<std::string>();
    const Shape shape(tensors[i].at("shape").get<std::vector<std::size_t>>());
    if (name != state[i].name || shape != state[i].tensor.shape())
      throw CheckpointError("checkpoint tensor " + name + " " + shape.str() +
                            " does not match model tensor " + state[i].name + " " +
                            state[i].tensor.shape().str());
    auto dst = Tensor(state[i].tensor).mutable_values();
    std::copy(raw.values[i].begin(), raw.values[i].end(), dst.begin());
  }
}

ModelConfig config_of(const RawCheckpoint& raw) {
  try {
    return model_config_from_json(raw.manifest["model"]).resolved();
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("checkpoint model config invalid: ") + e.what());
  }
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const QNetwork& model,
                     const json& meta) {
  const auto params = model.parameters().size();
  const auto state = model.state();
  json tensors = json::array();
  for (std::size_t i = 0; i < state.size(); ++i)
    tensors.push_back({{"name", state[i].name},
                       {"kind", i < params ? "param" : "buffer"},
                       {"shape", state[i].tensor.shape().dims()}});
  const json manifest{{"model", to_json(model.config())}, {"tensors", tensors}, {"meta", meta}};
  const std::string text = manifest.dump();

  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write checkpoint " + tmp.string());
    out.write(kMagic, 8);
    put_le<std::uint32_t>(out, kCheckpointVersion);
    put_le<std::uint64_t>(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& t : state)
      for (double v : t.tensor.values()) put_le<double>(out, v);
    if (!out) throw CheckpointError("failed writing checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  const auto raw = read_raw(path);
  LoadedCheckpoint out{make_model(config_of(raw)), raw.manifest.value("meta", json::object())};
  assign_state(raw, *out.model);
  return out;
}

void load_checkpoint_into(const std::filesystem::path& path, QNetwork& model) {
  const auto raw = read_raw(path);
  const auto stored = to_json(config_of(raw));
  auto expected = to_json(model.config());
  // The seed only affects initialization, not the architecture.
  auto a = stored, b = expected;
  a.erase("seed");
  b.erase("seed");
  if (a != b)
    throw CheckpointError("checkpoint architecture " + a.dump() + " does not match " + b.dump());
  assign_state(raw, model);
}

}  // namespace qforge
