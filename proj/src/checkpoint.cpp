// SPDX-FileCopyrightText: Copyright (c) 2026 The sddi authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sddi/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>

#include "sddi/errors.hpp"

namespace sddi {

namespace {

class Writer {
 public:
  template <typename U>
  void put(U value) {
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      bytes_.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(value) >> (8 * i)));
    }
  }
  void put_bytes(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename U>
  U get(const std::string& what) {
    need(sizeof(U), what);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += sizeof(U);
    return static_cast<U>(v);
  }
  std::string get_string(std::size_t n, const std::string& what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  void need(std::size_t n, const std::string& what) const {
    if (remaining() < n) throw FormatError("checkpoint truncated while reading " + what);
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& checkpoint) {
  Writer w;
  w.put_bytes(std::string_view(kCheckpointMagic, 4));
  w.put<std::uint32_t>(kCheckpointVersion);
  if (checkpoint.config_text.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw FormatError("checkpoint: config text too large");
  }
  w.put<std::uint32_t>(static_cast<std::uint32_t>(checkpoint.config_text.size()));
  w.put_bytes(checkpoint.config_text);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(checkpoint.tensors.size()));
  for (const auto& [name, tensor] : checkpoint.tensors) {
    if (name.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw FormatError("checkpoint: tensor name too long: " + name.substr(0, 64));
    }
    if (tensor.rank() > std::numeric_limits<std::uint8_t>::max()) {
      throw FormatError("checkpoint: rank too large for " + name);
    }
    w.put<std::uint16_t>(static_cast<std::uint16_t>(name.size()));
    w.put_bytes(name);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(tensor.rank()));
    for (std::size_t d : tensor.shape()) w.put<std::uint64_t>(d);
    for (float v : tensor.data()) w.put<std::uint32_t>(std::bit_cast<std::uint32_t>(v));
  }
  return w.take();
}

Checkpoint parse_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (r.get_string(4, "magic") != std::string_view(kCheckpointMagic, 4)) {
    throw FormatError("not a checkpoint: bad magic");
  }
  const auto version = r.get<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version) + " (expected " +
                      std::to_string(kCheckpointVersion) + ")");
  }
  Checkpoint out;
  const auto config_len = r.get<std::uint32_t>("config length");
  out.config_text = r.get_string(config_len, "config text");
  const auto count = r.get<std::uint32_t>("tensor count");
  for (std::uint32_t t = 0; t < count; ++t) {
    const std::string slot = "tensor #" + std::to_string(t);
    const auto name_len = r.get<std::uint16_t>(slot + " name length");
    const std::string name = r.get_string(name_len, slot + " name");
    const std::string what = "tensor '" + name + "'";
    const auto rank = r.get<std::uint8_t>(what + " rank");
    if (rank == 0) throw FormatError("checkpoint: " + what + " has rank 0");
    Shape shape;
    std::uint64_t numel = 1;
    for (std::uint8_t d = 0; d < rank; ++d) {
      const auto dim = r.get<std::uint64_t>(what + " dims");
      if (dim == 0) throw FormatError("checkpoint: " + what + " has a zero dimension");
      if (numel > std::numeric_limits<std::uint64_t>::max() / dim) {
        throw FormatError("checkpoint: " + what + " dimensions overflow");
      }
      numel *= dim;
      shape.push_back(static_cast<std::size_t>(dim));
    }
    if (numel > r.remaining() / 4) {
      throw FormatError("checkpoint truncated while reading " + what + " data (" + std::to_string(numel) +
                        " values declared, " + std::to_string(r.remaining()) + " bytes left)");
    }
    std::vector<float> data(static_cast<std::size_t>(numel));
    for (auto& v : data) v = std::bit_cast<float>(r.get<std::uint32_t>(what + " data"));
    out.tensors.push_back({name, Tensor(std::move(shape), std::move(data))});
  }
  if (r.remaining() != 0) throw FormatError("checkpoint: " + std::to_string(r.remaining()) + " trailing bytes");
  return out;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  const auto bytes = serialize_checkpoint(checkpoint);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IngestionError("cannot write checkpoint " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IngestionError("cannot write checkpoint " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open checkpoint " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_checkpoint(bytes);
}

Checkpoint make_checkpoint(const RunConfig& config, const ModelState& model, const Optimizer* optimizer) {
  Checkpoint out;
  out.config_text = config.to_text();
  for (const auto& t : model.state_tensors()) out.tensors.push_back({t.name, t.tensor.clone()});
  if (optimizer != nullptr) {
    for (auto& t : optimizer->state_tensors()) out.tensors.push_back(std::move(t));
  }
  return out;
}

void restore_checkpoint(const Checkpoint& checkpoint, ModelState& model, Optimizer* optimizer) {
  std::map<std::string, const Tensor*> stored;
  std::vector<NamedTensor<float>> optimizer_tensors;
  for (const auto& t : checkpoint.tensors) {
    if (t.name.rfind(kOptimizerPrefix, 0) == 0) {
      optimizer_tensors.push_back(t);
    } else if (!stored.emplace(t.name, &t.tensor).second) {
      throw FormatError("checkpoint: duplicate tensor '" + t.name + "'");
    }
  }
  auto targets = model.state_tensors();
  for (const auto& target : targets) {
    auto it = stored.find(target.name);
    if (it == stored.end()) throw FormatError("incompatible checkpoint: missing tensor '" + target.name + "'");
    if (it->second->shape() != target.tensor.shape()) {
      throw FormatError("incompatible checkpoint: tensor '" + target.name + "' is " +
                        shape_to_string(it->second->shape()) + ", model expects " +
                        shape_to_string(target.tensor.shape()));
    }
  }
  if (stored.size() != targets.size()) {
    for (const auto& [name, tensor] : stored) {
      bool known = false;
      for (const auto& target : targets) known = known || target.name == name;
      if (!known) throw FormatError("incompatible checkpoint: unexpected tensor '" + name + "'");
    }
  }
  for (auto& target : targets) {
    const auto src = stored.at(target.name)->data();
    auto dst = target.tensor.mutable_data();
    std::copy(src.begin(), src.end(), dst.begin());
  }
  if (optimizer != nullptr && !optimizer_tensors.empty()) optimizer->load_state_tensors(optimizer_tensors);
}

RunConfig checkpoint_config(const Checkpoint& checkpoint,
                            const std::vector<std::pair<std::string, std::string>>& overrides) {
  const RunConfig stored = RunConfig::from_text(checkpoint.config_text);
  RunConfig config = stored;
  for (const auto& [key, value] : overrides) config.set(key, value);
  for (const auto& key : RunConfig::model_keys()) {
    if (config.get(key) != stored.get(key)) {
      throw FormatError("incompatible checkpoint: " + key + " is " + stored.get(key) + " in the checkpoint but " +
                        config.get(key) + " was requested");
    }
  }
  return config;
}

}  // namespace sddi
