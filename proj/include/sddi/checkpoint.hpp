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

// Binary checkpoint layout (all integers little-endian):
//
//   "SDDI" | u32 version | u32 config_len | config bytes | u32 tensor_count
//   per tensor: u16 name_len | name | u8 rank | u64 dims[rank] | f32 data[]
//
// Optimizer buffers live in the same table under the "optim/" prefix.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sddi/config.hpp"
#include "sddi/network.hpp"
#include "sddi/optim.hpp"

namespace sddi {

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr char kCheckpointMagic[4] = {'S', 'D', 'D', 'I'};
inline constexpr std::string_view kOptimizerPrefix = "optim/";

struct Checkpoint {
  std::string config_text;
  std::vector<NamedTensor<float>> tensors;
};

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& checkpoint);
//! Validates magic and version before touching the tensor table. Throws
//! FormatError on truncation (naming the tensor), bad magic, unknown
//! version, or dimension overflow.
Checkpoint parse_checkpoint(std::span<const std::uint8_t> bytes);

//! Writes to a temporary sibling and renames it into place.
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

Checkpoint make_checkpoint(const RunConfig& config, const ModelState& model, const Optimizer* optimizer);

//! Copies model tensors (and optimizer buffers when `optimizer` is given)
//! out of the checkpoint. Throws FormatError naming the first missing,
//! extra, or mis-shaped tensor.
void restore_checkpoint(const Checkpoint& checkpoint, ModelState& model, Optimizer* optimizer);

//! Config stored in the checkpoint with `overrides` applied on top. Throws
//! FormatError when an override changes a model-shape key.
RunConfig checkpoint_config(const Checkpoint& checkpoint, const std::vector<std::pair<std::string, std::string>>& overrides);

}  // namespace sddi
