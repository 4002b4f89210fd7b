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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sddi/network.hpp"
#include "sddi/objective.hpp"
#include "sddi/optim.hpp"

namespace sddi {

//! Flat run configuration. Every key can come from a `key = value` file and
//! be overridden from the command line; set() validates the value and
//! validate() the combination.
struct RunConfig {
  // Model.
  std::size_t image_size = 500;
  std::vector<std::size_t> conv_filters{64, 128, 128, 256};
  std::size_t kernel = 9;
  std::size_t pool = 3;
  std::vector<std::size_t> fc_sizes{256, 128, 20};
  bool use_stn = false;

  // Training.
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  OptimizerKind optimizer = OptimizerKind::adam;
  double lr = 5e-5;
  bool line_search = false;
  DistanceKind metric = DistanceKind::euclidean;
  double margin = 1.0;
  double split = 0.66;
  double val_fraction = 0.1;
  std::uint64_t seed = 42;
  std::size_t checkpoint_every = 10;

  // Evaluation.
  bool rotate_eval = false;
  std::optional<double> threshold;           // override
  std::optional<double> selected_threshold;  // chosen during training
  std::string baseline = "ssim";
  std::string ae_criterion = "cosine";
  double ae_lr = 1e-3;

  // Paths.
  std::filesystem::path manifest;
  std::filesystem::path interactions;
  std::filesystem::path images;
  std::filesystem::path checkpoint;
  std::filesystem::path report;
  std::filesystem::path out;
  std::string cids;
  std::filesystem::path cid_file;

  //! Throws ConfigError on an unknown key or an unparsable value.
  void set(std::string_view key, std::string_view value);
  //! Cross-field checks; `check_model` adds the Siamese shape chain, which
  //! the baselines do not use.
  void validate(bool check_model = true) const;

  TowerSpec tower_spec() const;
  ModelSpec model_spec() const;
  OptimizerConfig optimizer_config() const;
  ContrastiveConfig contrastive() const;

  //! `key = value` lines for every key, in a fixed order.
  std::string to_text() const;
  //! Parses `key = value` lines; `#` starts a comment. Later lines win.
  static RunConfig from_text(std::string_view text, RunConfig base);
  static RunConfig from_text(std::string_view text);
  static RunConfig from_file(const std::filesystem::path& path, RunConfig base);

  static const std::vector<std::string>& keys();
  //! Keys that determine tensor shapes; they must agree between a checkpoint
  //! and the configuration used to read it.
  static const std::vector<std::string>& model_keys();
  std::string get(std::string_view key) const;
};

}  // namespace sddi
