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
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sddi/dataset.hpp"
#include "sddi/image.hpp"
#include "sddi/tensor.hpp"

namespace sddi {

//! Bilinear resampling with align-corners coordinates.
GrayImage resize_bilinear(const GrayImage& image, std::size_t height, std::size_t width);

//! Lazily decoded images keyed by drug id.
//!
//! Relative manifest paths resolve against `image_dir` when given, else
//! against the manifest's own directory. With a target size set, images of a
//! different size are still accepted: they are resampled and counted in
//! size_mismatches().
class ImageStore {
 public:
  ImageStore(const std::vector<DrugRecord>& manifest, std::filesystem::path base_dir,
             std::optional<std::size_t> target_size = std::nullopt);

  const GrayImage& get(const std::string& drug_id);
  std::filesystem::path path_of(const std::string& drug_id) const;
  //! Decodes every image up front so ingestion errors surface early.
  void preload();

  std::size_t size_mismatches() const { return mismatches_; }
  std::optional<std::size_t> target_size() const { return target_size_; }
  std::vector<std::string> ids() const;

 private:
  std::map<std::string, std::filesystem::path> paths_;
  std::map<std::string, GrayImage> cache_;
  std::optional<std::size_t> target_size_;
  std::size_t mismatches_ = 0;
};

//! Stacks equally sized images into [N, 1, H, W].
Tensor stack_images(std::span<const GrayImage* const> images);

}  // namespace sddi
