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

#include "sddi/image_store.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "sddi/errors.hpp"

namespace sddi {

GrayImage resize_bilinear(const GrayImage& image, std::size_t height, std::size_t width) {
  if (height == 0 || width == 0) throw ShapeError("resize_bilinear: zero output size");
  if (image.height == height && image.width == width) return image;
  GrayImage out(height, width);
  const auto coord = [](std::size_t i, std::size_t out_n, std::size_t in_n) {
    return out_n == 1 ? 0.0 : static_cast<double>(i) * static_cast<double>(in_n - 1) / static_cast<double>(out_n - 1);
  };
  for (std::size_t y = 0; y < height; ++y) {
    const double fy = coord(y, height, image.height);
    const auto y0 = static_cast<std::size_t>(std::floor(fy));
    const std::size_t y1 = std::min(y0 + 1, image.height - 1);
    const double wy = fy - static_cast<double>(y0);
    for (std::size_t x = 0; x < width; ++x) {
      const double fx = coord(x, width, image.width);
      const auto x0 = static_cast<std::size_t>(std::floor(fx));
      const std::size_t x1 = std::min(x0 + 1, image.width - 1);
      const double wx = fx - static_cast<double>(x0);
      const double top = (1 - wx) * image.at(y0, x0) + wx * image.at(y0, x1);
      const double bottom = (1 - wx) * image.at(y1, x0) + wx * image.at(y1, x1);
      out.at(y, x) = static_cast<float>(std::clamp((1 - wy) * top + wy * bottom, 0.0, 1.0));
    }
  }
  return out;
}

ImageStore::ImageStore(const std::vector<DrugRecord>& manifest, std::filesystem::path base_dir,
                       std::optional<std::size_t> target_size)
    : target_size_(target_size) {
  for (const auto& record : manifest) {
    const auto& p = record.image_path;
    paths_[record.drug_id] = p.is_absolute() ? p : base_dir / p;
  }
}

std::filesystem::path ImageStore::path_of(const std::string& drug_id) const {
  auto it = paths_.find(drug_id);
  if (it == paths_.end()) throw IngestionError("no image for drug_id '" + drug_id + "'");
  return it->second;
}

const GrayImage& ImageStore::get(const std::string& drug_id) {
  auto cached = cache_.find(drug_id);
  if (cached != cache_.end()) return cached->second;
  GrayImage image = load_image(path_of(drug_id));
  if (target_size_ && (image.height != *target_size_ || image.width != *target_size_)) {
    if (mismatches_++ == 0) {
      std::cerr << "warning: " << path_of(drug_id).string() << " is " << image.height << "x" << image.width
                << ", resampling to " << *target_size_ << "x" << *target_size_ << "\n";
    }
    image = resize_bilinear(image, *target_size_, *target_size_);
  }
  return cache_.emplace(drug_id, std::move(image)).first->second;
}

void ImageStore::preload() {
  for (const auto& [id, path] : paths_) get(id);
}

std::vector<std::string> ImageStore::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, path] : paths_) out.push_back(id);
  return out;
}

Tensor stack_images(std::span<const GrayImage* const> images) {
  if (images.empty()) throw ShapeError("stack_images: empty batch");
  const std::size_t h = images[0]->height, w = images[0]->width;
  std::vector<float> data;
  data.reserve(images.size() * h * w);
  for (const GrayImage* image : images) {
    if (image->height != h || image->width != w) {
      throw ShapeError("stack_images: mixed image sizes " + std::to_string(h) + "x" + std::to_string(w) + " and " +
                       std::to_string(image->height) + "x" + std::to_string(image->width));
    }
    data.insert(data.end(), image->pixels.begin(), image->pixels.end());
  }
  return Tensor({images.size(), 1, h, w}, std::move(data));
}

}  // namespace sddi
