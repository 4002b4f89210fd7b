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
#include <span>
#include <string>
#include <vector>

#include "sddi/tensor.hpp"

namespace sddi {

//! Single-channel image, row-major, pixels in [0, 1].
struct GrayImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> pixels;

  GrayImage() = default;
  GrayImage(std::size_t h, std::size_t w, float fill = 0.0f) : height(h), width(w), pixels(h * w, fill) {}

  float& at(std::size_t y, std::size_t x) { return pixels[y * width + x]; }
  float at(std::size_t y, std::size_t x) const { return pixels[y * width + x]; }

  bool operator==(const GrayImage&) const = default;
};

//! Decodes a PNG. Color images are reduced with 0.299 R + 0.587 G + 0.114 B;
//! every value is then divided by 255. Alpha is composited onto white.
//! Throws IngestionError naming the path.
GrayImage load_image(const std::filesystem::path& path);
GrayImage decode_png(std::span<const std::uint8_t> bytes, const std::string& origin = "<memory>");

//! 8-bit grayscale PNG, values rounded to the nearest 1/255 step.
void save_png(const GrayImage& image, const std::filesystem::path& path);

//! 8-bit RGB PNG from interleaved bytes (height * width * 3).
std::vector<std::uint8_t> encode_rgb_png(std::size_t height, std::size_t width,
                                         std::span<const std::uint8_t> rgb);

bool has_png_signature(std::span<const std::uint8_t> bytes);

//! Lossless counterclockwise rotation by quarter_turns * 90 degrees
//! (negative values turn clockwise).
GrayImage rotate90(const GrayImage& image, int quarter_turns);

//! [1, 1, H, W] tensor view of the pixels.
Tensor to_tensor(const GrayImage& image);

}  // namespace sddi
