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

#include "sddi/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace sddi {

namespace {

GrayImage decode_with(png_image& image, const std::string& origin) {
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const png_color white{255, 255, 255};
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, &white, buffer.data(), 0, nullptr)) {
    const std::string message = image.message;
    png_image_free(&image);
    throw IngestionError("cannot decode image " + origin + ": " + message);
  }
  GrayImage out(image.height, image.width);
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    double value;
    if (color) {
      const png_byte* px = buffer.data() + 3 * i;
      value = (0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2]) / 255.0;
    } else {
      value = buffer[i] / 255.0;
    }
    out.pixels[i] = static_cast<float>(std::clamp(value, 0.0, 1.0));
  }
  return out;
}

}  // namespace

bool has_png_signature(std::span<const std::uint8_t> bytes) {
  static constexpr std::uint8_t kSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  return bytes.size() >= 8 && std::memcmp(bytes.data(), kSignature, 8) == 0;
}

GrayImage decode_png(std::span<const std::uint8_t> bytes, const std::string& origin) {
  if (!has_png_signature(bytes)) throw IngestionError("not a PNG file: " + origin);
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw IngestionError("cannot decode image " + origin + ": " + image.message);
  }
  return decode_with(image, origin);
}

GrayImage load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open image " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_png(bytes, path.string());
}

void save_png(const GrayImage& image, const std::filesystem::path& path) {
  std::vector<png_byte> bytes(image.pixels.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    bytes[i] = static_cast<png_byte>(std::lround(std::clamp(image.pixels[i], 0.0f, 1.0f) * 255.0f));
  }
  png_image out;
  std::memset(&out, 0, sizeof out);
  out.version = PNG_IMAGE_VERSION;
  out.width = static_cast<png_uint_32>(image.width);
  out.height = static_cast<png_uint_32>(image.height);
  out.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&out, path.c_str(), 0, bytes.data(), 0, nullptr)) {
    throw IngestionError("cannot write image " + path.string() + ": " + out.message);
  }
}

std::vector<std::uint8_t> encode_rgb_png(std::size_t height, std::size_t width,
                                         std::span<const std::uint8_t> rgb) {
  if (rgb.size() != height * width * 3) throw IngestionError("encode_rgb_png: buffer size mismatch");
  png_image out;
  std::memset(&out, 0, sizeof out);
  out.version = PNG_IMAGE_VERSION;
  out.width = static_cast<png_uint_32>(width);
  out.height = static_cast<png_uint_32>(height);
  out.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&out, nullptr, &size, 0, rgb.data(), 0, nullptr)) {
    throw IngestionError(std::string("encode_rgb_png: ") + out.message);
  }
  std::vector<std::uint8_t> bytes(size);
  if (!png_image_write_to_memory(&out, bytes.data(), &size, 0, rgb.data(), 0, nullptr)) {
    throw IngestionError(std::string("encode_rgb_png: ") + out.message);
  }
  bytes.resize(size);
  return bytes;
}

GrayImage rotate90(const GrayImage& image, int quarter_turns) {
  const int k = ((quarter_turns % 4) + 4) % 4;
  if (k == 0) return image;
  const std::size_t h = image.height, w = image.width;
  GrayImage out = (k == 2) ? GrayImage(h, w) : GrayImage(w, h);
  for (std::size_t y = 0; y < out.height; ++y) {
    for (std::size_t x = 0; x < out.width; ++x) {
      switch (k) {
        case 1: out.at(y, x) = image.at(x, w - 1 - y); break;
        case 2: out.at(y, x) = image.at(h - 1 - y, w - 1 - x); break;
        case 3: out.at(y, x) = image.at(h - 1 - x, y); break;
      }
    }
  }
  return out;
}

Tensor to_tensor(const GrayImage& image) {
  return Tensor({1, 1, image.height, image.width}, image.pixels);
}

}  // namespace sddi
