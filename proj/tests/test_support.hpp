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

// Fixtures shared by the unit tests and the acceptance suite.

#pragma once

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sddi/dataset.hpp"
#include "sddi/errors.hpp"
#include "sddi/image.hpp"
#include "sddi/network.hpp"
#include "sddi/ops.hpp"
#include "sddi/pubchem.hpp"
#include "sddi/rng.hpp"
#include "sddi/tensor.hpp"

namespace sddi::testing {

//! Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("sddi_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline Tensor64 random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> data(shape_numel(shape));
  for (auto& v : data) v = rng.uniform(lo, hi);
  return Tensor64(std::move(shape), std::move(data));
}

//! Values at least `gap` away from zero, so relu-style kinks are not probed.
inline Tensor64 random_away_from_zero(Shape shape, Rng& rng, double gap = 0.05) {
  std::vector<double> data(shape_numel(shape));
  for (auto& v : data) {
    const double magnitude = rng.uniform(gap, 1.0);
    v = rng.uniform() < 0.5 ? -magnitude : magnitude;
  }
  return Tensor64(std::move(shape), std::move(data));
}

//! A random permutation of well separated values, so max-pool windows have
//! a unique maximum with a clear margin.
inline Tensor64 random_distinct(Shape shape, Rng& rng) {
  const std::size_t n = shape_numel(shape);
  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i) data[i] = static_cast<double>(i) / static_cast<double>(n);
  rng.shuffle(data);
  return Tensor64(std::move(shape), std::move(data));
}

//! Reduces any output to a scalar with fixed random weights, so every output
//! element contributes to the checked gradient.
inline Tensor64 weighted_sum(const Tensor64& out, const Tensor64& weights) { return sum(mul(out, weights)); }

//! White canvas with a few black rectangles inside a border of `margin`.
inline GrayImage random_glyph(Rng& rng, std::size_t size, std::size_t margin, int blocks = 3) {
  GrayImage g(size, size, 1.0f);
  const std::size_t span = size - 2 * margin;
  for (int k = 0; k < blocks; ++k) {
    const std::size_t y = margin + rng.below(span / 2 + 1);
    const std::size_t x = margin + rng.below(span / 2 + 1);
    const std::size_t h = 2 + rng.below(span / 4 + 1);
    const std::size_t w = 2 + rng.below(span / 4 + 1);
    for (std::size_t i = y; i < std::min(size - margin, y + h); ++i) {
      for (std::size_t j = x; j < std::min(size - margin, x + w); ++j) g.at(i, j) = 0.0f;
    }
  }
  return g;
}

//! Shift right by one column, filling with white.
inline GrayImage shift_right(const GrayImage& g) {
  GrayImage out(g.height, g.width, 1.0f);
  for (std::size_t i = 0; i < g.height; ++i) {
    for (std::size_t j = 1; j < g.width; ++j) out.at(i, j) = g.at(i, j - 1);
  }
  return out;
}

inline GrayImage constant_image(std::size_t h, std::size_t w, float value) { return GrayImage(h, w, value); }

//! Writes images as PNG files named <id>.png and returns the manifest.
inline std::vector<DrugRecord> write_images(const std::filesystem::path& dir,
                                            const std::vector<std::pair<std::string, GrayImage>>& images) {
  std::filesystem::create_directories(dir);
  std::vector<DrugRecord> manifest;
  for (const auto& [id, image] : images) {
    save_png(image, dir / (id + ".png"));
    manifest.push_back({id, "drug " + id, id + ".png"});
  }
  return manifest;
}

//! Clock whose sleeps advance time instantly.
class FakeClock final : public Clock {
 public:
  duration now() override { return now_; }
  void sleep_for(duration d) override {
    now_ += d;
    slept_ += d;
  }
  duration slept() const { return slept_; }

 private:
  duration now_{std::chrono::seconds(1000)};
  duration slept_{0};
};

//! Serves generated PNGs; records every URL and the clock time of each call.
class MockTransport final : public HttpTransport {
 public:
  explicit MockTransport(Clock* clock = nullptr, std::size_t size = 32) : clock_(clock), size_(size) {}

  HttpResponse get(const std::string& url) override {
    urls.push_back(url);
    if (clock_ != nullptr) times.push_back(clock_->now());
    if (fail_next > 0) {
      --fail_next;
      throw FetchError("GET " + url + ": timed out");
    }
    if (!scripted.empty()) {
      HttpResponse r = scripted.front();
      scripted.erase(scripted.begin());
      return r;
    }
    const auto pos = url.find("/cid/");
    const std::string cid = url.substr(pos + 5, url.find('/', pos + 5) - pos - 5);
    if (unknown.count(cid)) return {404, {}};
    return {200, png_for(cid, requested_size(url))};
  }

  //! Honors `image_size=SxS` like the real endpoint; the constructor size otherwise.
  std::size_t requested_size(const std::string& url) const {
    const auto pos = url.find("image_size=");
    if (pos == std::string::npos) return size_;
    return std::stoul(url.substr(pos + 11));
  }

  std::vector<std::uint8_t> png_for(const std::string& cid, std::size_t size) const {
    Rng rng(std::stoull(cid));
    std::vector<std::uint8_t> rgb(size * size * 3, 255);
    for (int k = 0; k < 3; ++k) {
      const std::size_t y = rng.below(size / 2), x = rng.below(size / 2);
      const std::size_t h = 2 + rng.below(size / 3), w = 2 + rng.below(size / 3);
      const std::uint8_t r = static_cast<std::uint8_t>(rng.below(256));
      for (std::size_t i = y; i < std::min(size, y + h); ++i) {
        for (std::size_t j = x; j < std::min(size, x + w); ++j) {
          rgb[3 * (i * size + j)] = r;
          rgb[3 * (i * size + j) + 1] = 0;
          rgb[3 * (i * size + j) + 2] = 0;
        }
      }
    }
    return encode_rgb_png(size, size, rgb);
  }

  std::vector<std::string> urls;
  std::vector<Clock::duration> times;
  std::vector<HttpResponse> scripted;  // served first, in order
  std::set<std::string> unknown;
  int fail_next = 0;  // transport failures before anything else

 private:
  Clock* clock_;
  std::size_t size_;
};

}  // namespace sddi::testing
