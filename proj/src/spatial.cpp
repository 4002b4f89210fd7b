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

#include "sddi/spatial.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace sddi {

namespace {

template <typename T>
T normalized_coordinate(std::size_t index, std::size_t extent) {
  if (extent == 1) return T(0);
  return T(-1) + T(2) * static_cast<T>(index) / static_cast<T>(extent - 1);
}

// Normalized -> pixel coordinate. Values within a few ulps of the pixel
// lattice are snapped onto it so lattice-preserving transforms (identity,
// quarter turns) sample exactly.
template <typename T>
T pixel_coordinate(T normalized, std::size_t extent) {
  const T half_span = static_cast<T>(extent - 1) / T(2);
  T p = (normalized + T(1)) * half_span;
  // Far outside the image every tap reads padding; clamping keeps floor() castable.
  if (!(p >= T(-2))) p = T(-2);
  if (p > static_cast<T>(extent) + T(1)) p = static_cast<T>(extent) + T(1);
  const T nearest = std::round(p);
  const T tolerance = T(16) * std::numeric_limits<T>::epsilon() * (T(1) + std::abs(nearest));
  return std::abs(p - nearest) <= tolerance ? nearest : p;
}

}  // namespace

template <typename T>
BasicTensor<T> affine_grid(const BasicTensor<T>& theta, std::size_t out_h, std::size_t out_w) {
  if (theta.rank() != 3 || theta.dim(1) != 2 || theta.dim(2) != 3) {
    throw ShapeError("affine_grid: theta must be [N, 2, 3], got " + shape_to_string(theta.shape()));
  }
  if (out_h == 0 || out_w == 0) throw ShapeError("affine_grid: output size must be positive");
  const std::size_t n = theta.dim(0);
  const auto th = theta.data();
  std::vector<T> out(n * out_h * out_w * 2);
  for (std::size_t b = 0; b < n; ++b) {
    const T* t = th.data() + b * 6;
    for (std::size_t i = 0; i < out_h; ++i) {
      const T yt = normalized_coordinate<T>(i, out_h);
      for (std::size_t j = 0; j < out_w; ++j) {
        const T xt = normalized_coordinate<T>(j, out_w);
        T* dst = out.data() + ((b * out_h + i) * out_w + j) * 2;
        dst[0] = (t[0] * xt + t[1] * yt) + t[2];
        dst[1] = (t[3] * xt + t[4] * yt) + t[5];
      }
    }
  }
  return make_result<T>({n, out_h, out_w, 2}, std::move(out), {theta}, "affine_grid",
                        [theta, n, out_h, out_w](std::span<const T> grad_out) {
                          std::vector<T> dtheta(n * 6, T(0));
                          for (std::size_t b = 0; b < n; ++b) {
                            T* dt = dtheta.data() + b * 6;
                            for (std::size_t i = 0; i < out_h; ++i) {
                              const T yt = normalized_coordinate<T>(i, out_h);
                              for (std::size_t j = 0; j < out_w; ++j) {
                                const T xt = normalized_coordinate<T>(j, out_w);
                                const T* g = grad_out.data() + ((b * out_h + i) * out_w + j) * 2;
                                for (std::size_t r = 0; r < 2; ++r) {
                                  dt[r * 3 + 0] += g[r] * xt;
                                  dt[r * 3 + 1] += g[r] * yt;
                                  dt[r * 3 + 2] += g[r];
                                }
                              }
                            }
                          }
                          theta.accumulate_grad(dtheta);
                        });
}

template <typename T>
BasicTensor<T> bilinear_sample(const BasicTensor<T>& image, const BasicTensor<T>& grid) {
  if (image.rank() != 4) {
    throw ShapeError("bilinear_sample: image must be [N, C, H, W], got " +
                     shape_to_string(image.shape()));
  }
  if (grid.rank() != 4 || grid.dim(3) != 2 || grid.dim(0) != image.dim(0)) {
    throw ShapeError("bilinear_sample: grid must be [N, H_out, W_out, 2] matching the image batch, got " +
                     shape_to_string(grid.shape()));
  }
  const std::size_t n = image.dim(0), c = image.dim(1), h = image.dim(2), w = image.dim(3);
  const std::size_t oh = grid.dim(1), ow = grid.dim(2);
  const auto img = image.data();
  const auto gr = grid.data();

  auto pixel = [&](const T* plane, std::ptrdiff_t y, std::ptrdiff_t x) -> T {
    if (x < 0 || y < 0 || x >= static_cast<std::ptrdiff_t>(w) || y >= static_cast<std::ptrdiff_t>(h)) {
      return T(0);
    }
    return plane[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)];
  };

  std::vector<T> out(n * c * oh * ow);
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t k = 0; k < oh * ow; ++k) {
      const T px = pixel_coordinate(gr[(b * oh * ow + k) * 2 + 0], w);
      const T py = pixel_coordinate(gr[(b * oh * ow + k) * 2 + 1], h);
      const T x0f = std::floor(px);
      const T y0f = std::floor(py);
      const T fx = px - x0f;
      const T fy = py - y0f;
      const auto x0 = static_cast<std::ptrdiff_t>(x0f);
      const auto y0 = static_cast<std::ptrdiff_t>(y0f);
      for (std::size_t ch = 0; ch < c; ++ch) {
        const T* plane = img.data() + (b * c + ch) * h * w;
        out[(b * c + ch) * oh * ow + k] = (((T(1) - fx) * (T(1) - fy)) * pixel(plane, y0, x0) +
                                           (fx * (T(1) - fy)) * pixel(plane, y0, x0 + 1)) +
                                          ((T(1) - fx) * fy) * pixel(plane, y0 + 1, x0) +
                                          (fx * fy) * pixel(plane, y0 + 1, x0 + 1);
      }
    }
  }

  return make_result<T>(
      {n, c, oh, ow}, std::move(out), {image, grid}, "bilinear_sample",
      [image, grid, n, c, h, w, oh, ow](std::span<const T> grad_out) {
        const auto img = image.data();
        const auto gr = grid.data();
        const bool want_image = image.requires_grad();
        const bool want_grid = grid.requires_grad();
        std::vector<T> dimg(want_image ? image.numel() : 0, T(0));
        std::vector<T> dgrid(want_grid ? grid.numel() : 0, T(0));
        auto inside = [&](std::ptrdiff_t y, std::ptrdiff_t x) {
          return x >= 0 && y >= 0 && x < static_cast<std::ptrdiff_t>(w) &&
                 y < static_cast<std::ptrdiff_t>(h);
        };
        const T sx = static_cast<T>(w - 1) / T(2);
        const T sy = static_cast<T>(h - 1) / T(2);
        for (std::size_t b = 0; b < n; ++b) {
          for (std::size_t k = 0; k < oh * ow; ++k) {
            const T px = pixel_coordinate(gr[(b * oh * ow + k) * 2 + 0], w);
            const T py = pixel_coordinate(gr[(b * oh * ow + k) * 2 + 1], h);
            const T x0f = std::floor(px);
            const T y0f = std::floor(py);
            const T fx = px - x0f;
            const T fy = py - y0f;
            const auto x0 = static_cast<std::ptrdiff_t>(x0f);
            const auto y0 = static_cast<std::ptrdiff_t>(y0f);
            const std::ptrdiff_t xs[4] = {x0, x0 + 1, x0, x0 + 1};
            const std::ptrdiff_t ys[4] = {y0, y0, y0 + 1, y0 + 1};
            const T weights[4] = {(T(1) - fx) * (T(1) - fy), fx * (T(1) - fy), (T(1) - fx) * fy, fx * fy};
            T gx = T(0), gy = T(0);
            for (std::size_t ch = 0; ch < c; ++ch) {
              const std::size_t plane_off = (b * c + ch) * h * w;
              const T g = grad_out[(b * c + ch) * oh * ow + k];
              T v[4];
              for (int q = 0; q < 4; ++q) {
                const bool ok = inside(ys[q], xs[q]);
                const std::size_t idx =
                    ok ? plane_off + static_cast<std::size_t>(ys[q]) * w + static_cast<std::size_t>(xs[q]) : 0;
                v[q] = ok ? img[idx] : T(0);
                if (want_image && ok) dimg[idx] += weights[q] * g;
              }
              gx += g * ((T(1) - fy) * (v[1] - v[0]) + fy * (v[3] - v[2]));
              gy += g * ((T(1) - fx) * (v[2] - v[0]) + fx * (v[3] - v[1]));
            }
            if (want_grid) {
              dgrid[(b * oh * ow + k) * 2 + 0] = gx * sx;
              dgrid[(b * oh * ow + k) * 2 + 1] = gy * sy;
            }
          }
        }
        if (want_image) image.accumulate_grad(dimg);
        if (want_grid) grid.accumulate_grad(dgrid);
      });
}

#define SDDI_INSTANTIATE_SPATIAL(T)                                                          \
  template BasicTensor<T> affine_grid(const BasicTensor<T>&, std::size_t, std::size_t); \
  template BasicTensor<T> bilinear_sample(const BasicTensor<T>&, const BasicTensor<T>&);

SDDI_INSTANTIATE_SPATIAL(float)
SDDI_INSTANTIATE_SPATIAL(double)

}  // namespace sddi
