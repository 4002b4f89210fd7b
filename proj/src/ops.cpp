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

#include "sddi/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace sddi {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;
template <typename T>
using StridedMap = Eigen::Map<RowMat<T>, 0, Eigen::OuterStride<>>;
template <typename T>
using ConstStridedMap = Eigen::Map<const RowMat<T>, 0, Eigen::OuterStride<>>;

// Upper bound on im2col scratch elements per chunk.
constexpr std::size_t kColumnBudget = std::size_t{1} << 22;

struct ImageDims {
  std::size_t n, c, h, w;
  bool batched;
};

ImageDims image_dims(const Shape& shape, const char* op) {
  if (shape.size() == 4) return {shape[0], shape[1], shape[2], shape[3], true};
  if (shape.size() == 3) return {1, shape[0], shape[1], shape[2], false};
  throw ShapeError(std::string(op) + ": expected CHW or NCHW input, got " + shape_to_string(shape));
}

Shape image_shape(const ImageDims& d, std::size_t c, std::size_t h, std::size_t w) {
  if (d.batched) return {d.n, c, h, w};
  return {c, h, w};
}

struct ConvGeometry {
  std::size_t channels, height, width;
  std::size_t kernel, stride, padding;
  std::size_t out_h, out_w;

  std::size_t patch() const { return channels * kernel * kernel; }
};

template <typename T>
void im2col(const T* image, const ConvGeometry& g, std::size_t row_begin, std::size_t rows, T* col) {
  const std::size_t cols = rows * g.out_w;
  for (std::size_t c = 0; c < g.channels; ++c) {
    for (std::size_t kh = 0; kh < g.kernel; ++kh) {
      for (std::size_t kw = 0; kw < g.kernel; ++kw) {
        T* dst = col + ((c * g.kernel + kh) * g.kernel + kw) * cols;
        for (std::size_t r = 0; r < rows; ++r) {
          const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>((row_begin + r) * g.stride + kh) -
                                    static_cast<std::ptrdiff_t>(g.padding);
          T* row = dst + r * g.out_w;
          if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(g.height)) {
            std::fill(row, row + g.out_w, T(0));
            continue;
          }
          const T* src = image + (c * g.height + static_cast<std::size_t>(ih)) * g.width;
          for (std::size_t ow = 0; ow < g.out_w; ++ow) {
            const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow * g.stride + kw) -
                                      static_cast<std::ptrdiff_t>(g.padding);
            row[ow] = (iw < 0 || iw >= static_cast<std::ptrdiff_t>(g.width)) ? T(0) : src[iw];
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* col, const ConvGeometry& g, std::size_t row_begin, std::size_t rows, T* image) {
  const std::size_t cols = rows * g.out_w;
  for (std::size_t c = 0; c < g.channels; ++c) {
    for (std::size_t kh = 0; kh < g.kernel; ++kh) {
      for (std::size_t kw = 0; kw < g.kernel; ++kw) {
        const T* src = col + ((c * g.kernel + kh) * g.kernel + kw) * cols;
        for (std::size_t r = 0; r < rows; ++r) {
          const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>((row_begin + r) * g.stride + kh) -
                                    static_cast<std::ptrdiff_t>(g.padding);
          if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(g.height)) continue;
          T* dst = image + (c * g.height + static_cast<std::size_t>(ih)) * g.width;
          const T* row = src + r * g.out_w;
          for (std::size_t ow = 0; ow < g.out_w; ++ow) {
            const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow * g.stride + kw) -
                                      static_cast<std::ptrdiff_t>(g.padding);
            if (iw >= 0 && iw < static_cast<std::ptrdiff_t>(g.width)) dst[iw] += row[ow];
          }
        }
      }
    }
  }
}

std::size_t chunk_rows(const ConvGeometry& g) {
  const std::size_t per_row = std::max<std::size_t>(1, g.patch() * g.out_w);
  return std::clamp<std::size_t>(kColumnBudget / per_row, 1, g.out_h);
}

void require_same_shape(const Shape& a, const Shape& b, const char* op) {
  if (a != b) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_to_string(a) + " vs " +
                     shape_to_string(b));
  }
}

}  // namespace

template <typename T>
BatchNormState<T> BatchNormState<T>::make(std::size_t channels) {
  BatchNormState state;
  state.gamma = BasicTensor<T>::full({channels}, T(1), true);
  state.beta = BasicTensor<T>::zeros({channels}, true);
  state.running_mean = BasicTensor<T>::zeros({channels});
  state.running_var = BasicTensor<T>::full({channels}, T(1));
  return state;
}

template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& kernels,
                      const BasicTensor<T>& bias, std::size_t stride, std::size_t padding) {
  const ImageDims d = image_dims(input.shape(), "conv2d");
  if (kernels.rank() != 4 || kernels.dim(2) != kernels.dim(3)) {
    throw ShapeError("conv2d: kernels must be [C_out, C_in, K, K], got " +
                     shape_to_string(kernels.shape()));
  }
  if (stride == 0) throw ShapeError("conv2d: stride must be positive");
  const std::size_t out_channels = kernels.dim(0);
  const std::size_t k = kernels.dim(2);
  if (kernels.dim(1) != d.c) {
    throw ShapeError("conv2d: input has " + std::to_string(d.c) + " channels but kernels expect " +
                     std::to_string(kernels.dim(1)));
  }
  if (bias.numel() != out_channels) {
    throw ShapeError("conv2d: bias length " + std::to_string(bias.numel()) + " != " +
                     std::to_string(out_channels));
  }
  if (k > d.h + 2 * padding || k > d.w + 2 * padding) {
    throw ShapeError("conv2d: kernel " + std::to_string(k) + " exceeds padded input " +
                     std::to_string(d.h) + "x" + std::to_string(d.w));
  }
  const ConvGeometry g{d.c,
                       d.h,
                       d.w,
                       k,
                       stride,
                       padding,
                       (d.h + 2 * padding - k) / stride + 1,
                       (d.w + 2 * padding - k) / stride + 1};
  const std::size_t plane = g.out_h * g.out_w;
  const std::size_t rows_per_chunk = chunk_rows(g);
  std::vector<T> out(d.n * out_channels * plane);
  std::vector<T> col(g.patch() * rows_per_chunk * g.out_w);

  const ConstMatMap<T> w(kernels.data().data(), out_channels, g.patch());
  for (std::size_t n = 0; n < d.n; ++n) {
    const T* image = input.data().data() + n * d.c * d.h * d.w;
    T* dst = out.data() + n * out_channels * plane;
    for (std::size_t r0 = 0; r0 < g.out_h; r0 += rows_per_chunk) {
      const std::size_t rows = std::min(rows_per_chunk, g.out_h - r0);
      const std::size_t cols = rows * g.out_w;
      im2col(image, g, r0, rows, col.data());
      StridedMap<T> block(dst + r0 * g.out_w, out_channels, cols, Eigen::OuterStride<>(plane));
      block.noalias() = w * ConstMatMap<T>(col.data(), g.patch(), cols);
    }
    for (std::size_t o = 0; o < out_channels; ++o) {
      const T b = bias.data()[o];
      T* p = dst + o * plane;
      for (std::size_t i = 0; i < plane; ++i) p[i] += b;
    }
  }

  return make_result<T>(
      image_shape(d, out_channels, g.out_h, g.out_w), std::move(out), {input, kernels, bias}, "conv2d",
      [input, kernels, bias, g, d, out_channels, plane, rows_per_chunk](std::span<const T> grad_out) {
        const bool want_input = input.requires_grad();
        const bool want_kernels = kernels.requires_grad();
        if (bias.requires_grad()) {
          std::vector<T> db(out_channels, T(0));
          for (std::size_t n = 0; n < d.n; ++n) {
            for (std::size_t o = 0; o < out_channels; ++o) {
              const T* p = grad_out.data() + (n * out_channels + o) * plane;
              T acc = T(0);
              for (std::size_t i = 0; i < plane; ++i) acc += p[i];
              db[o] += acc;
            }
          }
          bias.accumulate_grad(db);
        }
        if (!want_input && !want_kernels) return;
        std::vector<T> col(g.patch() * rows_per_chunk * g.out_w);
        std::vector<T> dcol(want_input ? col.size() : 0);
        std::vector<T> dw(want_kernels ? out_channels * g.patch() : 0, T(0));
        std::vector<T> dx(want_input ? input.numel() : 0, T(0));
        const ConstMatMap<T> w(kernels.data().data(), out_channels, g.patch());
        for (std::size_t n = 0; n < d.n; ++n) {
          const T* image = input.data().data() + n * d.c * d.h * d.w;
          const T* go = grad_out.data() + n * out_channels * plane;
          for (std::size_t r0 = 0; r0 < g.out_h; r0 += rows_per_chunk) {
            const std::size_t rows = std::min(rows_per_chunk, g.out_h - r0);
            const std::size_t cols = rows * g.out_w;
            const ConstStridedMap<T> gblock(go + r0 * g.out_w, out_channels, cols,
                                            Eigen::OuterStride<>(plane));
            if (want_kernels) {
              im2col(image, g, r0, rows, col.data());
              MatMap<T>(dw.data(), out_channels, g.patch()).noalias() +=
                  gblock * ConstMatMap<T>(col.data(), g.patch(), cols).transpose();
            }
            if (want_input) {
              MatMap<T>(dcol.data(), g.patch(), cols).noalias() = w.transpose() * gblock;
              col2im_add(dcol.data(), g, r0, rows, dx.data() + n * d.c * d.h * d.w);
            }
          }
        }
        if (want_kernels) kernels.accumulate_grad(dw);
        if (want_input) input.accumulate_grad(dx);
      });
}

template <typename T>
BasicTensor<T> maxpool2d(const BasicTensor<T>& input, std::size_t pool, std::size_t stride) {
  const ImageDims d = image_dims(input.shape(), "maxpool2d");
  if (pool == 0 || stride == 0) throw ShapeError("maxpool2d: pool and stride must be positive");
  if (pool > d.h || pool > d.w) {
    throw ShapeError("maxpool2d: pool " + std::to_string(pool) + " exceeds input " +
                     std::to_string(d.h) + "x" + std::to_string(d.w));
  }
  const std::size_t oh = (d.h - pool) / stride + 1;
  const std::size_t ow = (d.w - pool) / stride + 1;
  std::vector<T> out(d.n * d.c * oh * ow);
  std::vector<std::size_t> argmax(out.size());
  const auto x = input.data();
  std::size_t o = 0;
  for (std::size_t plane = 0; plane < d.n * d.c; ++plane) {
    const std::size_t base = plane * d.h * d.w;
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j, ++o) {
        std::size_t best = base + (i * stride) * d.w + j * stride;
        for (std::size_t pi = 0; pi < pool; ++pi) {
          for (std::size_t pj = 0; pj < pool; ++pj) {
            const std::size_t idx = base + (i * stride + pi) * d.w + j * stride + pj;
            if (x[idx] > x[best]) best = idx;
          }
        }
        argmax[o] = best;
        out[o] = x[best];
      }
    }
  }
  return make_result<T>(image_shape(d, d.c, oh, ow), std::move(out), {input}, "maxpool2d",
                        [input, argmax = std::move(argmax)](std::span<const T> grad_out) {
                          std::vector<T> dx(input.numel(), T(0));
                          for (std::size_t i = 0; i < argmax.size(); ++i) dx[argmax[i]] += grad_out[i];
                          input.accumulate_grad(dx);
                        });
}

template <typename T>
BasicTensor<T> batchnorm(const BasicTensor<T>& input, BatchNormState<T>& state) {
  if (input.rank() < 2) throw ShapeError("batchnorm: input must be [N, C, ...]");
  const std::size_t n = input.dim(0);
  const std::size_t c = input.dim(1);
  if (c != state.channels()) {
    throw ShapeError("batchnorm: input has " + std::to_string(c) + " channels, state has " +
                     std::to_string(state.channels()));
  }
  const std::size_t spatial = input.numel() / (n * c);
  const std::size_t count = n * spatial;
  const auto x = input.data();
  const auto gamma = state.gamma.data();
  const auto beta = state.beta.data();

  std::vector<T> mu(c), inv_std(c);
  if (state.training) {
    auto rm = state.running_mean.mutable_data();
    auto rv = state.running_var.mutable_data();
    for (std::size_t ch = 0; ch < c; ++ch) {
      T s = T(0);
      for (std::size_t b = 0; b < n; ++b) {
        const T* p = x.data() + (b * c + ch) * spatial;
        for (std::size_t i = 0; i < spatial; ++i) s += p[i];
      }
      const T m = s / static_cast<T>(count);
      T v = T(0);
      for (std::size_t b = 0; b < n; ++b) {
        const T* p = x.data() + (b * c + ch) * spatial;
        for (std::size_t i = 0; i < spatial; ++i) v += (p[i] - m) * (p[i] - m);
      }
      v /= static_cast<T>(count);
      mu[ch] = m;
      inv_std[ch] = T(1) / std::sqrt(v + state.epsilon);
      rm[ch] = state.momentum * rm[ch] + (T(1) - state.momentum) * m;
      rv[ch] = state.momentum * rv[ch] + (T(1) - state.momentum) * v;
    }
  } else {
    const auto rm = state.running_mean.data();
    const auto rv = state.running_var.data();
    for (std::size_t ch = 0; ch < c; ++ch) {
      mu[ch] = rm[ch];
      inv_std[ch] = T(1) / std::sqrt(rv[ch] + state.epsilon);
    }
  }

  std::vector<T> normalized(input.numel());
  std::vector<T> out(input.numel());
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const std::size_t off = (b * c + ch) * spatial;
      for (std::size_t i = 0; i < spatial; ++i) {
        const T xh = (x[off + i] - mu[ch]) * inv_std[ch];
        normalized[off + i] = xh;
        out[off + i] = gamma[ch] * xh + beta[ch];
      }
    }
  }

  BasicTensor<T> g = state.gamma;
  BasicTensor<T> be = state.beta;
  const bool training = state.training;
  return make_result<T>(
      input.shape(), std::move(out), {input, g, be}, "batchnorm",
      [input, g, be, training, n, c, spatial, count, inv_std = std::move(inv_std),
       normalized = std::move(normalized)](std::span<const T> grad_out) {
        std::vector<T> dgamma(c, T(0)), dbeta(c, T(0));
        for (std::size_t b = 0; b < n; ++b) {
          for (std::size_t ch = 0; ch < c; ++ch) {
            const std::size_t off = (b * c + ch) * spatial;
            for (std::size_t i = 0; i < spatial; ++i) {
              dgamma[ch] += grad_out[off + i] * normalized[off + i];
              dbeta[ch] += grad_out[off + i];
            }
          }
        }
        if (input.requires_grad()) {
          const auto gamma = g.data();
          std::vector<T> dx(input.numel());
          for (std::size_t ch = 0; ch < c; ++ch) {
            const T scale = gamma[ch] * inv_std[ch];
            if (!training) {
              for (std::size_t b = 0; b < n; ++b) {
                const std::size_t off = (b * c + ch) * spatial;
                for (std::size_t i = 0; i < spatial; ++i) dx[off + i] = grad_out[off + i] * scale;
              }
              continue;
            }
            const T mean_dy = dbeta[ch] / static_cast<T>(count);
            const T mean_dy_xh = dgamma[ch] / static_cast<T>(count);
            for (std::size_t b = 0; b < n; ++b) {
              const std::size_t off = (b * c + ch) * spatial;
              for (std::size_t i = 0; i < spatial; ++i) {
                dx[off + i] = scale * (grad_out[off + i] - mean_dy - normalized[off + i] * mean_dy_xh);
              }
            }
          }
          input.accumulate_grad(dx);
        }
        if (g.requires_grad()) g.accumulate_grad(dgamma);
        if (be.requires_grad()) be.accumulate_grad(dbeta);
      });
}

template <typename T>
BasicTensor<T> dense(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                     const BasicTensor<T>& bias) {
  if (input.rank() != 2 || weight.rank() != 2) {
    throw ShapeError("dense: expected input [N, D_in] and weight [D_out, D_in], got " +
                     shape_to_string(input.shape()) + " and " + shape_to_string(weight.shape()));
  }
  const std::size_t n = input.dim(0);
  const std::size_t din = input.dim(1);
  const std::size_t dout = weight.dim(0);
  if (weight.dim(1) != din) {
    throw ShapeError("dense: input width " + std::to_string(din) + " != weight width " +
                     std::to_string(weight.dim(1)));
  }
  if (bias.numel() != dout) throw ShapeError("dense: bias length mismatch");
  std::vector<T> out(n * dout);
  MatMap<T> y(out.data(), n, dout);
  const ConstMatMap<T> x(input.data().data(), n, din);
  const ConstMatMap<T> w(weight.data().data(), dout, din);
  // One matrix-vector product per row, so a row's result does not depend on
  // its position in the batch.
  for (std::size_t i = 0; i < n; ++i) y.row(i).noalias() = x.row(i) * w.transpose();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dout; ++j) y(i, j) += bias.data()[j];
  }
  return make_result<T>(
      {n, dout}, std::move(out), {input, weight, bias}, "dense",
      [input, weight, bias, n, din, dout](std::span<const T> grad_out) {
        const ConstMatMap<T> gy(grad_out.data(), n, dout);
        if (input.requires_grad()) {
          std::vector<T> dx(n * din);
          MatMap<T>(dx.data(), n, din).noalias() =
              gy * ConstMatMap<T>(weight.data().data(), dout, din);
          input.accumulate_grad(dx);
        }
        if (weight.requires_grad()) {
          std::vector<T> dw(dout * din);
          MatMap<T>(dw.data(), dout, din).noalias() =
              gy.transpose() * ConstMatMap<T>(input.data().data(), n, din);
          weight.accumulate_grad(dw);
        }
        if (bias.requires_grad()) {
          std::vector<T> db(dout, T(0));
          for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < dout; ++j) db[j] += gy(i, j);
          }
          bias.accumulate_grad(db);
        }
      });
}

template <typename T>
BasicTensor<T> activation(const BasicTensor<T>& input, Activation kind) {
  const auto x = input.data();
  std::vector<T> out(x.size());
  if (kind == Activation::relu) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > T(0) ? x[i] : T(0);
    return make_result<T>(input.shape(), std::move(out), {input}, "relu",
                          [input](std::span<const T> grad_out) {
                            const auto xv = input.data();
                            std::vector<T> dx(xv.size());
                            for (std::size_t i = 0; i < xv.size(); ++i) {
                              dx[i] = xv[i] > T(0) ? grad_out[i] : T(0);
                            }
                            input.accumulate_grad(dx);
                          });
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] >= T(0)) {
      out[i] = T(1) / (T(1) + std::exp(-x[i]));
    } else {
      const T e = std::exp(x[i]);
      out[i] = e / (T(1) + e);
    }
  }
  std::vector<T> y = out;
  return make_result<T>(input.shape(), std::move(out), {input}, "sigmoid",
                        [input, y = std::move(y)](std::span<const T> grad_out) {
                          std::vector<T> dx(y.size());
                          for (std::size_t i = 0; i < y.size(); ++i) {
                            dx[i] = grad_out[i] * y[i] * (T(1) - y[i]);
                          }
                          input.accumulate_grad(dx);
                        });
}

template <typename T>
BasicTensor<T> upsample_nearest(const BasicTensor<T>& input, std::size_t factor) {
  const ImageDims d = image_dims(input.shape(), "upsample_nearest");
  if (factor == 0) throw ShapeError("upsample_nearest: factor must be positive");
  const std::size_t oh = d.h * factor;
  const std::size_t ow = d.w * factor;
  const auto x = input.data();
  std::vector<T> out(d.n * d.c * oh * ow);
  for (std::size_t p = 0; p < d.n * d.c; ++p) {
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j) {
        out[(p * oh + i) * ow + j] = x[(p * d.h + i / factor) * d.w + j / factor];
      }
    }
  }
  return make_result<T>(image_shape(d, d.c, oh, ow), std::move(out), {input}, "upsample_nearest",
                        [input, d, factor, oh, ow](std::span<const T> grad_out) {
                          std::vector<T> dx(input.numel(), T(0));
                          for (std::size_t p = 0; p < d.n * d.c; ++p) {
                            for (std::size_t i = 0; i < oh; ++i) {
                              for (std::size_t j = 0; j < ow; ++j) {
                                dx[(p * d.h + i / factor) * d.w + j / factor] +=
                                    grad_out[(p * oh + i) * ow + j];
                              }
                            }
                          }
                          input.accumulate_grad(dx);
                        });
}

template <typename T>
BasicTensor<T> reshape(const BasicTensor<T>& input, Shape shape) {
  if (shape_numel(shape) != input.numel()) {
    throw ShapeError("reshape: cannot view " + shape_to_string(input.shape()) + " as " +
                     shape_to_string(shape));
  }
  std::vector<T> out(input.data().begin(), input.data().end());
  return make_result<T>(std::move(shape), std::move(out), {input}, "reshape",
                        [input](std::span<const T> grad_out) { input.accumulate_grad(grad_out); });
}

template <typename T>
BasicTensor<T> flatten(const BasicTensor<T>& input) {
  const std::size_t n = input.dim(0);
  return reshape(input, {n, input.numel() / n});
}

template <typename T>
BasicTensor<T> concat_batch(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (a.rank() != b.rank() || !std::equal(a.shape().begin() + 1, a.shape().end(), b.shape().begin() + 1)) {
    throw ShapeError("concat_batch: incompatible shapes " + shape_to_string(a.shape()) + " and " +
                     shape_to_string(b.shape()));
  }
  Shape shape = a.shape();
  shape[0] += b.dim(0);
  std::vector<T> out;
  out.reserve(a.numel() + b.numel());
  out.insert(out.end(), a.data().begin(), a.data().end());
  out.insert(out.end(), b.data().begin(), b.data().end());
  const std::size_t split = a.numel();
  return make_result<T>(std::move(shape), std::move(out), {a, b}, "concat_batch",
                        [a, b, split](std::span<const T> grad_out) {
                          if (a.requires_grad()) a.accumulate_grad(grad_out.subspan(0, split));
                          if (b.requires_grad()) b.accumulate_grad(grad_out.subspan(split));
                        });
}

template <typename T>
BasicTensor<T> slice_batch(const BasicTensor<T>& input, std::size_t begin, std::size_t count) {
  if (input.rank() == 0 || count == 0 || begin + count > input.dim(0)) {
    throw ShapeError("slice_batch: rows [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") out of range for " +
                     shape_to_string(input.shape()));
  }
  const std::size_t row = input.numel() / input.dim(0);
  Shape shape = input.shape();
  shape[0] = count;
  std::vector<T> out(input.data().begin() + begin * row, input.data().begin() + (begin + count) * row);
  return make_result<T>(std::move(shape), std::move(out), {input}, "slice_batch",
                        [input, begin, row](std::span<const T> grad_out) {
                          std::vector<T> dx(input.numel(), T(0));
                          std::copy(grad_out.begin(), grad_out.end(), dx.begin() + begin * row);
                          input.accumulate_grad(dx);
                        });
}

template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape(a.shape(), b.shape(), "add");
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  return make_result<T>(a.shape(), std::move(out), {a, b}, "add", [a, b](std::span<const T> g) {
    if (a.requires_grad()) a.accumulate_grad(g);
    if (b.requires_grad()) b.accumulate_grad(g);
  });
}

template <typename T>
BasicTensor<T> sub(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape(a.shape(), b.shape(), "sub");
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
  return make_result<T>(a.shape(), std::move(out), {a, b}, "sub", [a, b](std::span<const T> g) {
    if (a.requires_grad()) a.accumulate_grad(g);
    if (b.requires_grad()) {
      std::vector<T> neg(g.begin(), g.end());
      for (T& v : neg) v = -v;
      b.accumulate_grad(neg);
    }
  });
}

template <typename T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape(a.shape(), b.shape(), "mul");
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
  return make_result<T>(a.shape(), std::move(out), {a, b}, "mul", [a, b](std::span<const T> g) {
    if (a.requires_grad()) {
      std::vector<T> da(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) da[i] = g[i] * b.data()[i];
      a.accumulate_grad(da);
    }
    if (b.requires_grad()) {
      std::vector<T> db(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) db[i] = g[i] * a.data()[i];
      b.accumulate_grad(db);
    }
  });
}

template <typename T>
BasicTensor<T> square(const BasicTensor<T>& input) {
  std::vector<T> out(input.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = input.data()[i] * input.data()[i];
  return make_result<T>(input.shape(), std::move(out), {input}, "square",
                        [input](std::span<const T> g) {
                          std::vector<T> dx(g.size());
                          for (std::size_t i = 0; i < g.size(); ++i) dx[i] = T(2) * input.data()[i] * g[i];
                          input.accumulate_grad(dx);
                        });
}

template <typename T>
BasicTensor<T> sum(const BasicTensor<T>& input) {
  T total = T(0);
  for (T v : input.data()) total += v;
  return make_result<T>({1}, {total}, {input}, "sum", [input](std::span<const T> g) {
    input.accumulate_grad(std::vector<T>(input.numel(), g[0]));
  });
}

template <typename T>
BasicTensor<T> mean(const BasicTensor<T>& input) {
  T total = T(0);
  for (T v : input.data()) total += v;
  const T count = static_cast<T>(input.numel());
  return make_result<T>({1}, {total / count}, {input}, "mean", [input, count](std::span<const T> g) {
    input.accumulate_grad(std::vector<T>(input.numel(), g[0] / count));
  });
}

template <typename T>
BasicTensor<T> binary_cross_entropy(const BasicTensor<T>& prediction, const BasicTensor<T>& target) {
  require_same_shape(prediction.shape(), target.shape(), "binary_cross_entropy");
  constexpr T lo = T(1e-7);
  constexpr T hi = T(1) - T(1e-7);
  const auto p = prediction.data();
  const auto t = target.data();
  T total = T(0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const T q = std::clamp(p[i], lo, hi);
    total -= t[i] * std::log(q) + (T(1) - t[i]) * std::log(T(1) - q);
  }
  const T count = static_cast<T>(p.size());
  return make_result<T>({1}, {total / count}, {prediction, target}, "binary_cross_entropy",
                        [prediction, target, count](std::span<const T> g) {
                          if (!prediction.requires_grad()) return;
                          const auto pv = prediction.data();
                          const auto tv = target.data();
                          std::vector<T> dp(pv.size(), T(0));
                          for (std::size_t i = 0; i < pv.size(); ++i) {
                            if (pv[i] < lo || pv[i] > hi) continue;
                            dp[i] = g[0] * (-tv[i] / pv[i] + (T(1) - tv[i]) / (T(1) - pv[i])) / count;
                          }
                          prediction.accumulate_grad(dp);
                        });
}

#define SDDI_INSTANTIATE_OPS(T)                                                                    \
  template struct BatchNormState<T>;                                                               \
  template BasicTensor<T> conv2d(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&, \
                                 std::size_t, std::size_t);                                        \
  template BasicTensor<T> maxpool2d(const BasicTensor<T>&, std::size_t, std::size_t);              \
  template BasicTensor<T> batchnorm(const BasicTensor<T>&, BatchNormState<T>&);                    \
  template BasicTensor<T> dense(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&); \
  template BasicTensor<T> activation(const BasicTensor<T>&, Activation);                           \
  template BasicTensor<T> upsample_nearest(const BasicTensor<T>&, std::size_t);                    \
  template BasicTensor<T> reshape(const BasicTensor<T>&, Shape);                                   \
  template BasicTensor<T> flatten(const BasicTensor<T>&);                                          \
  template BasicTensor<T> concat_batch(const BasicTensor<T>&, const BasicTensor<T>&);              \
  template BasicTensor<T> slice_batch(const BasicTensor<T>&, std::size_t, std::size_t);            \
  template BasicTensor<T> add(const BasicTensor<T>&, const BasicTensor<T>&);                       \
  template BasicTensor<T> sub(const BasicTensor<T>&, const BasicTensor<T>&);                       \
  template BasicTensor<T> mul(const BasicTensor<T>&, const BasicTensor<T>&);                       \
  template BasicTensor<T> square(const BasicTensor<T>&);                                           \
  template BasicTensor<T> sum(const BasicTensor<T>&);                                              \
  template BasicTensor<T> mean(const BasicTensor<T>&);                                             \
  template BasicTensor<T> binary_cross_entropy(const BasicTensor<T>&, const BasicTensor<T>&);

SDDI_INSTANTIATE_OPS(float)
SDDI_INSTANTIATE_OPS(double)

}  // namespace sddi
