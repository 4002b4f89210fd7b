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

// Differentiable primitives. Image tensors are NCHW; a rank-3 CHW input is
// accepted wherever a batch of one makes sense and the result keeps rank 3.

#pragma once

#include <cstddef>

#include "sddi/tensor.hpp"

namespace sddi {

enum class Activation { relu, sigmoid };

//! Per-channel batch normalization parameters and running statistics.
template <typename T>
struct BatchNormState {
  BasicTensor<T> gamma;
  BasicTensor<T> beta;
  BasicTensor<T> running_mean;
  BasicTensor<T> running_var;
  T momentum = T(0.9);
  T epsilon = T(1e-5);
  bool training = true;

  static BatchNormState make(std::size_t channels);
  std::size_t channels() const { return gamma.numel(); }
};

//! Cross-correlation with zero padding. Output spatial size is
//! floor((H + 2*padding - K) / stride) + 1.
template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& kernels,
                      const BasicTensor<T>& bias, std::size_t stride = 1, std::size_t padding = 0);

//! Gradient flows to the first maximum in row-major order within each window.
template <typename T>
BasicTensor<T> maxpool2d(const BasicTensor<T>& input, std::size_t pool, std::size_t stride);

//! Training mode normalizes by biased batch statistics over (N, H, W) and
//! updates the running statistics; inference mode reads running statistics only.
template <typename T>
BasicTensor<T> batchnorm(const BasicTensor<T>& input, BatchNormState<T>& state);

//! input [N, D_in], weight [D_out, D_in], bias [D_out] -> [N, D_out].
template <typename T>
BasicTensor<T> dense(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                     const BasicTensor<T>& bias);

template <typename T>
BasicTensor<T> activation(const BasicTensor<T>& input, Activation kind);

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& input) {
  return activation(input, Activation::relu);
}

template <typename T>
BasicTensor<T> sigmoid(const BasicTensor<T>& input) {
  return activation(input, Activation::sigmoid);
}

template <typename T>
BasicTensor<T> upsample_nearest(const BasicTensor<T>& input, std::size_t factor);

template <typename T>
BasicTensor<T> reshape(const BasicTensor<T>& input, Shape shape);

//! [N, ...] -> [N, prod(...)]
template <typename T>
BasicTensor<T> flatten(const BasicTensor<T>& input);

//! Concatenates along axis 0.
template <typename T>
BasicTensor<T> concat_batch(const BasicTensor<T>& a, const BasicTensor<T>& b);

//! Rows [begin, begin + count) along axis 0.
template <typename T>
BasicTensor<T> slice_batch(const BasicTensor<T>& input, std::size_t begin, std::size_t count);

template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b);

template <typename T>
BasicTensor<T> sub(const BasicTensor<T>& a, const BasicTensor<T>& b);

template <typename T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b);

template <typename T>
BasicTensor<T> square(const BasicTensor<T>& input);

template <typename T>
BasicTensor<T> sum(const BasicTensor<T>& input);

template <typename T>
BasicTensor<T> mean(const BasicTensor<T>& input);

//! Mean binary cross-entropy of predictions against fixed targets in [0,1].
//! Predictions are clamped to [1e-7, 1-1e-7].
template <typename T>
BasicTensor<T> binary_cross_entropy(const BasicTensor<T>& prediction, const BasicTensor<T>& target);

}  // namespace sddi
