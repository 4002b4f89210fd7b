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

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sddi/network.hpp"
#include "sddi/tensor.hpp"

namespace sddi {

enum class OptimizerKind { adam, rmsprop, adadelta, nadam };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer_kind(std::string_view name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double rho = 0.9;
  double epsilon = 1e-8;
  //! Nadam only; disabling it reduces Nadam to Adam.
  bool nesterov = true;

  //! Published defaults for `kind` (Adadelta: rho 0.95, eps 1e-6; RMSprop: rho 0.9).
  static OptimizerConfig defaults(OptimizerKind kind, double learning_rate = 5e-5);
};

/// First-order optimizer with per-parameter moment buffers.
///
/// Updates, with g the gradient and t the step count after increment:
///   adam     m = b1 m + (1-b1) g;  v = b2 v + (1-b2) g^2
///            w -= lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
///   nadam    as adam, with m_hat = b1 m / (1-b1^(t+1)) + (1-b1) g / (1-b1^t)
///   rmsprop  v = rho v + (1-rho) g^2;  w -= lr * g / (sqrt(v) + eps)
///   adadelta a = rho a + (1-rho) g^2;  d = -sqrt(u + eps) / sqrt(a + eps) * g
///            u = rho u + (1-rho) d^2;  w += lr * d
///
/// Arithmetic runs in double; buffers are stored in T so a checkpoint of a
/// float optimizer restores it exactly.
template <typename T>
class BasicOptimizer {
 public:
  explicit BasicOptimizer(OptimizerConfig config) : config_(config) {}

  //! Applies one update to every parameter using its current grad. Throws
  //! ShapeError when the parameter set changes between steps and
  //! NumericError naming the first parameter with a non-finite gradient.
  void step(const std::vector<NamedTensor<T>>& params);

  const OptimizerConfig& config() const { return config_; }
  std::uint64_t step_count() const { return step_count_; }

  //! Buffers as named tensors ("optim/<param>/<buffer>", plus "optim/step")
  //! for checkpointing, and the inverse.
  std::vector<NamedTensor<T>> state_tensors() const;
  void load_state_tensors(const std::vector<NamedTensor<T>>& tensors);

 private:
  struct Slot {
    std::string name;
    Shape shape;
    std::vector<T> first;
    std::vector<T> second;
  };

  OptimizerConfig config_;
  std::uint64_t step_count_ = 0;
  std::vector<Slot> slots_;
};

using Optimizer = BasicOptimizer<float>;

//! Evaluates `score(lr)` for every candidate and returns the best; ties go to
//! the smaller learning rate. Throws std::invalid_argument on an empty list.
double line_search_lr(const std::function<double(double)>& score, std::span<const double> candidates);

//! Default learning-rate grid probed by line_search_lr.
inline constexpr double kLineSearchGrid[] = {1e-3, 1e-4, 5e-5, 1e-5};

}  // namespace sddi
