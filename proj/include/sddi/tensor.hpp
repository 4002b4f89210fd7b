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
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sddi/errors.hpp"

namespace sddi {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

template <typename T>
class BasicTensor;

//! Builds an op output. A Node is attached only when recording is enabled and
//! at least one input requires a gradient.
template <typename T>
BasicTensor<T> make_result(Shape shape, std::vector<T> data, std::vector<BasicTensor<T>> inputs,
                           std::string op, std::function<void(std::span<const T>)> backward);

//! One executed primitive. The backward closure reads the output gradient and
//! accumulates into the gradients of `inputs`.
template <typename T>
struct Node {
  std::string op;
  std::vector<BasicTensor<T>> inputs;
  std::function<void(std::span<const T> grad_out)> backward;
};

template <typename T>
struct TensorStorage {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;
  bool requires_grad = false;
  std::shared_ptr<Node<T>> grad_fn;
};

//! Dense row-major tensor handle. Copies share storage; use clone() for a deep copy.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() = default;
  BasicTensor(Shape shape, std::vector<T> data, bool requires_grad = false);

  static BasicTensor zeros(Shape shape, bool requires_grad = false);
  static BasicTensor full(Shape shape, T value, bool requires_grad = false);
  static BasicTensor scalar(T value, bool requires_grad = false);

  bool defined() const { return static_cast<bool>(impl_); }
  const Shape& shape() const { return impl_->shape; }
  std::size_t rank() const { return impl_->shape.size(); }
  std::size_t dim(std::size_t axis) const { return impl_->shape.at(axis); }
  std::size_t numel() const { return impl_->data.size(); }

  std::span<const T> data() const { return impl_->data; }
  //! In-place access for parameter updates and buffer state; never call on a
  //! tensor whose value a recorded graph still depends on.
  std::span<T> mutable_data() { return impl_->data; }
  T item() const;

  bool requires_grad() const { return impl_->requires_grad; }
  void set_requires_grad(bool value) { impl_->requires_grad = value; }
  bool has_grad() const { return !impl_->grad.empty(); }
  std::span<const T> grad() const { return impl_->grad; }
  std::span<T> mutable_grad();
  void zero_grad();
  // Handle-const: gradient storage is shared, like a shared_ptr pointee.
  // No-op unless requires_grad().
  void accumulate_grad(std::span<const T> delta) const;
  std::span<T> grad_buffer() const;

  const std::shared_ptr<Node<T>>& grad_fn() const { return impl_->grad_fn; }
  bool is_leaf() const { return !impl_->grad_fn; }

  BasicTensor clone() const;
  //! Same values, no graph history, requires_grad=false.
  BasicTensor detach() const;
  bool same_storage(const BasicTensor& other) const { return impl_ == other.impl_; }
  const TensorStorage<T>* storage() const { return impl_.get(); }

 private:
  std::shared_ptr<TensorStorage<T>> impl_;

  template <typename U>
  friend BasicTensor<U> make_result(Shape, std::vector<U>, std::vector<BasicTensor<U>>, std::string,
                                    std::function<void(std::span<const U>)>);
};

using Tensor = BasicTensor<float>;
using Tensor64 = BasicTensor<double>;

//! Gradient recording switch for the current thread.
class GradMode {
 public:
  static bool enabled();
  static void set_enabled(bool enabled);
};

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

//! Topologically ordered record of the primitives that produced a tensor.
template <typename T>
class Graph {
 public:
  static Graph build(const BasicTensor<T>& root);

  //! Outputs of recorded primitives, inputs before consumers.
  const std::vector<BasicTensor<T>>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }

  //! Runs each node's backward exactly once, in reverse topological order.
  //! Returns the number of nodes visited.
  std::size_t run_backward(const BasicTensor<T>& root);

 private:
  std::vector<BasicTensor<T>> nodes_;
};

//! Populates grads of every requires_grad tensor reachable from `loss`.
//! Throws ShapeError when `loss` is not a single element.
template <typename T>
void backward(const BasicTensor<T>& loss);

}  // namespace sddi
