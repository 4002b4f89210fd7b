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

#include "sddi/tensor.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>
#include <utility>

namespace sddi {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ',';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

namespace {
thread_local bool grad_mode_enabled = true;
}  // namespace

bool GradMode::enabled() { return grad_mode_enabled; }
void GradMode::set_enabled(bool enabled) { grad_mode_enabled = enabled; }

NoGradGuard::NoGradGuard() : previous_(GradMode::enabled()) { GradMode::set_enabled(false); }
NoGradGuard::~NoGradGuard() { GradMode::set_enabled(previous_); }

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, std::vector<T> data, bool requires_grad)
    : impl_(std::make_shared<TensorStorage<T>>()) {
  for (std::size_t d : shape) {
    if (d == 0) throw ShapeError("tensor dimension must be positive, got " + shape_to_string(shape));
  }
  if (shape_numel(shape) != data.size()) {
    throw ShapeError("tensor data length " + std::to_string(data.size()) + " does not match shape " +
                     shape_to_string(shape));
  }
  impl_->shape = std::move(shape);
  impl_->data = std::move(data);
  impl_->requires_grad = requires_grad;
}

template <typename T>
BasicTensor<T> BasicTensor<T>::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), T(0), requires_grad);
}

template <typename T>
BasicTensor<T> BasicTensor<T>::full(Shape shape, T value, bool requires_grad) {
  const std::size_t n = shape_numel(shape);
  return BasicTensor(std::move(shape), std::vector<T>(n, value), requires_grad);
}

template <typename T>
BasicTensor<T> BasicTensor<T>::scalar(T value, bool requires_grad) {
  return BasicTensor(Shape{1}, std::vector<T>{value}, requires_grad);
}

template <typename T>
T BasicTensor<T>::item() const {
  if (numel() != 1) throw ShapeError("item() on tensor of shape " + shape_to_string(shape()));
  return impl_->data[0];
}

template <typename T>
std::span<T> BasicTensor<T>::mutable_grad() {
  if (impl_->grad.size() != impl_->data.size()) impl_->grad.assign(impl_->data.size(), T(0));
  return impl_->grad;
}

template <typename T>
void BasicTensor<T>::zero_grad() {
  std::fill(impl_->grad.begin(), impl_->grad.end(), T(0));
}

template <typename T>
std::span<T> BasicTensor<T>::grad_buffer() const {
  if (impl_->grad.size() != impl_->data.size()) impl_->grad.assign(impl_->data.size(), T(0));
  return impl_->grad;
}

template <typename T>
void BasicTensor<T>::accumulate_grad(std::span<const T> delta) const {
  if (!impl_->requires_grad) return;
  auto g = grad_buffer();
  if (delta.size() != g.size()) throw ShapeError("gradient length mismatch");
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += delta[i];
}

template <typename T>
BasicTensor<T> BasicTensor<T>::clone() const {
  BasicTensor copy(impl_->shape, impl_->data, impl_->requires_grad);
  copy.impl_->grad = impl_->grad;
  return copy;
}

template <typename T>
BasicTensor<T> BasicTensor<T>::detach() const {
  return BasicTensor(impl_->shape, impl_->data, false);
}

template <typename T>
BasicTensor<T> make_result(Shape shape, std::vector<T> data, std::vector<BasicTensor<T>> inputs,
                           std::string op, std::function<void(std::span<const T>)> backward) {
  BasicTensor<T> out(std::move(shape), std::move(data));
  if (!GradMode::enabled()) return out;
  const bool needs_grad = std::any_of(inputs.begin(), inputs.end(),
                                      [](const BasicTensor<T>& t) { return t.requires_grad(); });
  if (!needs_grad) return out;
  auto node = std::make_shared<Node<T>>();
  node->op = std::move(op);
  node->inputs = std::move(inputs);
  node->backward = std::move(backward);
  out.impl_->requires_grad = true;
  out.impl_->grad_fn = std::move(node);
  return out;
}

template <typename T>
Graph<T> Graph<T>::build(const BasicTensor<T>& root) {
  Graph graph;
  if (!root.grad_fn()) return graph;
  // Iterative post-order DFS; recursion would overflow on long chains.
  std::unordered_set<const TensorStorage<T>*> visited;
  std::vector<std::pair<BasicTensor<T>, std::size_t>> stack;
  stack.emplace_back(root, 0);
  visited.insert(root.storage());
  while (!stack.empty()) {
    auto& [tensor, next_input] = stack.back();
    const auto& node = tensor.grad_fn();
    if (next_input < node->inputs.size()) {
      const BasicTensor<T>& input = node->inputs[next_input++];
      if (input.grad_fn() && visited.insert(input.storage()).second) stack.emplace_back(input, 0);
      continue;
    }
    graph.nodes_.push_back(tensor);
    stack.pop_back();
  }
  return graph;
}

template <typename T>
std::size_t Graph<T>::run_backward(const BasicTensor<T>& root) {
  // Interior gradients are scratch space for this traversal.
  for (auto& t : nodes_) {
    if (!t.same_storage(root)) t.zero_grad();
  }
  std::size_t visited = 0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    BasicTensor<T>& out = *it;
    if (out.has_grad()) out.grad_fn()->backward(out.grad());
    ++visited;
  }
  return visited;
}

template <typename T>
void backward(const BasicTensor<T>& loss) {
  if (!loss.defined() || loss.numel() != 1) {
    throw ShapeError("backward() requires a scalar loss, got shape " +
                     (loss.defined() ? shape_to_string(loss.shape()) : std::string("<undefined>")));
  }
  if (!loss.requires_grad()) return;
  auto root = loss;
  root.mutable_grad()[0] = T(1);
  if (!root.grad_fn()) return;
  Graph<T>::build(root).run_backward(root);
}

#define SDDI_INSTANTIATE_TENSOR(T)                                                               \
  template class BasicTensor<T>;                                                                 \
  template class Graph<T>;                                                                       \
  template BasicTensor<T> make_result<T>(Shape, std::vector<T>, std::vector<BasicTensor<T>>,     \
                                         std::string, std::function<void(std::span<const T>)>); \
  template void backward<T>(const BasicTensor<T>&);

SDDI_INSTANTIATE_TENSOR(float)
SDDI_INSTANTIATE_TENSOR(double)

}  // namespace sddi
