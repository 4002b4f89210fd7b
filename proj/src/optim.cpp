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

#include "sddi/optim.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace sddi {

std::string_view to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::adam: return "adam";
    case OptimizerKind::rmsprop: return "rmsprop";
    case OptimizerKind::adadelta: return "adadelta";
    case OptimizerKind::nadam: return "nadam";
  }
  return "unknown";
}

OptimizerKind parse_optimizer_kind(std::string_view name) {
  for (auto kind : {OptimizerKind::adam, OptimizerKind::rmsprop, OptimizerKind::adadelta,
                    OptimizerKind::nadam}) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("unknown optimizer '" + std::string(name) + "'");
}

OptimizerConfig OptimizerConfig::defaults(OptimizerKind kind, double learning_rate) {
  OptimizerConfig config;
  config.kind = kind;
  config.learning_rate = learning_rate;
  switch (kind) {
    case OptimizerKind::adam:
    case OptimizerKind::nadam:
      config.epsilon = 1e-8;
      break;
    case OptimizerKind::rmsprop:
      config.rho = 0.9;
      config.epsilon = 1e-8;
      break;
    case OptimizerKind::adadelta:
      config.rho = 0.95;
      config.epsilon = 1e-6;
      break;
  }
  return config;
}

template <typename T>
void BasicOptimizer<T>::step(const std::vector<NamedTensor<T>>& params) {
  if (slots_.empty() && step_count_ == 0) {
    for (const auto& p : params) {
      slots_.push_back({p.name, p.tensor.shape(), std::vector<T>(p.tensor.numel(), T(0)),
                        std::vector<T>(p.tensor.numel(), T(0))});
    }
  }
  if (slots_.size() != params.size()) {
    throw ShapeError("optimizer: bound to " + std::to_string(slots_.size()) + " parameters, got " +
                     std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].name != slots_[i].name || params[i].tensor.shape() != slots_[i].shape) {
      throw ShapeError("optimizer: parameter '" + params[i].name + "' " +
                       shape_to_string(params[i].tensor.shape()) + " does not match state '" +
                       slots_[i].name + "' " + shape_to_string(slots_[i].shape));
    }
    for (T g : params[i].tensor.grad()) {
      if (!std::isfinite(static_cast<double>(g))) {
        throw NumericError("optimizer: non-finite gradient in parameter '" + params[i].name + "'");
      }
    }
  }

  ++step_count_;
  const OptimizerConfig& c = config_;
  const double t = static_cast<double>(step_count_);
  const double bias1 = 1.0 - std::pow(c.beta1, t);
  const double bias1_next = 1.0 - std::pow(c.beta1, t + 1.0);
  const double bias2 = 1.0 - std::pow(c.beta2, t);

  for (std::size_t i = 0; i < params.size(); ++i) {
    BasicTensor<T> param = params[i].tensor;
    const auto grad = param.grad();
    auto w = param.mutable_data();
    auto& first = slots_[i].first;
    auto& second = slots_[i].second;
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double g = grad.empty() ? 0.0 : static_cast<double>(grad[k]);
      double delta = 0.0;
      switch (c.kind) {
        case OptimizerKind::adam:
        case OptimizerKind::nadam: {
          const double m = c.beta1 * first[k] + (1.0 - c.beta1) * g;
          const double v = c.beta2 * second[k] + (1.0 - c.beta2) * g * g;
          first[k] = static_cast<T>(m);
          second[k] = static_cast<T>(v);
          double m_hat = m / bias1;
          if (c.kind == OptimizerKind::nadam && c.nesterov) {
            m_hat = c.beta1 * m / bias1_next + (1.0 - c.beta1) * g / bias1;
          }
          delta = -c.learning_rate * m_hat / (std::sqrt(v / bias2) + c.epsilon);
          break;
        }
        case OptimizerKind::rmsprop: {
          const double v = c.rho * second[k] + (1.0 - c.rho) * g * g;
          second[k] = static_cast<T>(v);
          delta = -c.learning_rate * g / (std::sqrt(v) + c.epsilon);
          break;
        }
        case OptimizerKind::adadelta: {
          const double acc_grad = c.rho * second[k] + (1.0 - c.rho) * g * g;
          const double update = -std::sqrt(first[k] + c.epsilon) / std::sqrt(acc_grad + c.epsilon) * g;
          second[k] = static_cast<T>(acc_grad);
          first[k] = static_cast<T>(c.rho * first[k] + (1.0 - c.rho) * update * update);
          delta = c.learning_rate * update;
          break;
        }
      }
      w[k] = static_cast<T>(static_cast<double>(w[k]) + delta);
    }
  }
}

template <typename T>
std::vector<NamedTensor<T>> BasicOptimizer<T>::state_tensors() const {
  std::vector<NamedTensor<T>> out;
  out.push_back({"optim/step", BasicTensor<T>::scalar(static_cast<T>(step_count_))});
  for (const Slot& slot : slots_) {
    out.push_back({"optim/" + slot.name + "/first", BasicTensor<T>(slot.shape, slot.first)});
    out.push_back({"optim/" + slot.name + "/second", BasicTensor<T>(slot.shape, slot.second)});
  }
  return out;
}

template <typename T>
void BasicOptimizer<T>::load_state_tensors(const std::vector<NamedTensor<T>>& tensors) {
  std::map<std::string, BasicTensor<T>> by_name;
  for (const auto& t : tensors) by_name.emplace(t.name, t.tensor);
  auto step = by_name.find("optim/step");
  if (step == by_name.end()) throw FormatError("optimizer state: missing optim/step");
  step_count_ = static_cast<std::uint64_t>(step->second.item());
  slots_.clear();
  // Slots appear as consecutive first/second pairs in table order.
  const std::string prefix = "optim/";
  const std::string suffix = "/first";
  for (const auto& t : tensors) {
    if (t.name.rfind(prefix, 0) != 0 || t.name.size() <= prefix.size() + suffix.size() ||
        t.name.compare(t.name.size() - suffix.size(), suffix.size(), suffix) != 0) {
      continue;
    }
    const std::string param = t.name.substr(prefix.size(), t.name.size() - prefix.size() - suffix.size());
    auto second = by_name.find(prefix + param + "/second");
    if (second == by_name.end()) throw FormatError("optimizer state: missing second moment of " + param);
    if (second->second.shape() != t.tensor.shape()) {
      throw FormatError("optimizer state: buffer shapes differ for " + param);
    }
    slots_.push_back({param, t.tensor.shape(),
                      std::vector<T>(t.tensor.data().begin(), t.tensor.data().end()),
                      std::vector<T>(second->second.data().begin(), second->second.data().end())});
  }
}

template class BasicOptimizer<float>;
template class BasicOptimizer<double>;

double line_search_lr(const std::function<double(double)>& score, std::span<const double> candidates) {
  if (candidates.empty()) throw std::invalid_argument("line_search_lr: no candidates");
  double best_lr = candidates[0];
  double best_score = score(best_lr);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double lr = candidates[i];
    const double s = score(lr);
    if (s > best_score || (s == best_score && lr < best_lr)) {
      best_score = s;
      best_lr = lr;
    }
  }
  return best_lr;
}

}  // namespace sddi
