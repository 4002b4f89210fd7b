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

#include "sddi/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace sddi {

double grad_check_param(const std::function<Tensor64()>& f, Tensor64 param, double eps) {
  const bool had_requires_grad = param.requires_grad();
  param.set_requires_grad(true);
  param.zero_grad();
  backward(f());
  const std::vector<double> analytic(param.grad().begin(), param.grad().end());

  double worst = 0.0;
  auto values = param.mutable_data();
  NoGradGuard no_grad;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double saved = values[i];
    values[i] = saved + eps;
    const double plus = f().item();
    values[i] = saved - eps;
    const double minus = f().item();
    values[i] = saved;
    const double numeric = (plus - minus) / (2.0 * eps);
    worst = std::max(worst, std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(analytic[i])));
  }
  param.set_requires_grad(had_requires_grad);
  return worst;
}

double grad_check(const std::function<Tensor64(const Tensor64&)>& f, const Tensor64& x, double eps) {
  Tensor64 input = x.detach();
  input.set_requires_grad(true);
  return grad_check_param([&] { return f(input); }, input, eps);
}

}  // namespace sddi
