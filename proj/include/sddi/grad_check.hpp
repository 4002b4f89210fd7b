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

#include <functional>

#include "sddi/tensor.hpp"

namespace sddi {

//! Max over coordinates of |analytic - central difference| / max(1, |analytic|)
//! for a scalar function of `x`. Runs in 64-bit.
double grad_check(const std::function<Tensor64(const Tensor64&)>& f, const Tensor64& x,
                  double eps = 1e-5);

//! Same check against a tensor captured by `f` (typically a model parameter).
//! The parameter's values are restored afterwards; its grad is overwritten.
double grad_check_param(const std::function<Tensor64()>& f, Tensor64 param, double eps = 1e-5);

}  // namespace sddi
