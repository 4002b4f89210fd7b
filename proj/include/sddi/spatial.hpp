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

// Grid generator and sampler of the spatial transformer.
//
// Coordinates are normalized to [-1, 1] with -1 and +1 at the centers of the
// first and last pixels. Sampling outside the image reads zeros.

#pragma once

#include <cstddef>

#include "sddi/tensor.hpp"

namespace sddi {

//! theta [N, 2, 3] -> source coordinates [N, out_h, out_w, 2] stored as (x, y).
//! source = theta * (x_t, y_t, 1) over the normalized target grid.
template <typename T>
BasicTensor<T> affine_grid(const BasicTensor<T>& theta, std::size_t out_h, std::size_t out_w);

//! image [N, C, H, W], grid [N, out_h, out_w, 2] -> [N, C, out_h, out_w].
//! Differentiable w.r.t. both image and grid.
template <typename T>
BasicTensor<T> bilinear_sample(const BasicTensor<T>& image, const BasicTensor<T>& grid);

}  // namespace sddi
