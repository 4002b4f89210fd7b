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

#include <string>
#include <string_view>

#include "sddi/tensor.hpp"

namespace sddi {

enum class DistanceKind { euclidean, manhattan, hellinger, jaccard };

std::string_view to_string(DistanceKind kind);
//! Throws ConfigError on an unknown name.
DistanceKind parse_distance_kind(std::string_view name);

struct ContrastiveConfig {
  double margin = 1.0;
  DistanceKind metric = DistanceKind::euclidean;
};

//! Guards the normalizers of the probability-style metrics.
inline constexpr double kDistanceEpsilon = 1e-8;

/// Row-wise distance between embeddings e1, e2 of shape [N, D] (or [D]),
/// returning [N] (or [1]).
///
/// - euclidean: ||e1 - e2||_2 (unsquared)
/// - manhattan: sum |e1_i - e2_i|
/// - hellinger: sqrt(2 * sum (sqrt(p1_i) - sqrt(p2_i))^2)
/// - jaccard:   sum min(p1_i, p2_i) / sum max(p1_i, p2_i)
///
/// where p = relu(e) / mean(relu(e)). Hellinger and jaccard add
/// kDistanceEpsilon to the normalizer, under the square roots, and to both
/// sums of the ratio, so all-zero embeddings give 0 and 1 respectively.
template <typename T>
BasicTensor<T> distance(DistanceKind kind, const BasicTensor<T>& e1, const BasicTensor<T>& e2);

/// Mean over the batch of (1-Y)/2 * D^2 + Y/2 * max(0, m - D)^2.
/// Y=1 marks an interacting pair, which is pushed beyond the margin.
/// Throws std::invalid_argument on labels other than 0 or 1.
template <typename T>
BasicTensor<T> contrastive_loss(const ContrastiveConfig& config, const BasicTensor<T>& distances,
                                const BasicTensor<T>& labels);

}  // namespace sddi
