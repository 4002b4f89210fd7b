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

#include "sddi/objective.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace sddi {

std::string_view to_string(DistanceKind kind) {
  switch (kind) {
    case DistanceKind::euclidean: return "euclidean";
    case DistanceKind::manhattan: return "manhattan";
    case DistanceKind::hellinger: return "hellinger";
    case DistanceKind::jaccard: return "jaccard";
  }
  return "unknown";
}

DistanceKind parse_distance_kind(std::string_view name) {
  for (auto kind : {DistanceKind::euclidean, DistanceKind::manhattan, DistanceKind::hellinger,
                    DistanceKind::jaccard}) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("unknown distance metric '" + std::string(name) + "'");
}

namespace {

// p = relu(e) / (mean(relu(e)) + eps) for one row.
template <typename T>
struct Normalized {
  std::vector<T> clamped;
  std::vector<T> p;
  T scale;  // mean(clamped) + eps
};

template <typename T>
Normalized<T> normalize_row(const T* e, std::size_t dim) {
  Normalized<T> out{std::vector<T>(dim), std::vector<T>(dim), T(0)};
  T total = T(0);
  for (std::size_t i = 0; i < dim; ++i) {
    out.clamped[i] = e[i] > T(0) ? e[i] : T(0);
    total += out.clamped[i];
  }
  out.scale = total / static_cast<T>(dim) + static_cast<T>(kDistanceEpsilon);
  for (std::size_t i = 0; i < dim; ++i) out.p[i] = out.clamped[i] / out.scale;
  return out;
}

// Chains a gradient w.r.t. p back to the raw embedding row.
template <typename T>
void normalize_backward(const Normalized<T>& n, const T* e, const std::vector<T>& grad_p, T* grad_e) {
  const std::size_t dim = n.p.size();
  T weighted = T(0);
  for (std::size_t i = 0; i < dim; ++i) weighted += grad_p[i] * n.clamped[i];
  const T correction = weighted / (n.scale * n.scale * static_cast<T>(dim));
  for (std::size_t k = 0; k < dim; ++k) {
    const T grad_c = grad_p[k] / n.scale - correction;
    grad_e[k] += e[k] > T(0) ? grad_c : T(0);
  }
}

template <typename T>
T sign(T v) {
  return v > T(0) ? T(1) : (v < T(0) ? T(-1) : T(0));
}

}  // namespace

template <typename T>
BasicTensor<T> distance(DistanceKind kind, const BasicTensor<T>& e1, const BasicTensor<T>& e2) {
  if (e1.shape() != e2.shape() || e1.rank() < 1 || e1.rank() > 2) {
    throw ShapeError("distance: embeddings must share shape [N, D] or [D], got " +
                     shape_to_string(e1.shape()) + " and " + shape_to_string(e2.shape()));
  }
  const std::size_t rows = e1.rank() == 2 ? e1.dim(0) : 1;
  const std::size_t dim = e1.numel() / rows;
  const T eps = static_cast<T>(kDistanceEpsilon);
  const auto a = e1.data();
  const auto b = e2.data();
  std::vector<T> out(rows);

  for (std::size_t r = 0; r < rows; ++r) {
    const T* x = a.data() + r * dim;
    const T* y = b.data() + r * dim;
    switch (kind) {
      case DistanceKind::euclidean: {
        T s = T(0);
        for (std::size_t i = 0; i < dim; ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
        out[r] = std::sqrt(s);
        break;
      }
      case DistanceKind::manhattan: {
        T s = T(0);
        for (std::size_t i = 0; i < dim; ++i) s += std::abs(x[i] - y[i]);
        out[r] = s;
        break;
      }
      case DistanceKind::hellinger: {
        const auto px = normalize_row(x, dim);
        const auto py = normalize_row(y, dim);
        T s = T(0);
        for (std::size_t i = 0; i < dim; ++i) {
          const T diff = std::sqrt(px.p[i] + eps) - std::sqrt(py.p[i] + eps);
          s += diff * diff;
        }
        out[r] = std::sqrt(T(2) * s);
        break;
      }
      case DistanceKind::jaccard: {
        const auto px = normalize_row(x, dim);
        const auto py = normalize_row(y, dim);
        T lo = T(0), hi = T(0);
        for (std::size_t i = 0; i < dim; ++i) {
          lo += std::min(px.p[i], py.p[i]);
          hi += std::max(px.p[i], py.p[i]);
        }
        out[r] = (lo + eps) / (hi + eps);
        break;
      }
    }
  }

  Shape shape{rows};
  std::vector<T> value = out;
  return make_result<T>(
      std::move(shape), std::move(out), {e1, e2}, "distance",
      [kind, e1, e2, rows, dim, eps, value = std::move(value)](std::span<const T> grad_out) {
        const auto a = e1.data();
        const auto b = e2.data();
        std::vector<T> ga(e1.numel(), T(0));
        std::vector<T> gb(e2.numel(), T(0));
        for (std::size_t r = 0; r < rows; ++r) {
          const T* x = a.data() + r * dim;
          const T* y = b.data() + r * dim;
          T* gx = ga.data() + r * dim;
          T* gy = gb.data() + r * dim;
          const T g = grad_out[r];
          switch (kind) {
            case DistanceKind::euclidean: {
              if (value[r] == T(0)) break;
              for (std::size_t i = 0; i < dim; ++i) {
                const T d = g * (x[i] - y[i]) / value[r];
                gx[i] += d;
                gy[i] -= d;
              }
              break;
            }
            case DistanceKind::manhattan: {
              for (std::size_t i = 0; i < dim; ++i) {
                const T d = g * sign(x[i] - y[i]);
                gx[i] += d;
                gy[i] -= d;
              }
              break;
            }
            case DistanceKind::hellinger: {
              if (value[r] == T(0)) break;
              const auto px = normalize_row(x, dim);
              const auto py = normalize_row(y, dim);
              // d = sqrt(2S) so dd/dS = 1/d.
              const T dS = g / value[r];
              std::vector<T> gpx(dim), gpy(dim);
              for (std::size_t i = 0; i < dim; ++i) {
                const T qx = std::sqrt(px.p[i] + eps);
                const T qy = std::sqrt(py.p[i] + eps);
                const T dq = dS * T(2) * (qx - qy);
                gpx[i] = dq / (T(2) * qx);
                gpy[i] = -dq / (T(2) * qy);
              }
              normalize_backward(px, x, gpx, gx);
              normalize_backward(py, y, gpy, gy);
              break;
            }
            case DistanceKind::jaccard: {
              const auto px = normalize_row(x, dim);
              const auto py = normalize_row(y, dim);
              T lo = eps, hi = eps;
              for (std::size_t i = 0; i < dim; ++i) {
                lo += std::min(px.p[i], py.p[i]);
                hi += std::max(px.p[i], py.p[i]);
              }
              const T d_lo = g / hi;
              const T d_hi = -g * lo / (hi * hi);
              std::vector<T> gpx(dim), gpy(dim);
              for (std::size_t i = 0; i < dim; ++i) {
                if (px.p[i] < py.p[i]) {
                  gpx[i] = d_lo;
                  gpy[i] = d_hi;
                } else if (px.p[i] > py.p[i]) {
                  gpx[i] = d_hi;
                  gpy[i] = d_lo;
                } else {
                  gpx[i] = gpy[i] = T(0.5) * (d_lo + d_hi);
                }
              }
              normalize_backward(px, x, gpx, gx);
              normalize_backward(py, y, gpy, gy);
              break;
            }
          }
        }
        e1.accumulate_grad(ga);
        e2.accumulate_grad(gb);
      });
}

template <typename T>
BasicTensor<T> contrastive_loss(const ContrastiveConfig& config, const BasicTensor<T>& distances,
                                const BasicTensor<T>& labels) {
  if (config.margin < 0.0) throw std::invalid_argument("contrastive_loss: margin must be >= 0");
  if (distances.numel() != labels.numel() || distances.numel() == 0) {
    throw ShapeError("contrastive_loss: " + std::to_string(distances.numel()) + " distances vs " +
                     std::to_string(labels.numel()) + " labels");
  }
  const auto d = distances.data();
  const auto y = labels.data();
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != T(0) && y[i] != T(1)) {
      throw std::invalid_argument("contrastive_loss: label at index " + std::to_string(i) +
                                  " is not binary");
    }
  }
  const T m = static_cast<T>(config.margin);
  const T n = static_cast<T>(d.size());
  T total = T(0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const T hinge = std::max(T(0), m - d[i]);
    total += (T(1) - y[i]) / T(2) * d[i] * d[i] + y[i] / T(2) * hinge * hinge;
  }
  return make_result<T>({1}, {total / n}, {distances, labels}, "contrastive_loss",
                        [distances, labels, m, n](std::span<const T> g) {
                          const auto dv = distances.data();
                          const auto yv = labels.data();
                          std::vector<T> grad(dv.size());
                          for (std::size_t i = 0; i < dv.size(); ++i) {
                            const T hinge = std::max(T(0), m - dv[i]);
                            grad[i] = g[0] * ((T(1) - yv[i]) * dv[i] - yv[i] * hinge) / n;
                          }
                          distances.accumulate_grad(grad);
                        });
}

#define SDDI_INSTANTIATE_OBJECTIVE(T)                                                       \
  template BasicTensor<T> distance(DistanceKind, const BasicTensor<T>&, const BasicTensor<T>&); \
  template BasicTensor<T> contrastive_loss(const ContrastiveConfig&, const BasicTensor<T>&,  \
                                           const BasicTensor<T>&);

SDDI_INSTANTIATE_OBJECTIVE(float)
SDDI_INSTANTIATE_OBJECTIVE(double)

}  // namespace sddi
