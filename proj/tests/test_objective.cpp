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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "sddi/objective.hpp"
#include "sddi/ops.hpp"
#include "test_support.hpp"

namespace sddi {
namespace {

using testing::random_tensor;

// Hand formulas over plain vectors, independent of the tensor code.
double ref_distance(DistanceKind kind, const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  auto normalized = [n](const std::vector<double>& e) {
    std::vector<double> p(n);
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = std::max(0.0, e[i]);
      m += p[i];
    }
    m /= static_cast<double>(n);
    for (auto& v : p) v /= (m + kDistanceEpsilon);
    return p;
  };
  double acc = 0.0;
  switch (kind) {
    case DistanceKind::euclidean:
      for (std::size_t i = 0; i < n; ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
      return std::sqrt(acc);
    case DistanceKind::manhattan:
      for (std::size_t i = 0; i < n; ++i) acc += std::abs(a[i] - b[i]);
      return acc;
    case DistanceKind::hellinger: {
      const auto p = normalized(a), q = normalized(b);
      for (std::size_t i = 0; i < n; ++i) {
        const double d = std::sqrt(p[i] + kDistanceEpsilon) - std::sqrt(q[i] + kDistanceEpsilon);
        acc += d * d;
      }
      return std::sqrt(2.0 * acc);
    }
    case DistanceKind::jaccard: {
      const auto p = normalized(a), q = normalized(b);
      double lo = 0.0, hi = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        lo += std::min(p[i], q[i]);
        hi += std::max(p[i], q[i]);
      }
      return (lo + kDistanceEpsilon) / (hi + kDistanceEpsilon);
    }
  }
  return 0.0;
}

double loss_of(double y, double d, double m) {
  const ContrastiveConfig config{m, DistanceKind::euclidean};
  return contrastive_loss(config, Tensor64({1}, {d}), Tensor64({1}, {y})).item();
}

double ref_loss(double y, double d, double m) {
  const double hinge = std::max(0.0, m - d);
  return 0.5 * (1.0 - y) * d * d + 0.5 * y * hinge * hinge;
}

TEST(Distance, IdenticalInputs) {
  Tensor64 e({1, 4}, {0.3, 0.0, 1.2, 0.5});
  EXPECT_EQ(distance(DistanceKind::euclidean, e, e).item(), 0.0);
  EXPECT_EQ(distance(DistanceKind::manhattan, e, e).item(), 0.0);
  EXPECT_NEAR(distance(DistanceKind::hellinger, e, e).item(), 0.0, 1e-12);
  EXPECT_NEAR(distance(DistanceKind::jaccard, e, e).item(), 1.0, 1e-7);
}

TEST(Distance, UnitVectors) {
  Tensor64 a({2}, {1.0, 0.0});
  Tensor64 b({2}, {0.0, 1.0});
  EXPECT_DOUBLE_EQ(distance(DistanceKind::manhattan, a, b).item(), 2.0);
  EXPECT_DOUBLE_EQ(distance(DistanceKind::euclidean, a, b).item(), std::sqrt(2.0));
}

TEST(Distance, MatchesHandFormulasAndIsSymmetric) {
  Rng rng(11);
  for (DistanceKind kind :
       {DistanceKind::euclidean, DistanceKind::manhattan, DistanceKind::hellinger, DistanceKind::jaccard}) {
    for (int trial = 0; trial < 20; ++trial) {
      Tensor64 a = random_tensor({4, 7}, rng);
      Tensor64 b = random_tensor({4, 7}, rng);
      const auto ab = distance(kind, a, b), ba = distance(kind, b, a);
      ASSERT_EQ(ab.shape(), Shape({4}));
      for (std::size_t r = 0; r < 4; ++r) {
        std::vector<double> ra(a.data().begin() + 7 * r, a.data().begin() + 7 * (r + 1));
        std::vector<double> rb(b.data().begin() + 7 * r, b.data().begin() + 7 * (r + 1));
        EXPECT_NEAR(ab.data()[r], ref_distance(kind, ra, rb), 1e-9) << to_string(kind);
        EXPECT_EQ(ab.data()[r], ba.data()[r]) << to_string(kind);
        EXPECT_GE(ab.data()[r], 0.0);
      }
    }
  }
}

TEST(Distance, TriangleInequality) {
  Rng rng(12);
  for (DistanceKind kind : {DistanceKind::euclidean, DistanceKind::manhattan}) {
    for (int trial = 0; trial < 200; ++trial) {
      Tensor64 a = random_tensor({5}, rng), b = random_tensor({5}, rng), c = random_tensor({5}, rng);
      const double ab = distance(kind, a, b).item(), bc = distance(kind, b, c).item(), ac = distance(kind, a, c).item();
      EXPECT_LE(ac, ab + bc + 1e-6);
    }
  }
}

TEST(Distance, ZeroEmbeddingsStayFinite) {
  Tensor64 zero({1, 3}, {0.0, 0.0, 0.0});
  Tensor64 neg({1, 3}, {-1.0, -2.0, -0.5});
  for (DistanceKind kind : {DistanceKind::hellinger, DistanceKind::jaccard}) {
    Tensor64 a = zero.clone(), b = neg.clone();
    a.set_requires_grad(true);
    b.set_requires_grad(true);
    const auto d = distance(kind, a, b);
    EXPECT_TRUE(std::isfinite(d.item()));
    backward(sum(d));
    for (double g : a.grad()) EXPECT_TRUE(std::isfinite(g));
    for (double g : b.grad()) EXPECT_TRUE(std::isfinite(g));
  }
}

TEST(Distance, ParseNames) {
  EXPECT_EQ(parse_distance_kind("hellinger"), DistanceKind::hellinger);
  EXPECT_EQ(to_string(DistanceKind::jaccard), "jaccard");
  EXPECT_THROW(parse_distance_kind("cosine"), ConfigError);
}

// (Y, D, m, expected) checked against hand-evaluated values.
class LossTable : public ::testing::TestWithParam<std::tuple<double, double, double, double>> {};

TEST_P(LossTable, MatchesHandValue) {
  const auto [y, d, m, expected] = GetParam();
  EXPECT_NEAR(loss_of(y, d, m), expected, 1e-12);
  EXPECT_NEAR(loss_of(y, d, m), ref_loss(y, d, m), 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Contrastive, LossTable,
                         ::testing::Values(std::make_tuple(0.0, 0.0, 1.0, 0.0), std::make_tuple(1.0, 0.0, 1.0, 0.5),
                                           std::make_tuple(0.0, 1.0, 1.0, 0.5), std::make_tuple(1.0, 1.0, 1.0, 0.0),
                                           std::make_tuple(1.0, 1.5, 1.0, 0.0), std::make_tuple(0.0, 2.0, 1.0, 2.0),
                                           std::make_tuple(1.0, 0.5, 1.0, 0.125),
                                           std::make_tuple(0.0, 0.5, 1.0, 0.125),
                                           std::make_tuple(1.0, 0.25, 2.0, 1.53125),
                                           std::make_tuple(0.0, 3.0, 2.0, 4.5), std::make_tuple(1.0, 2.0, 2.0, 0.0),
                                           std::make_tuple(1.0, 0.1, 0.5, 0.08)));

TEST(Contrastive, BatchMean) {
  const ContrastiveConfig config{1.0, DistanceKind::euclidean};
  Tensor64 d({3}, {0.5, 0.5, 2.0});
  Tensor64 y({3}, {1.0, 0.0, 0.0});
  EXPECT_NEAR(contrastive_loss(config, d, y).item(), (0.125 + 0.125 + 2.0) / 3.0, 1e-12);
}

TEST(Contrastive, RejectsNonBinaryLabels) {
  const ContrastiveConfig config{1.0, DistanceKind::euclidean};
  EXPECT_THROW(contrastive_loss(config, Tensor64({2}, {0.1, 0.2}), Tensor64({2}, {0.0, 0.5})),
               std::invalid_argument);
  EXPECT_THROW(contrastive_loss(config, Tensor64({2}, {0.1, 0.2}), Tensor64({2}, {2.0, 1.0})),
               std::invalid_argument);
  EXPECT_THROW(contrastive_loss(config, Tensor64({2}, {0.1, 0.2}), Tensor64({1}, {1.0})), ShapeError);
}

TEST(Contrastive, ZeroGradientBeyondMargin) {
  const ContrastiveConfig config{1.0, DistanceKind::euclidean};
  Tensor64 d({2}, {1.0, 1.7}, true);
  backward(contrastive_loss(config, d, Tensor64({2}, {1.0, 1.0})));
  EXPECT_EQ(d.grad()[0], 0.0);
  EXPECT_EQ(d.grad()[1], 0.0);
}

TEST(Contrastive, NonNegativeAndMonotone) {
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const double m = rng.uniform(0.1, 3.0);
    const double d1 = rng.uniform(0.0, 4.0);
    const double d2 = d1 + rng.uniform(0.01, 1.0);
    EXPECT_GE(loss_of(0.0, d1, m), 0.0);
    EXPECT_GE(loss_of(1.0, d1, m), 0.0);
    EXPECT_LT(loss_of(0.0, d1, m), loss_of(0.0, d2, m));
    if (d2 < m) {
      EXPECT_GT(loss_of(1.0, d1, m), loss_of(1.0, d2, m));
    }
  }
}

}  // namespace
}  // namespace sddi
