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

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "sddi/errors.hpp"
#include "sddi/optim.hpp"
#include "test_support.hpp"

namespace sddi {
namespace {

using Opt64 = BasicOptimizer<double>;

// Runs `steps` updates of f(w) = w^2 from w0 and returns each iterate.
std::vector<double> iterate_square(const OptimizerConfig& config, int steps, double w0 = 1.0) {
  Tensor64 w({1}, {w0}, true);
  Opt64 opt(config);
  std::vector<double> out;
  for (int s = 0; s < steps; ++s) {
    w.zero_grad();
    backward(sum(mul(w, w)));
    opt.step({{"w", w}});
    out.push_back(w.item());
  }
  return out;
}

struct OracleRow {
  OptimizerKind kind;
  double lr;
  double w1;
  double w2;
};

// Generated by tests/oracles/optimizer_two_steps.py (mpmath, 50 digits).
constexpr OracleRow kOracle[] = {
    {OptimizerKind::adam, 0.1, 0.9000000005, 0.80041222869179215},
    {OptimizerKind::nadam, 0.1, 0.85263157968421052, 0.74169715990901117},
    {OptimizerKind::rmsprop, 0.01, 0.9683772238983162, 0.94578802548810125},
    {OptimizerKind::adadelta, 1.0, 0.99552787522529838, 0.99100868027546018},
};

TEST(Optimizer, TwoStepsMatchOracle) {
  for (const auto& row : kOracle) {
    const auto w = iterate_square(OptimizerConfig::defaults(row.kind, row.lr), 2);
    EXPECT_NEAR(w[0], row.w1, 1e-12) << to_string(row.kind);
    EXPECT_NEAR(w[1], row.w2, 1e-12) << to_string(row.kind);
  }
}

TEST(Optimizer, AdadeltaFirstStepHandFormula) {
  // Unit gradient: f(w) = w.
  Tensor64 w({1}, {1.0}, true);
  Opt64 opt(OptimizerConfig::defaults(OptimizerKind::adadelta, 1.0));
  backward(sum(w));
  opt.step({{"w", w}});
  EXPECT_NEAR(w.item(), 1.0 - std::sqrt(1e-6 / (0.05 + 1e-6)), 1e-15);
}

TEST(Optimizer, AdamFirstStepNearLearningRate) {
  Tensor64 w({1}, {1.0}, true);
  Opt64 opt(OptimizerConfig::defaults(OptimizerKind::adam, 0.1));
  backward(sum(w));
  opt.step({{"w", w}});
  EXPECT_NEAR(w.item(), 1.0 - 0.1 / (1.0 + 1e-8), 1e-15);
}

TEST(Optimizer, ZeroGradientLeavesParamsUnchanged) {
  for (OptimizerKind kind :
       {OptimizerKind::adam, OptimizerKind::rmsprop, OptimizerKind::adadelta, OptimizerKind::nadam}) {
    Tensor64 w({3}, {0.5, -1.0, 2.0}, true);
    w.mutable_grad();
    Opt64 opt(OptimizerConfig::defaults(kind, 0.1));
    for (int s = 0; s < 3; ++s) opt.step({{"w", w}});
    EXPECT_EQ(w.data()[0], 0.5);
    EXPECT_EQ(w.data()[1], -1.0);
    EXPECT_EQ(w.data()[2], 2.0);
    EXPECT_EQ(opt.step_count(), 3u);
  }
}

TEST(Optimizer, ConvergesOnSquare) {
  for (OptimizerKind kind :
       {OptimizerKind::adam, OptimizerKind::rmsprop, OptimizerKind::adadelta, OptimizerKind::nadam}) {
    const auto w = iterate_square(OptimizerConfig::defaults(kind), 100);
    double prev = 1.0;
    for (double v : w) {
      EXPECT_LT(v * v, prev * prev) << to_string(kind);
      prev = v;
    }
  }
}

TEST(Optimizer, NadamWithoutNesterovEqualsAdam) {
  auto nadam = OptimizerConfig::defaults(OptimizerKind::nadam, 0.05);
  nadam.nesterov = false;
  const auto a = iterate_square(OptimizerConfig::defaults(OptimizerKind::adam, 0.05), 20);
  const auto b = iterate_square(nadam, 20);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
}

TEST(Optimizer, Deterministic) {
  for (OptimizerKind kind :
       {OptimizerKind::adam, OptimizerKind::rmsprop, OptimizerKind::adadelta, OptimizerKind::nadam}) {
    EXPECT_EQ(iterate_square(OptimizerConfig::defaults(kind, 0.01), 10),
              iterate_square(OptimizerConfig::defaults(kind, 0.01), 10));
  }
}

TEST(Optimizer, StateRoundTripContinuesBitExactly) {
  for (OptimizerKind kind :
       {OptimizerKind::adam, OptimizerKind::rmsprop, OptimizerKind::adadelta, OptimizerKind::nadam}) {
    const auto config = OptimizerConfig::defaults(kind, 0.01);
    Tensor64 w({2}, {1.0, -0.5}, true);
    Opt64 first(config);
    auto grad_step = [&](Opt64& opt) {
      w.zero_grad();
      backward(sum(mul(w, w)));
      opt.step({{"w", w}});
    };
    for (int s = 0; s < 3; ++s) grad_step(first);
    Opt64 second(config);
    second.load_state_tensors(first.state_tensors());
    EXPECT_EQ(second.step_count(), 3u);
    Tensor64 saved = w.clone();
    grad_step(first);
    const std::vector<double> expected(w.data().begin(), w.data().end());
    w.mutable_data()[0] = saved.data()[0];
    w.mutable_data()[1] = saved.data()[1];
    grad_step(second);
    EXPECT_EQ(expected, std::vector<double>(w.data().begin(), w.data().end())) << to_string(kind);
  }
}

TEST(Optimizer, NonFiniteGradientNamesParameter) {
  Tensor64 w({2}, {1.0, 1.0}, true);
  w.mutable_grad()[1] = std::numeric_limits<double>::quiet_NaN();
  Opt64 opt(OptimizerConfig::defaults(OptimizerKind::adam));
  try {
    opt.step({{"tower/conv0/weight", w}});
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("tower/conv0/weight"), std::string::npos);
  }
}

TEST(Optimizer, ShapeChangeRejected) {
  Tensor64 w({2}, {1.0, 1.0}, true);
  w.mutable_grad();
  Opt64 opt(OptimizerConfig::defaults(OptimizerKind::adam));
  opt.step({{"w", w}});
  Tensor64 other({3}, {1.0, 1.0, 1.0}, true);
  other.mutable_grad();
  EXPECT_THROW(opt.step({{"w", other}}), ShapeError);
}

TEST(Optimizer, ParseNames) {
  EXPECT_EQ(parse_optimizer_kind("nadam"), OptimizerKind::nadam);
  EXPECT_THROW(parse_optimizer_kind("sgd"), ConfigError);
  const auto d = OptimizerConfig::defaults(OptimizerKind::adadelta);
  EXPECT_EQ(d.rho, 0.95);
  EXPECT_EQ(d.epsilon, 1e-6);
  EXPECT_EQ(d.learning_rate, 5e-5);
}

TEST(LineSearch, SingleCandidate) {
  const double only[] = {3e-4};
  EXPECT_EQ(line_search_lr([](double) { return 0.0; }, only), 3e-4);
}

TEST(LineSearch, PeakedAtPublishedRate) {
  const double selected = line_search_lr([](double lr) { return -std::abs(std::log10(lr) - std::log10(5e-5)); },
                                         kLineSearchGrid);
  EXPECT_EQ(selected, 5e-5);
}

TEST(LineSearch, TiesPreferSmallerRate) {
  const double grid[] = {1e-3, 1e-4, 1e-5};
  EXPECT_EQ(line_search_lr([](double lr) { return lr > 5e-5 ? 1.0 : 0.5; }, grid), 1e-4);
  EXPECT_EQ(line_search_lr([](double) { return 1.0; }, grid), 1e-5);
}

}  // namespace
}  // namespace sddi
