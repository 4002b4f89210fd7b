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
#include <string>
#include <vector>

#include "sddi/errors.hpp"
#include "sddi/eval.hpp"
#include "sddi/image_store.hpp"
#include "test_support.hpp"

namespace sddi {
namespace {

using testing::TempDir;

// Global SSIM by hand: population statistics over all pixels.
double ref_ssim(const GrayImage& a, const GrayImage& b) {
  const double n = static_cast<double>(a.pixels.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    ma += a.pixels[i];
    mb += b.pixels[i];
  }
  ma /= n;
  mb /= n;
  double va = 0, vb = 0, cov = 0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    va += (a.pixels[i] - ma) * (a.pixels[i] - ma);
    vb += (b.pixels[i] - mb) * (b.pixels[i] - mb);
    cov += (a.pixels[i] - ma) * (b.pixels[i] - mb);
  }
  va /= n;
  vb /= n;
  cov /= n;
  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  return ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
}

GrayImage random_image(Rng& rng, std::size_t h, std::size_t w) {
  GrayImage g(h, w);
  for (auto& v : g.pixels) v = static_cast<float>(rng.uniform());
  return g;
}

TEST(Ssim, IdenticalImages) {
  Rng rng(31);
  const auto a = random_image(rng, 6, 5);
  EXPECT_NEAR(ssim(a, a).score, 1.0, 1e-12);
}

TEST(Ssim, ConstantBlackVsWhite) {
  const SsimConfig config;
  const double c1 = config.c1();
  EXPECT_DOUBLE_EQ(c1, 1e-4);
  EXPECT_DOUBLE_EQ(config.c2(), 9e-4);
  const auto s = ssim(GrayImage(4, 4, 0.0f), GrayImage(4, 4, 1.0f));
  EXPECT_NEAR(s.score, c1 / (1.0 + c1), 1e-9);
  EXPECT_EQ(s.var_a, 0.0);
  EXPECT_EQ(s.cov, 0.0);
}

TEST(Ssim, InvertedCheckerboardIsNegative) {
  GrayImage a(4, 4);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) a.at(i, j) = ((i + j) % 2) ? 1.0f : 0.0f;
  }
  GrayImage b = a;
  for (auto& v : b.pixels) v = 1.0f - v;
  const auto s = ssim(a, b);
  EXPECT_LT(s.cov, 0.0);
  EXPECT_LT(s.score, 0.0);
}

TEST(Ssim, MatchesHandFormulaSymmetricAndBounded) {
  Rng rng(32);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_image(rng, 5, 7);
    auto b = random_image(rng, 5, 7);
    if (trial % 3 == 0) {
      for (std::size_t i = 0; i < b.pixels.size(); ++i) b.pixels[i] = 1.0f - a.pixels[i];
    }
    const double s = ssim(a, b).score;
    EXPECT_NEAR(s, ref_ssim(a, b), 1e-9);
    EXPECT_EQ(s, ssim(b, a).score);
    EXPECT_LE(std::abs(s), 1.0);
  }
  EXPECT_THROW(ssim(GrayImage(2, 2), GrayImage(2, 3)), ShapeError);
}

TEST(SsimClassify, MeanThresholdAndTies) {
  TempDir dir("ssimcls");
  Rng rng(33);
  const auto x = random_image(rng, 6, 6), y = random_image(rng, 6, 6);
  auto manifest = testing::write_images(dir.path(), {{"X", x}, {"Y", y}, {"Z", x}});
  ImageStore store(manifest, dir.path());
  const auto sxz = ssim(store.get("X"), store.get("Z")).score;
  const auto sxy = ssim(store.get("X"), store.get("Y")).score;
  const auto report = ssim_classify({{"X", "Y", 0}, {"X", "Z", 1}}, store);
  EXPECT_DOUBLE_EQ(report.threshold, (sxz + sxy) / 2.0);
  EXPECT_EQ(report.tp, 1u);
  EXPECT_EQ(report.tn, 1u);
  EXPECT_EQ(report.method, "ssim");

  const auto ties = ssim_classify({{"X", "Z", 1}, {"X", "Z", 0}}, store);
  EXPECT_DOUBLE_EQ(ties.threshold, sxz);
  EXPECT_EQ(ties.tp + ties.fp, 2u);
  EXPECT_THROW(ssim_classify({}, store), std::invalid_argument);
}

TEST(Classification, MeanOfTwoScores) {
  const double scores[] = {0.2, 0.8};
  const int labels[] = {0, 1};
  const auto r = classify_scores(scores, labels, 0.5, true);
  EXPECT_EQ(r.tp + r.fp, 1u);
  EXPECT_EQ(r.accuracy, 1.0);
  const auto below = classify_scores(scores, labels, 0.5, false);
  EXPECT_EQ(below.tp + below.fp, 1u);
  EXPECT_EQ(below.accuracy, 0.0);
}

TEST(Classification, ConfusionArithmetic) {
  EvalReport r;
  r.tp = 78;
  r.fn = 22;
  r.fp = 29;
  r.tn = 71;
  finalize_metrics(r);
  EXPECT_DOUBLE_EQ(r.recall, 0.78);
  EXPECT_NEAR(r.precision, 78.0 / 107.0, 1e-12);
  EXPECT_NEAR(r.precision, 0.729, 5e-4);
  EXPECT_DOUBLE_EQ(r.accuracy, 149.0 / 200.0);
  EXPECT_NEAR(r.f1, 2 * r.precision * r.recall / (r.precision + r.recall), 1e-9);
}

TEST(Classification, DistanceRuleAndCounts) {
  Rng rng(34);
  std::vector<double> d;
  std::vector<int> y;
  for (int i = 0; i < 500; ++i) {
    d.push_back(rng.uniform());
    y.push_back(static_cast<int>(rng.below(2)));
  }
  const auto r = classify_and_report(d, y, 0.4);
  std::size_t pos = 0, tp = 0, fp = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    pos += y[i];
    if (d[i] >= 0.4) (y[i] ? tp : fp)++;
  }
  EXPECT_EQ(r.tp, tp);
  EXPECT_EQ(r.fp, fp);
  EXPECT_EQ(r.tp + r.fn, pos);
  EXPECT_EQ(r.fp + r.tn, d.size() - pos);
  EXPECT_NEAR(r.f1, 2 * r.precision * r.recall / (r.precision + r.recall), 1e-9);

  const double sep[] = {0.1, 0.9};
  const int sep_y[] = {0, 1};
  const auto perfect = classify_and_report(sep, sep_y, 0.5);
  EXPECT_EQ(perfect.accuracy, 1.0);
  EXPECT_EQ(perfect.f1, 1.0);
}

TEST(Report, TextAndJson) {
  EvalReport r;
  r.method = "siamese-euclidean";
  r.accuracy = 0.839;
  r.recall = 0.78;
  r.precision = 0.705;
  r.f1 = 0.741;
  r.threshold = 0.65;
  r.seed = 42;
  r.epochs = 50;
  const std::string text = r.to_text();
  for (const char* line : {"method=siamese-euclidean\n", "accuracy=0.839000\n", "recall=0.780000\n",
                           "precision=0.705000\n", "f1=0.741000\n", "threshold=0.65\n", "seed=42\n",
                           "epochs=50\n"}) {
    EXPECT_NE(text.find(line), std::string::npos) << line;
  }
  const auto back = EvalReport::from_text(text);
  EXPECT_EQ(back.method, r.method);
  EXPECT_EQ(back.threshold, 0.65);
  EXPECT_EQ(back.seed, 42u);
  EXPECT_NEAR(back.f1, 0.741, 1e-12);
  const std::string json = r.to_json();
  EXPECT_NE(json.find("\"method\":\"siamese-euclidean\""), std::string::npos);
  EXPECT_EQ(json.find('\n'), std::string::npos);
  EXPECT_EQ(kPublishedThreshold, 0.65);
}

// Best F1 over every candidate threshold, by enumeration.
double brute_best_f1(const std::vector<double>& d, const std::vector<int>& y) {
  std::vector<double> taus = d;
  taus.push_back(*std::max_element(d.begin(), d.end()) + 1.0);
  double best = 0.0;
  for (double tau : taus) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const bool pred = d[i] >= tau;
      if (pred && y[i]) ++tp;
      if (pred && !y[i]) ++fp;
      if (!pred && y[i]) ++fn;
    }
    const double f1 = tp == 0 ? 0.0 : 2 * tp / (2 * tp + fp + fn);
    best = std::max(best, f1);
  }
  return best;
}

TEST(PrCurve, SelectedThresholdIsOptimal) {
  Rng rng(35);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(300);
    std::vector<double> d;
    std::vector<int> y;
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse values force ties.
      d.push_back(static_cast<double>(rng.below(20)) / 10.0);
      y.push_back(static_cast<int>(rng.below(2)));
    }
    y[0] = 0;
    y[1] = 1;
    const auto curve = pr_curve(d, y);
    const double best = brute_best_f1(d, y);
    EXPECT_NEAR(curve.best_f1, best, 1e-12);
    EXPECT_NEAR(classify_and_report(d, y, curve.selected_threshold).f1, best, 1e-12);
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
      EXPECT_LT(curve.points[i - 1].threshold, curve.points[i].threshold);
    }
    for (const auto& p : curve.points) {
      if (p.threshold > curve.selected_threshold) {
        EXPECT_LT(p.f1, curve.best_f1);
      }
    }
  }
}

TEST(PrCurve, SeparableCase) {
  const std::vector<double> d = {0.1, 0.2, 0.3, 1.1, 1.2};
  const std::vector<int> y = {0, 0, 0, 1, 1};
  const auto curve = pr_curve(d, y);
  EXPECT_EQ(curve.best_f1, 1.0);
  EXPECT_EQ(classify_and_report(d, y, curve.selected_threshold).f1, 1.0);
}

TEST(PrCurve, IndependentLabelsApproachAllPositiveF1) {
  Rng rng(36);
  for (double p : {0.3, 0.5}) {
    std::vector<double> d;
    std::vector<int> y;
    for (int i = 0; i < 20000; ++i) {
      d.push_back(rng.uniform());
      y.push_back(rng.uniform() < p ? 1 : 0);
    }
    const auto curve = pr_curve(d, y);
    EXPECT_NEAR(curve.best_f1, 2 * p / (1 + p), 0.01);
    EXPECT_NEAR(curve.best_f1, brute_best_f1(d, y), 1e-12);
  }
}

TEST(PrCurve, SingleClassRejected) {
  const std::vector<double> d = {0.1, 0.2};
  EXPECT_THROW(pr_curve(d, std::vector<int>{1, 1}), std::invalid_argument);
  EXPECT_THROW(pr_curve(d, std::vector<int>{0, 0}), std::invalid_argument);
}

TEST(Features, CosineAndBce) {
  const std::vector<float> a = {1, 2, 0}, b = {0, 0, 3};
  EXPECT_NEAR(feature_cosine(a, a), 1.0, 1e-7);
  EXPECT_EQ(feature_cosine(a, b), 0.0);
  EXPECT_EQ(feature_cosine(a, std::vector<float>{0, 0, 0}), 0.0);
  const std::vector<float> half(8, 0.5f);
  EXPECT_NEAR(feature_bce(half, half), std::log(2.0), 1e-7);
  // H(p) is the minimum over targets.
  const std::vector<float> p = {0.2f, 0.7f};
  const double hp = feature_bce(p, p);
  EXPECT_LT(hp, feature_bce(p, std::vector<float>{0.3f, 0.7f}));
  EXPECT_LT(hp, feature_bce(p, std::vector<float>{0.2f, 0.5f}));
  EXPECT_EQ(parse_ae_criterion("bce"), AeCriterion::bce);
  EXPECT_THROW(parse_ae_criterion("l2"), ConfigError);
}

TEST(Autoencoder, UntrainedRejectedTrainedReports) {
  TempDir dir("ae");
  Rng rng(37);
  std::vector<std::pair<std::string, GrayImage>> imgs;
  for (int i = 0; i < 4; ++i) imgs.push_back({"D" + std::to_string(i), testing::random_glyph(rng, 8, 1, 2)});
  const auto manifest = testing::write_images(dir.path(), imgs);
  ImageStore store(manifest, dir.path());
  Autoencoder<float> ae(AutoencoderSpec::standard(), rng);
  const std::vector<PairExample> pairs = {{"D0", "D1", 1}, {"D2", "D3", 0}, {"D0", "D2", 0}};
  EXPECT_THROW(ae_similarity(ae, pairs, store, AeCriterion::cosine), ConfigError);

  std::vector<const GrayImage*> train;
  for (const auto& id : store.ids()) train.push_back(&store.get(id));
  const double loss = train_autoencoder(ae, train, 2, 1e-3, 2, 5);
  EXPECT_TRUE(std::isfinite(loss));
  EXPECT_EQ(ae.epochs_trained(), 2u);
  for (AeCriterion c : {AeCriterion::cosine, AeCriterion::bce}) {
    const auto r = ae_similarity(ae, pairs, store, c);
    EXPECT_EQ(r.total(), 3u);
    EXPECT_EQ(r.method, "autoencoder-" + std::string(to_string(c)));
  }
}

}  // namespace
}  // namespace sddi
