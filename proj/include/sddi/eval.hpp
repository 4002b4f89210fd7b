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

// Threshold selection, classification metrics, and the two image-similarity
// baselines (global SSIM and autoencoder features).

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sddi/dataset.hpp"
#include "sddi/image.hpp"
#include "sddi/image_store.hpp"
#include "sddi/network.hpp"

namespace sddi {

//! Operating threshold published for the Euclidean model; used only as a
//! fallback and for report formatting checks.
inline constexpr double kPublishedThreshold = 0.65;

struct PrPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0, fp = 0, fn = 0;
};

struct PRCurve {
  std::vector<PrPoint> points;  // thresholds strictly increasing
  double selected_threshold = 0.0;
  double best_f1 = 0.0;
};

//! Sweeps every unique distance as a threshold with the rule "interact iff
//! D >= tau" and selects the maximum-F1 threshold, ties going to the larger
//! tau. Throws std::invalid_argument unless both classes are present.
PRCurve pr_curve(std::span<const double> distances, std::span<const int> labels);

struct EvalReport {
  std::string method = "siamese";
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double threshold = 0.0;
  std::uint64_t seed = 0;
  std::size_t epochs = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  //! One `name=value` per line.
  std::string to_text() const;
  std::string to_json() const;
  static EvalReport from_text(const std::string& text);
};

//! Fills accuracy/precision/recall/f1 from the confusion counts. Empty
//! denominators give 0.
void finalize_metrics(EvalReport& report);

//! Interact iff D >= tau.
EvalReport classify_and_report(std::span<const double> distances, std::span<const int> labels, double tau);

//! Same counts for scores where interaction lies on either side of tau:
//! interact iff score >= tau (above) or score <= tau (below).
EvalReport classify_scores(std::span<const double> scores, std::span<const int> labels, double tau,
                           bool interact_above);

struct SsimConfig {
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;

  double c1() const { return (k1 * dynamic_range) * (k1 * dynamic_range); }
  double c2() const { return (k2 * dynamic_range) * (k2 * dynamic_range); }
};

struct SsimBreakdown {
  double mu_a = 0.0, mu_b = 0.0;
  double var_a = 0.0, var_b = 0.0;  // population variance
  double cov = 0.0;
  double score = 0.0;
};

//! Single-window SSIM over the whole image.
SsimBreakdown ssim(const GrayImage& a, const GrayImage& b, const SsimConfig& config = {});

//! Threshold = mean SSIM over the pairs; interact iff SSIM >= threshold.
EvalReport ssim_classify(const std::vector<PairExample>& pairs, ImageStore& images,
                         const SsimConfig& config = {});

enum class AeCriterion { bce, cosine };
std::string_view to_string(AeCriterion criterion);
AeCriterion parse_ae_criterion(std::string_view name);

//! Mean binary cross-entropy of `target` under `prediction`, inputs clamped
//! to [1e-7, 1 - 1e-7]. A dissimilarity.
double feature_bce(std::span<const float> prediction, std::span<const float> target);
//! Cosine similarity; 0 when either vector is all zero.
double feature_cosine(std::span<const float> a, std::span<const float> b);

inline constexpr std::size_t kAutoencoderEpochs = 10;

//! Reconstruction training with BCE and Adam. Increments epochs_trained.
//! Returns the mean loss of the last epoch.
double train_autoencoder(Autoencoder<float>& ae, const std::vector<const GrayImage*>& images, std::size_t epochs,
                         double learning_rate, std::size_t batch_size, std::uint64_t seed);

//! Scores every pair on flattened encoder features and thresholds at the
//! mean score: BCE predicts interact when <= mean, cosine when >= mean.
//! Throws ConfigError if the autoencoder has not been trained.
EvalReport ae_similarity(Autoencoder<float>& ae, const std::vector<PairExample>& pairs, ImageStore& images,
                         AeCriterion criterion);

}  // namespace sddi
