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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "sddi/dataset.hpp"
#include "sddi/eval.hpp"
#include "sddi/image_store.hpp"
#include "sddi/network.hpp"
#include "sddi/objective.hpp"
#include "sddi/optim.hpp"

namespace sddi {

struct EpochLog {
  std::size_t epoch = 0;
  double loss = 0.0;
  double val_f1 = 0.0;
  double val_recall = 0.0;
  double val_precision = 0.0;

  //! `epoch=<n> loss=<f> val_f1=<f> val_recall=<f> val_precision=<f>`
  std::string line() const;
};

//! Carves the validation slice off the end of the (already shuffled)
//! training list: the last floor(fraction * n) pairs.
void split_validation(std::vector<PairExample>& train, std::vector<PairExample>& validation, double fraction);

//! Embedding distances for every pair in inference mode (batch-norm running
//! statistics, no graph). With `rotate`, both images are turned 90 degrees
//! counterclockwise first.
std::vector<double> compute_distances(ModelState& model, const std::vector<PairExample>& pairs, ImageStore& images,
                                      DistanceKind metric, std::size_t batch_size, bool rotate = false);

std::vector<int> labels_of(const std::vector<PairExample>& pairs);

struct ThresholdChoice {
  double threshold = kPublishedThreshold;
  std::string source = "published";  // "validation", "train" or "published"
  EvalReport report;                 // metrics on the pairs used for selection
};

//! PR-selected threshold on `validation`; falls back to `train` when the
//! validation slice lacks a class, then to the published operating point.
ThresholdChoice select_threshold(ModelState& model, const std::vector<PairExample>& validation,
                                 const std::vector<PairExample>& train, ImageStore& images, DistanceKind metric,
                                 std::size_t batch_size);

//! One pass of shuffled mini-batches. Returns the mean batch loss. Throws
//! NumericError naming the epoch and batch index on a non-finite loss.
double train_epoch(ModelState& model, Optimizer& optimizer, const std::vector<PairExample>& pairs, ImageStore& images,
                   const ContrastiveConfig& objective, std::size_t batch_size, Rng& rng, std::size_t epoch);

struct TrainOptions {
  ContrastiveConfig objective;
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  std::size_t checkpoint_every = 10;
  std::uint64_t seed = 42;
};

struct TrainResult {
  std::vector<EpochLog> log;
  ThresholdChoice threshold;
};

//! Runs `epochs` epochs, writing one log line per epoch to `log`, calling
//! `on_checkpoint(epoch)` every checkpoint_every epochs, and selecting the
//! decision threshold at the end.
TrainResult train_model(ModelState& model, Optimizer& optimizer, const std::vector<PairExample>& train,
                        const std::vector<PairExample>& validation, ImageStore& images, const TrainOptions& options,
                        std::ostream& log, const std::function<void(std::size_t)>& on_checkpoint = {});

}  // namespace sddi
