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

#include "sddi/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "sddi/errors.hpp"
#include "sddi/image.hpp"

namespace sddi {

namespace {

// Restores the model's train/eval mode on scope exit.
class ModeGuard {
 public:
  ModeGuard(ModelState& model, bool training) : model_(model), previous_(model.tower().training()) {
    model_.set_training(training);
  }
  ~ModeGuard() { model_.set_training(previous_); }
  ModeGuard(const ModeGuard&) = delete;
  ModeGuard& operator=(const ModeGuard&) = delete;

 private:
  ModelState& model_;
  bool previous_;
};

bool has_both_classes(const std::vector<PairExample>& pairs) {
  bool pos = false, neg = false;
  for (const auto& p : pairs) (p.label == 1 ? pos : neg) = true;
  return pos && neg;
}

}  // namespace

std::string EpochLog::line() const {
  char buf[256];
  std::snprintf(buf, sizeof buf, "epoch=%zu loss=%.6f val_f1=%.6f val_recall=%.6f val_precision=%.6f", epoch, loss,
                val_f1, val_recall, val_precision);
  return buf;
}

void split_validation(std::vector<PairExample>& train, std::vector<PairExample>& validation, double fraction) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw ConfigError("validation fraction must be in [0, 1)");
  const auto n_val = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(train.size())));
  validation.assign(train.end() - static_cast<std::ptrdiff_t>(n_val), train.end());
  train.resize(train.size() - n_val);
}

std::vector<int> labels_of(const std::vector<PairExample>& pairs) {
  std::vector<int> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(p.label);
  return out;
}

std::vector<double> compute_distances(ModelState& model, const std::vector<PairExample>& pairs, ImageStore& images,
                                      DistanceKind metric, std::size_t batch_size, bool rotate) {
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  ModeGuard mode(model, false);
  NoGradGuard no_grad;
  std::vector<double> out;
  out.reserve(pairs.size());
  std::vector<GrayImage> rotated_a, rotated_b;
  for (std::size_t start = 0; start < pairs.size(); start += batch_size) {
    const std::size_t end = std::min(pairs.size(), start + batch_size);
    std::vector<const GrayImage*> a, b;
    rotated_a.clear();
    rotated_b.clear();
    rotated_a.reserve(end - start);
    rotated_b.reserve(end - start);
    for (std::size_t i = start; i < end; ++i) {
      if (rotate) {
        rotated_a.push_back(rotate90(images.get(pairs[i].a), 1));
        rotated_b.push_back(rotate90(images.get(pairs[i].b), 1));
        a.push_back(&rotated_a.back());
        b.push_back(&rotated_b.back());
      } else {
        a.push_back(&images.get(pairs[i].a));
        b.push_back(&images.get(pairs[i].b));
      }
    }
    const Tensor ea = model.embed(stack_images(a));
    const Tensor eb = model.embed(stack_images(b));
    const Tensor d = distance(metric, ea, eb);
    for (float v : d.data()) out.push_back(v);
  }
  return out;
}

ThresholdChoice select_threshold(ModelState& model, const std::vector<PairExample>& validation,
                                 const std::vector<PairExample>& train, ImageStore& images, DistanceKind metric,
                                 std::size_t batch_size) {
  ThresholdChoice choice;
  const std::vector<PairExample>* source = nullptr;
  if (has_both_classes(validation)) {
    source = &validation;
    choice.source = "validation";
  } else if (has_both_classes(train)) {
    source = &train;
    choice.source = "train";
  }
  if (source == nullptr) return choice;
  const auto distances = compute_distances(model, *source, images, metric, batch_size);
  const auto labels = labels_of(*source);
  choice.threshold = pr_curve(distances, labels).selected_threshold;
  choice.report = classify_and_report(distances, labels, choice.threshold);
  return choice;
}

double train_epoch(ModelState& model, Optimizer& optimizer, const std::vector<PairExample>& pairs, ImageStore& images,
                   const ContrastiveConfig& objective, std::size_t batch_size, Rng& rng, std::size_t epoch) {
  if (pairs.empty()) throw std::invalid_argument("train_epoch: no training pairs");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  ModeGuard mode(model, true);
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  const auto params = model.parameters();
  double total = 0.0;
  std::size_t batches = 0;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    std::vector<const GrayImage*> a, b;
    std::vector<float> y;
    for (std::size_t k = start; k < end; ++k) {
      const PairExample& p = pairs[order[k]];
      a.push_back(&images.get(p.a));
      b.push_back(&images.get(p.b));
      y.push_back(static_cast<float>(p.label));
    }
    for (auto p : params) p.tensor.zero_grad();
    const Tensor d = model.forward(stack_images(a), stack_images(b), objective.metric);
    const Tensor loss = contrastive_loss(objective, d, Tensor({y.size()}, y));
    const double value = loss.item();
    if (!std::isfinite(value)) {
      throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + " batch " + std::to_string(batches));
    }
    backward(loss);
    optimizer.step(params);
    total += value;
    ++batches;
  }
  return total / static_cast<double>(batches);
}

TrainResult train_model(ModelState& model, Optimizer& optimizer, const std::vector<PairExample>& train,
                        const std::vector<PairExample>& validation, ImageStore& images, const TrainOptions& options,
                        std::ostream& log, const std::function<void(std::size_t)>& on_checkpoint) {
  if (options.epochs > 0 && train.empty()) throw std::invalid_argument("train_model: no training pairs");
  TrainResult result;
  Rng rng(options.seed ^ 0x5eed5eed5eed5eedULL);
  for (std::size_t epoch = 1; epoch <= options.epochs; ++epoch) {
    EpochLog entry;
    entry.epoch = epoch;
    entry.loss =
        train_epoch(model, optimizer, train, images, options.objective, options.batch_size, rng, epoch);
    const ThresholdChoice val = select_threshold(model, validation, train, images, options.objective.metric,
                                                 options.batch_size);
    entry.val_f1 = val.report.f1;
    entry.val_recall = val.report.recall;
    entry.val_precision = val.report.precision;
    log << entry.line() << "\n" << std::flush;
    result.log.push_back(entry);
    if (on_checkpoint && options.checkpoint_every > 0 && epoch % options.checkpoint_every == 0) on_checkpoint(epoch);
  }
  result.threshold =
      select_threshold(model, validation, train, images, options.objective.metric, options.batch_size);
  return result;
}

}  // namespace sddi
