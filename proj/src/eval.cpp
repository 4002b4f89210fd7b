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

#include "sddi/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "sddi/errors.hpp"
#include "sddi/ops.hpp"
#include "sddi/optim.hpp"
#include "sddi/rng.hpp"

namespace sddi {

namespace {

void check_labels(std::size_t n, std::span<const int> labels, const char* who) {
  if (n != labels.size()) {
    throw ShapeError(std::string(who) + ": " + std::to_string(n) + " scores but " + std::to_string(labels.size()) +
                     " labels");
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw std::invalid_argument(std::string(who) + ": labels must be 0 or 1");
  }
}

// f1 = 2tp / (2tp + fp + fn), compared exactly by cross-multiplication.
bool f1_greater(const PrPoint& a, const PrPoint& b) {
  const unsigned __int128 lhs = static_cast<unsigned __int128>(2 * a.tp) * (2 * b.tp + b.fp + b.fn);
  const unsigned __int128 rhs = static_cast<unsigned __int128>(2 * b.tp) * (2 * a.tp + a.fp + a.fn);
  return lhs > rhs;
}

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

std::string format_threshold(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

// Accumulates offsets from the minimum so that a list of equal values has
// exactly that value as its mean.
double mean_of(std::span<const double> values) {
  const double base = *std::min_element(values.begin(), values.end());
  double offset = 0.0;
  for (double v : values) offset += v - base;
  return base + offset / static_cast<double>(values.size());
}

}  // namespace

PRCurve pr_curve(std::span<const double> distances, std::span<const int> labels) {
  check_labels(distances.size(), labels, "pr_curve");
  const std::size_t positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  if (positives == 0 || positives == labels.size()) {
    throw std::invalid_argument("pr_curve: labels must contain both classes");
  }
  for (double d : distances) {
    if (!std::isfinite(d)) throw NumericError("pr_curve: non-finite distance");
  }
  std::vector<std::size_t> order(distances.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return distances[i] < distances[j]; });

  // Walk from the largest distance down; after absorbing every sample equal
  // to a value v, the counts describe the rule D >= v.
  PRCurve curve;
  std::size_t tp = 0, fp = 0;
  std::size_t i = order.size();
  while (i > 0) {
    const double v = distances[order[i - 1]];
    while (i > 0 && distances[order[i - 1]] == v) {
      (labels[order[i - 1]] == 1 ? tp : fp) += 1;
      --i;
    }
    PrPoint p;
    p.threshold = v;
    p.tp = tp;
    p.fp = fp;
    p.fn = positives - tp;
    p.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    p.recall = static_cast<double>(tp) / static_cast<double>(positives);
    p.f1 = 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + p.fn);
    curve.points.push_back(p);
  }
  std::reverse(curve.points.begin(), curve.points.end());

  const PrPoint* best = &curve.points.back();
  for (auto it = curve.points.rbegin(); it != curve.points.rend(); ++it) {
    if (f1_greater(*it, *best)) best = &*it;
  }
  curve.selected_threshold = best->threshold;
  curve.best_f1 = best->f1;
  return curve;
}

void finalize_metrics(EvalReport& r) {
  const auto ratio = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  r.accuracy = ratio(r.tp + r.tn, r.total());
  r.precision = ratio(r.tp, r.tp + r.fp);
  r.recall = ratio(r.tp, r.tp + r.fn);
  r.f1 = (r.precision + r.recall) > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
}

EvalReport classify_scores(std::span<const double> scores, std::span<const int> labels, double tau,
                           bool interact_above) {
  check_labels(scores.size(), labels, "classify");
  if (!std::isfinite(tau)) throw std::invalid_argument("classify: threshold must be finite");
  EvalReport r;
  r.threshold = tau;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = interact_above ? scores[i] >= tau : scores[i] <= tau;
    if (labels[i] == 1) {
      (predicted ? r.tp : r.fn) += 1;
    } else {
      (predicted ? r.fp : r.tn) += 1;
    }
  }
  finalize_metrics(r);
  return r;
}

EvalReport classify_and_report(std::span<const double> distances, std::span<const int> labels, double tau) {
  return classify_scores(distances, labels, tau, true);
}

std::string EvalReport::to_text() const {
  std::ostringstream out;
  out << "method=" << method << "\n"
      << "accuracy=" << format_double(accuracy) << "\n"
      << "precision=" << format_double(precision) << "\n"
      << "recall=" << format_double(recall) << "\n"
      << "f1=" << format_double(f1) << "\n"
      << "tp=" << tp << "\n"
      << "fp=" << fp << "\n"
      << "tn=" << tn << "\n"
      << "fn=" << fn << "\n"
      << "threshold=" << format_threshold(threshold) << "\n"
      << "seed=" << seed << "\n"
      << "epochs=" << epochs << "\n";
  return out.str();
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["method"] = method;
  j["accuracy"] = accuracy;
  j["precision"] = precision;
  j["recall"] = recall;
  j["f1"] = f1;
  j["tp"] = tp;
  j["fp"] = fp;
  j["tn"] = tn;
  j["fn"] = fn;
  j["threshold"] = threshold;
  j["seed"] = seed;
  j["epochs"] = epochs;
  return j.dump();
}

EvalReport EvalReport::from_text(const std::string& text) {
  EvalReport r;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("report: malformed line '" + line + "'");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "method") r.method = value;
    else if (key == "accuracy") r.accuracy = std::stod(value);
    else if (key == "precision") r.precision = std::stod(value);
    else if (key == "recall") r.recall = std::stod(value);
    else if (key == "f1") r.f1 = std::stod(value);
    else if (key == "tp") r.tp = std::stoull(value);
    else if (key == "fp") r.fp = std::stoull(value);
    else if (key == "tn") r.tn = std::stoull(value);
    else if (key == "fn") r.fn = std::stoull(value);
    else if (key == "threshold") r.threshold = std::stod(value);
    else if (key == "seed") r.seed = std::stoull(value);
    else if (key == "epochs") r.epochs = std::stoull(value);
    else throw FormatError("report: unknown key '" + key + "'");
  }
  return r;
}

SsimBreakdown ssim(const GrayImage& a, const GrayImage& b, const SsimConfig& config) {
  if (a.height != b.height || a.width != b.width) {
    throw ShapeError("ssim: image sizes differ (" + std::to_string(a.height) + "x" + std::to_string(a.width) +
                     " vs " + std::to_string(b.height) + "x" + std::to_string(b.width) + ")");
  }
  if (a.pixels.empty()) throw ShapeError("ssim: empty image");
  const double n = static_cast<double>(a.pixels.size());
  SsimBreakdown s;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    s.mu_a += a.pixels[i];
    s.mu_b += b.pixels[i];
  }
  s.mu_a /= n;
  s.mu_b /= n;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const double da = a.pixels[i] - s.mu_a;
    const double db = b.pixels[i] - s.mu_b;
    s.var_a += da * da;
    s.var_b += db * db;
    s.cov += da * db;
  }
  s.var_a /= n;
  s.var_b /= n;
  s.cov /= n;
  const double c1 = config.c1(), c2 = config.c2();
  const double numerator = (2.0 * s.mu_a * s.mu_b + c1) * (2.0 * s.cov + c2);
  const double denominator = (s.mu_a * s.mu_a + s.mu_b * s.mu_b + c1) * (s.var_a + s.var_b + c2);
  s.score = std::clamp(numerator / denominator, -1.0, 1.0);
  return s;
}

EvalReport ssim_classify(const std::vector<PairExample>& pairs, ImageStore& images, const SsimConfig& config) {
  if (pairs.empty()) throw std::invalid_argument("ssim_classify: empty pair list");
  std::vector<double> scores;
  std::vector<int> labels;
  for (const auto& p : pairs) {
    scores.push_back(ssim(images.get(p.a), images.get(p.b), config).score);
    labels.push_back(p.label);
  }
  EvalReport r = classify_scores(scores, labels, mean_of(scores), true);
  r.method = "ssim";
  return r;
}

std::string_view to_string(AeCriterion criterion) {
  return criterion == AeCriterion::bce ? "bce" : "cosine";
}

AeCriterion parse_ae_criterion(std::string_view name) {
  if (name == "bce") return AeCriterion::bce;
  if (name == "cosine") return AeCriterion::cosine;
  throw ConfigError("unknown autoencoder criterion '" + std::string(name) + "'");
}

double feature_bce(std::span<const float> prediction, std::span<const float> target) {
  if (prediction.size() != target.size() || prediction.empty()) {
    throw ShapeError("feature_bce: feature sizes differ or are empty");
  }
  constexpr double kClamp = 1e-7;
  double total = 0.0;
  for (std::size_t i = 0; i < prediction.size(); ++i) {
    const double p = std::clamp(static_cast<double>(prediction[i]), kClamp, 1.0 - kClamp);
    const double t = target[i];
    total -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
  }
  return total / static_cast<double>(prediction.size());
}

double feature_cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size() || a.empty()) throw ShapeError("feature_cosine: feature sizes differ or are empty");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double train_autoencoder(Autoencoder<float>& ae, const std::vector<const GrayImage*>& images, std::size_t epochs,
                         double learning_rate, std::size_t batch_size, std::uint64_t seed) {
  if (images.empty()) throw std::invalid_argument("train_autoencoder: no images");
  if (batch_size == 0) throw ConfigError("train_autoencoder: batch size must be positive");
  Optimizer optimizer(OptimizerConfig::defaults(OptimizerKind::adam, learning_rate));
  Rng rng(seed);
  std::vector<std::size_t> order(images.size());
  double last_loss = 0.0;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    double total = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t end = std::min(order.size(), start + batch_size);
      std::vector<const GrayImage*> batch;
      for (std::size_t k = start; k < end; ++k) batch.push_back(images[order[k]]);
      const Tensor input = stack_images(batch);
      const auto params = ae.parameters();
      for (auto p : params) p.tensor.zero_grad();
      const Tensor loss = binary_cross_entropy(ae.forward(input).reconstruction, input);
      const double value = loss.item();
      if (!std::isfinite(value)) {
        throw NumericError("autoencoder: non-finite loss at epoch " + std::to_string(epoch + 1) + " batch " +
                           std::to_string(batches));
      }
      backward(loss);
      optimizer.step(params);
      total += value;
      ++batches;
    }
    last_loss = total / static_cast<double>(batches);
    ae.set_epochs_trained(ae.epochs_trained() + 1);
  }
  return last_loss;
}

EvalReport ae_similarity(Autoencoder<float>& ae, const std::vector<PairExample>& pairs, ImageStore& images,
                         AeCriterion criterion) {
  if (ae.epochs_trained() == 0) throw ConfigError("ae_similarity: autoencoder has not been trained");
  if (pairs.empty()) throw std::invalid_argument("ae_similarity: empty pair list");
  NoGradGuard no_grad;
  std::map<std::string, std::vector<float>> features;
  const auto feature_of = [&](const std::string& id) -> const std::vector<float>& {
    auto it = features.find(id);
    if (it != features.end()) return it->second;
    const GrayImage* image = &images.get(id);
    const Tensor f = ae.encode(stack_images(std::span<const GrayImage* const>(&image, 1)));
    return features.emplace(id, std::vector<float>(f.data().begin(), f.data().end())).first->second;
  };
  std::vector<double> scores;
  std::vector<int> labels;
  for (const auto& p : pairs) {
    const auto& fa = feature_of(p.a);
    const auto& fb = feature_of(p.b);
    scores.push_back(criterion == AeCriterion::bce ? feature_bce(fa, fb) : feature_cosine(fa, fb));
    labels.push_back(p.label);
  }
  EvalReport r = classify_scores(scores, labels, mean_of(scores), criterion == AeCriterion::cosine);
  r.method = "autoencoder-" + std::string(to_string(criterion));
  r.epochs = ae.epochs_trained();
  return r;
}

}  // namespace sddi
