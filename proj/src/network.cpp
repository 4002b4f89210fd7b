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

#include "sddi/network.hpp"

#include <cmath>
#include <utility>

#include "sddi/spatial.hpp"

namespace sddi {

namespace {

std::size_t after_conv(std::size_t side, std::size_t kernel, std::size_t padding, const std::string& what) {
  if (kernel == 0) throw ConfigError(what + ": kernel must be positive");
  if (side + 2 * padding < kernel) {
    throw ConfigError(what + ": kernel " + std::to_string(kernel) + " exceeds spatial size " +
                      std::to_string(side));
  }
  return side + 2 * padding - kernel + 1;
}

std::size_t after_pool(std::size_t side, std::size_t pool, const std::string& what) {
  if (pool == 0) throw ConfigError(what + ": pool must be positive");
  if (side < pool) {
    throw ConfigError(what + ": pool " + std::to_string(pool) + " exceeds spatial size " +
                      std::to_string(side));
  }
  return (side - pool) / pool + 1;
}

template <typename T>
BasicTensor<T> he_uniform(Shape shape, std::size_t fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  std::vector<T> values(shape_numel(shape));
  for (T& v : values) v = static_cast<T>(rng.uniform(-bound, bound));
  return BasicTensor<T>(std::move(shape), std::move(values), true);
}

void require_square_input(const Shape& shape, std::size_t size, const char* who) {
  if (shape.size() != 4 || shape[1] != 1 || shape[2] != size || shape[3] != size) {
    throw ShapeError(std::string(who) + ": expected [N, 1, " + std::to_string(size) + ", " +
                     std::to_string(size) + "], got " + shape_to_string(shape));
  }
}

}  // namespace

std::vector<std::size_t> TowerSpec::shape_chain() const {
  if (input_size == 0) throw ConfigError("tower: input_size must be positive");
  std::vector<std::size_t> chain{input_size};
  std::size_t side = input_size;
  for (std::size_t i = 0; i < conv_filters.size(); ++i) {
    const std::string where = "tower conv block " + std::to_string(i);
    side = after_conv(side, kernel, 0, where);
    chain.push_back(side);
    side = after_pool(side, pool, where);
    chain.push_back(side);
  }
  return chain;
}

std::size_t TowerSpec::flatten_size() const {
  const std::size_t side = shape_chain().back();
  const std::size_t channels = conv_filters.empty() ? 1 : conv_filters.back();
  return side * side * channels;
}

void TowerSpec::validate() const {
  if (fc_sizes.empty()) throw ConfigError("tower: at least one fully connected layer is required");
  for (std::size_t f : conv_filters) {
    if (f == 0) throw ConfigError("tower: conv filter counts must be positive");
  }
  for (std::size_t f : fc_sizes) {
    if (f == 0) throw ConfigError("tower: fc sizes must be positive");
  }
  (void)shape_chain();
}

std::size_t StnSpec::flatten_size(std::size_t input_size) const {
  if (loc_conv_filters.size() != loc_kernels.size() || loc_conv_filters.empty()) {
    throw ConfigError("stn: loc_conv_filters and loc_kernels must be non-empty and equally long");
  }
  std::size_t side = input_size;
  for (std::size_t i = 0; i < loc_kernels.size(); ++i) {
    const std::string where = "stn localisation block " + std::to_string(i);
    side = after_conv(side, loc_kernels[i], 0, where);
    side = after_pool(side, loc_pool, where);
  }
  return side * side * loc_conv_filters.back();
}

void StnSpec::validate(std::size_t input_size) const {
  if (loc_fc.empty() || loc_fc.back() != 6) {
    throw ConfigError("stn: the final localisation layer must output 6 values");
  }
  for (std::size_t f : loc_conv_filters) {
    if (f == 0) throw ConfigError("stn: filter counts must be positive");
  }
  for (std::size_t f : loc_fc) {
    if (f == 0) throw ConfigError("stn: fc sizes must be positive");
  }
  (void)flatten_size(input_size);
}

AutoencoderSpec AutoencoderSpec::standard() {
  using K = AeStep::Kind;
  AutoencoderSpec spec;
  spec.encoder = {{K::conv, 16}, {K::conv, 32}, {K::conv, 64}, {K::pool, 0}, {K::conv, 128},
                  {K::conv, 64}, {K::pool, 0},  {K::conv, 32}, {K::conv, 16}, {K::conv, 8}};
  spec.decoder = {{K::conv, 16}, {K::conv, 32}, {K::upsample, 0}, {K::conv, 64}, {K::conv, 128},
                  {K::upsample, 0}, {K::conv, 64}, {K::conv, 32}, {K::conv, 16}, {K::conv, 1}};
  return spec;
}

namespace {

Shape walk_steps(const std::vector<AeStep>& steps, Shape shape, const AutoencoderSpec& spec,
                 const char* part) {
  for (const AeStep& step : steps) {
    switch (step.kind) {
      case AeStep::Kind::conv:
        if (step.filters == 0) throw ConfigError(std::string("autoencoder ") + part + ": zero filters");
        shape[0] = step.filters;
        break;
      case AeStep::Kind::pool:
        if (spec.pool == 0 || shape[1] % spec.pool != 0 || shape[2] % spec.pool != 0) {
          throw ConfigError(std::string("autoencoder ") + part + ": input " + std::to_string(shape[1]) +
                            "x" + std::to_string(shape[2]) + " is not divisible by pool " +
                            std::to_string(spec.pool));
        }
        shape[1] /= spec.pool;
        shape[2] /= spec.pool;
        break;
      case AeStep::Kind::upsample:
        shape[1] *= spec.upsample;
        shape[2] *= spec.upsample;
        break;
    }
  }
  return shape;
}

}  // namespace

Shape AutoencoderSpec::feature_shape(std::size_t h, std::size_t w) const {
  if (kernel % 2 == 0) throw ConfigError("autoencoder: SAME padding needs an odd kernel");
  if (h == 0 || w == 0) throw ConfigError("autoencoder: empty input");
  return walk_steps(encoder, Shape{1, h, w}, *this, "encoder");
}

Shape AutoencoderSpec::output_shape(std::size_t h, std::size_t w) const {
  Shape out = walk_steps(decoder, feature_shape(h, w), *this, "decoder");
  if (out != Shape{1, h, w}) {
    throw ConfigError("autoencoder: decoder output " + shape_to_string(out) +
                      " does not match input [1," + std::to_string(h) + "," + std::to_string(w) + "]");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tower

template <typename T>
Tower<T>::Tower(TowerSpec spec, Rng& rng) : spec_(std::move(spec)) {
  spec_.validate();
  std::size_t in_channels = 1;
  for (std::size_t filters : spec_.conv_filters) {
    const std::size_t fan_in = in_channels * spec_.kernel * spec_.kernel;
    conv_.push_back({he_uniform<T>({filters, in_channels, spec_.kernel, spec_.kernel}, fan_in, rng),
                     BasicTensor<T>::zeros({filters}, true), BatchNormState<T>::make(filters)});
    in_channels = filters;
  }
  std::size_t width = spec_.flatten_size();
  for (std::size_t units : spec_.fc_sizes) {
    fc_.push_back({he_uniform<T>({units, width}, width, rng), BasicTensor<T>::zeros({units}, true)});
    width = units;
  }
}

template <typename T>
BasicTensor<T> Tower<T>::forward(const BasicTensor<T>& batch) {
  require_square_input(batch.shape(), spec_.input_size, "tower");
  BasicTensor<T> x = batch;
  for (auto& block : conv_) {
    x = conv2d(x, block.weight, block.bias);
    x = relu(x);
    x = maxpool2d(x, spec_.pool, spec_.pool);
    x = batchnorm(x, block.norm);
  }
  x = flatten(x);
  for (std::size_t i = 0; i < fc_.size(); ++i) {
    x = dense(x, fc_[i].weight, fc_[i].bias);
    if (i + 1 < fc_.size()) x = relu(x);
  }
  return x;
}

template <typename T>
std::vector<NamedTensor<T>> Tower<T>::parameters() const {
  std::vector<NamedTensor<T>> out;
  for (std::size_t i = 0; i < conv_.size(); ++i) {
    const std::string p = "conv" + std::to_string(i) + "/";
    out.push_back({p + "weight", conv_[i].weight});
    out.push_back({p + "bias", conv_[i].bias});
    out.push_back({p + "bn_gamma", conv_[i].norm.gamma});
    out.push_back({p + "bn_beta", conv_[i].norm.beta});
  }
  for (std::size_t i = 0; i < fc_.size(); ++i) {
    const std::string p = "fc" + std::to_string(i) + "/";
    out.push_back({p + "weight", fc_[i].weight});
    out.push_back({p + "bias", fc_[i].bias});
  }
  return out;
}

template <typename T>
std::vector<NamedTensor<T>> Tower<T>::buffers() const {
  std::vector<NamedTensor<T>> out;
  for (std::size_t i = 0; i < conv_.size(); ++i) {
    const std::string p = "conv" + std::to_string(i) + "/";
    out.push_back({p + "bn_running_mean", conv_[i].norm.running_mean});
    out.push_back({p + "bn_running_var", conv_[i].norm.running_var});
  }
  return out;
}

template <typename T>
void Tower<T>::set_training(bool training) {
  training_ = training;
  for (auto& block : conv_) block.norm.training = training;
}

// ---------------------------------------------------------------------------
// Spatial transformer

template <typename T>
SpatialTransformer<T>::SpatialTransformer(StnSpec spec, std::size_t input_size, Rng& rng)
    : spec_(std::move(spec)), input_size_(input_size) {
  spec_.validate(input_size_);
  std::size_t in_channels = 1;
  for (std::size_t i = 0; i < spec_.loc_conv_filters.size(); ++i) {
    const std::size_t k = spec_.loc_kernels[i];
    const std::size_t filters = spec_.loc_conv_filters[i];
    conv_weight_.push_back(he_uniform<T>({filters, in_channels, k, k}, in_channels * k * k, rng));
    conv_bias_.push_back(BasicTensor<T>::zeros({filters}, true));
    in_channels = filters;
  }
  std::size_t width = spec_.flatten_size(input_size_);
  for (std::size_t i = 0; i < spec_.loc_fc.size(); ++i) {
    const std::size_t units = spec_.loc_fc[i];
    if (i + 1 == spec_.loc_fc.size()) {
      fc_weight_.push_back(BasicTensor<T>::zeros({units, width}, true));
      fc_bias_.push_back(BasicTensor<T>({units}, {T(1), T(0), T(0), T(0), T(1), T(0)}, true));
    } else {
      fc_weight_.push_back(he_uniform<T>({units, width}, width, rng));
      fc_bias_.push_back(BasicTensor<T>::zeros({units}, true));
    }
    width = units;
  }
}

template <typename T>
BasicTensor<T> SpatialTransformer<T>::localize(const BasicTensor<T>& image) {
  require_square_input(image.shape(), input_size_, "stn");
  BasicTensor<T> x = image;
  for (std::size_t i = 0; i < conv_weight_.size(); ++i) {
    x = conv2d(x, conv_weight_[i], conv_bias_[i]);
    x = maxpool2d(x, spec_.loc_pool, spec_.loc_pool);
    x = relu(x);
  }
  x = flatten(x);
  for (std::size_t i = 0; i < fc_weight_.size(); ++i) {
    x = dense(x, fc_weight_[i], fc_bias_[i]);
    if (i + 1 < fc_weight_.size()) x = relu(x);
  }
  return reshape(x, {image.dim(0), 2, 3});
}

template <typename T>
BasicTensor<T> SpatialTransformer<T>::forward(const BasicTensor<T>& image) {
  const BasicTensor<T> theta = localize(image);
  return bilinear_sample(image, affine_grid(theta, image.dim(2), image.dim(3)));
}

template <typename T>
std::vector<NamedTensor<T>> SpatialTransformer<T>::parameters() const {
  std::vector<NamedTensor<T>> out;
  for (std::size_t i = 0; i < conv_weight_.size(); ++i) {
    out.push_back({"loc_conv" + std::to_string(i) + "/weight", conv_weight_[i]});
    out.push_back({"loc_conv" + std::to_string(i) + "/bias", conv_bias_[i]});
  }
  for (std::size_t i = 0; i < fc_weight_.size(); ++i) {
    out.push_back({"loc_fc" + std::to_string(i) + "/weight", fc_weight_[i]});
    out.push_back({"loc_fc" + std::to_string(i) + "/bias", fc_bias_[i]});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Autoencoder

template <typename T>
Autoencoder<T>::Autoencoder(AutoencoderSpec spec, Rng& rng) : spec_(std::move(spec)) {
  if (spec_.kernel % 2 == 0) throw ConfigError("autoencoder: SAME padding needs an odd kernel");
  std::size_t channels = 1;
  auto add_convs = [&](const std::vector<AeStep>& steps) {
    std::size_t count = 0;
    for (const AeStep& step : steps) {
      if (step.kind != AeStep::Kind::conv) continue;
      if (step.filters == 0) throw ConfigError("autoencoder: zero filters");
      const std::size_t fan_in = channels * spec_.kernel * spec_.kernel;
      weight_.push_back(he_uniform<T>({step.filters, channels, spec_.kernel, spec_.kernel}, fan_in, rng));
      bias_.push_back(BasicTensor<T>::zeros({step.filters}, true));
      channels = step.filters;
      ++count;
    }
    return count;
  };
  encoder_convs_ = add_convs(spec_.encoder);
  add_convs(spec_.decoder);
  if (encoder_convs_ == 0 || weight_.size() == encoder_convs_) {
    throw ConfigError("autoencoder: encoder and decoder each need at least one conv layer");
  }
  if (channels != 1) throw ConfigError("autoencoder: decoder must end with a single-channel conv");
}

template <typename T>
BasicTensor<T> Autoencoder<T>::run(const std::vector<AeStep>& steps, std::size_t first_conv,
                                   BasicTensor<T> x) {
  std::size_t remaining = 0;
  for (const AeStep& s : steps) remaining += s.kind == AeStep::Kind::conv ? 1 : 0;
  std::size_t conv_index = first_conv;
  const std::size_t padding = spec_.kernel / 2;
  for (const AeStep& step : steps) {
    switch (step.kind) {
      case AeStep::Kind::conv:
        x = conv2d(x, weight_[conv_index], bias_[conv_index], 1, padding);
        ++conv_index;
        x = --remaining == 0 ? sigmoid(x) : relu(x);
        break;
      case AeStep::Kind::pool:
        x = maxpool2d(x, spec_.pool, spec_.pool);
        break;
      case AeStep::Kind::upsample:
        x = upsample_nearest(x, spec_.upsample);
        break;
    }
  }
  return x;
}

template <typename T>
BasicTensor<T> Autoencoder<T>::encode(const BasicTensor<T>& image) {
  if (image.rank() != 4 || image.dim(1) != 1) {
    throw ShapeError("autoencoder: expected [N, 1, H, W], got " + shape_to_string(image.shape()));
  }
  (void)spec_.output_shape(image.dim(2), image.dim(3));
  return run(spec_.encoder, 0, image);
}

template <typename T>
BasicTensor<T> Autoencoder<T>::decode(const BasicTensor<T>& features) {
  return run(spec_.decoder, encoder_convs_, features);
}

template <typename T>
typename Autoencoder<T>::Output Autoencoder<T>::forward(const BasicTensor<T>& image) {
  BasicTensor<T> features = encode(image);
  BasicTensor<T> reconstruction = decode(features);
  return {std::move(features), std::move(reconstruction)};
}

template <typename T>
std::vector<NamedTensor<T>> Autoencoder<T>::parameters() const {
  std::vector<NamedTensor<T>> out;
  for (std::size_t i = 0; i < weight_.size(); ++i) {
    const bool enc = i < encoder_convs_;
    const std::string p = (enc ? "encoder/conv" : "decoder/conv") +
                          std::to_string(enc ? i : i - encoder_convs_) + "/";
    out.push_back({p + "weight", weight_[i]});
    out.push_back({p + "bias", bias_[i]});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Siamese model

template <typename T>
SiameseModel<T>::SiameseModel(ModelSpec spec, Rng& rng) : spec_(std::move(spec)), tower_(spec_.tower, rng) {
  if (spec_.stn) stn_.emplace(*spec_.stn, spec_.tower.input_size, rng);
}

template <typename T>
BasicTensor<T> SiameseModel<T>::embed(const BasicTensor<T>& batch) {
  if (stn_) return tower_.forward(stn_->forward(batch));
  return tower_.forward(batch);
}

template <typename T>
BasicTensor<T> SiameseModel<T>::forward(const BasicTensor<T>& a, const BasicTensor<T>& b,
                                        DistanceKind metric) {
  if (a.shape() != b.shape()) {
    throw ShapeError("siamese: branch inputs differ in shape " + shape_to_string(a.shape()) + " vs " +
                     shape_to_string(b.shape()));
  }
  const std::size_t n = a.dim(0);
  const BasicTensor<T> embeddings = embed(concat_batch(a, b));
  return distance(metric, slice_batch(embeddings, 0, n), slice_batch(embeddings, n, n));
}

template <typename T>
std::vector<NamedTensor<T>> SiameseModel<T>::parameters() const {
  std::vector<NamedTensor<T>> out;
  for (auto& p : tower_.parameters()) out.push_back({"tower/" + p.name, p.tensor});
  if (stn_) {
    for (auto& p : stn_->parameters()) out.push_back({"stn/" + p.name, p.tensor});
  }
  return out;
}

template <typename T>
std::vector<NamedTensor<T>> SiameseModel<T>::buffers() const {
  std::vector<NamedTensor<T>> out;
  for (auto& p : tower_.buffers()) out.push_back({"tower/" + p.name, p.tensor});
  return out;
}

template <typename T>
std::vector<NamedTensor<T>> SiameseModel<T>::state_tensors() const {
  auto out = parameters();
  for (auto& b : buffers()) out.push_back(std::move(b));
  return out;
}

template class Tower<float>;
template class Tower<double>;
template class SpatialTransformer<float>;
template class SpatialTransformer<double>;
template class Autoencoder<float>;
template class Autoencoder<double>;
template class SiameseModel<float>;
template class SiameseModel<double>;

}  // namespace sddi
