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

// Network definitions: the Siamese embedding tower, the spatial transformer
// that can precede it, and the convolutional autoencoder baseline.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sddi/objective.hpp"
#include "sddi/ops.hpp"
#include "sddi/rng.hpp"
#include "sddi/tensor.hpp"

namespace sddi {

template <typename T>
struct NamedTensor {
  std::string name;
  BasicTensor<T> tensor;
};

//! Embedding tower: per conv block conv(valid) -> relu -> maxpool -> batchnorm,
//! then dense layers (relu on all but the last, which is linear).
struct TowerSpec {
  std::size_t input_size = 500;
  std::vector<std::size_t> conv_filters{64, 128, 128, 256};
  std::size_t kernel = 9;
  std::size_t pool = 3;
  std::vector<std::size_t> fc_sizes{256, 128, 20};

  std::size_t embedding_dim() const { return fc_sizes.empty() ? 0 : fc_sizes.back(); }
  //! Spatial side after each conv and each pool, starting from input_size.
  //! Throws ConfigError when any stage would drop below one pixel.
  std::vector<std::size_t> shape_chain() const;
  std::size_t flatten_size() const;
  void validate() const;

  bool operator==(const TowerSpec&) const = default;
};

//! Localisation network: conv(k0) -> pool -> relu -> conv(k1) -> pool -> relu
//! -> dense(relu) -> dense(6, linear), producing theta row-major as
//! [t11 t12 t13 t21 t22 t23].
struct StnSpec {
  std::vector<std::size_t> loc_conv_filters{8, 10};
  std::vector<std::size_t> loc_kernels{7, 5};
  std::size_t loc_pool = 2;
  std::vector<std::size_t> loc_fc{32, 6};

  std::size_t flatten_size(std::size_t input_size) const;
  void validate(std::size_t input_size) const;

  bool operator==(const StnSpec&) const = default;
};

struct AeStep {
  enum class Kind { conv, pool, upsample };
  Kind kind;
  std::size_t filters = 0;
};

//! SAME-padded conv stack. The last conv of the encoder and of the decoder
//! uses sigmoid, every other conv relu.
struct AutoencoderSpec {
  std::vector<AeStep> encoder;
  std::vector<AeStep> decoder;
  std::size_t kernel = 3;
  std::size_t pool = 2;
  std::size_t upsample = 2;

  static AutoencoderSpec standard();
  //! Feature map shape {C, H, W} for an input of h x w. Throws ConfigError
  //! when pooling does not divide the input or the decoder cannot restore it.
  Shape feature_shape(std::size_t h, std::size_t w) const;
  //! Reconstruction shape {C, H, W}.
  Shape output_shape(std::size_t h, std::size_t w) const;
};

template <typename T>
class Tower {
 public:
  //! He-uniform weights (bound sqrt(6 / fan_in)), zero biases.
  Tower(TowerSpec spec, Rng& rng);

  //! [N, 1, S, S] -> [N, embedding_dim].
  BasicTensor<T> forward(const BasicTensor<T>& batch);

  const TowerSpec& spec() const { return spec_; }
  std::vector<NamedTensor<T>> parameters() const;
  //! Batch-norm running statistics.
  std::vector<NamedTensor<T>> buffers() const;
  void set_training(bool training);
  bool training() const { return training_; }

 private:
  struct ConvBlock {
    BasicTensor<T> weight;
    BasicTensor<T> bias;
    BatchNormState<T> norm;
  };
  struct DenseLayer {
    BasicTensor<T> weight;
    BasicTensor<T> bias;
  };

  TowerSpec spec_;
  std::vector<ConvBlock> conv_;
  std::vector<DenseLayer> fc_;
  bool training_ = true;
};

template <typename T>
class SpatialTransformer {
 public:
  //! Final layer starts at zero weights and identity bias, so a fresh
  //! transformer returns its input unchanged.
  SpatialTransformer(StnSpec spec, std::size_t input_size, Rng& rng);

  //! [N, 1, S, S] -> theta [N, 2, 3].
  BasicTensor<T> localize(const BasicTensor<T>& image);
  //! bilinear_sample(image, affine_grid(localize(image))).
  BasicTensor<T> forward(const BasicTensor<T>& image);

  const StnSpec& spec() const { return spec_; }
  std::vector<NamedTensor<T>> parameters() const;

 private:
  StnSpec spec_;
  std::size_t input_size_;
  std::vector<BasicTensor<T>> conv_weight_, conv_bias_, fc_weight_, fc_bias_;
};

template <typename T>
class Autoencoder {
 public:
  Autoencoder(AutoencoderSpec spec, Rng& rng);

  struct Output {
    BasicTensor<T> features;
    BasicTensor<T> reconstruction;
  };

  BasicTensor<T> encode(const BasicTensor<T>& image);
  BasicTensor<T> decode(const BasicTensor<T>& features);
  Output forward(const BasicTensor<T>& image);

  const AutoencoderSpec& spec() const { return spec_; }
  std::vector<NamedTensor<T>> parameters() const;
  std::size_t epochs_trained() const { return epochs_trained_; }
  void set_epochs_trained(std::size_t epochs) { epochs_trained_ = epochs; }

 private:
  BasicTensor<T> run(const std::vector<AeStep>& steps, std::size_t first_conv, BasicTensor<T> x);

  AutoencoderSpec spec_;
  std::vector<BasicTensor<T>> weight_, bias_;
  std::size_t encoder_convs_ = 0;
  std::size_t epochs_trained_ = 0;
};

struct ModelSpec {
  TowerSpec tower;
  std::optional<StnSpec> stn;

  bool operator==(const ModelSpec&) const = default;
};

//! Siamese model: one tower (and optional transformer) shared by both branches.
template <typename T>
class SiameseModel {
 public:
  SiameseModel(ModelSpec spec, Rng& rng);

  //! Transformer (if any) followed by the tower.
  BasicTensor<T> embed(const BasicTensor<T>& batch);
  //! Distances between the embeddings of a[i] and b[i]. Both branches run as
  //! one concatenated batch through the same layers.
  BasicTensor<T> forward(const BasicTensor<T>& a, const BasicTensor<T>& b, DistanceKind metric);

  const ModelSpec& spec() const { return spec_; }
  Tower<T>& tower() { return tower_; }
  const Tower<T>& branch_a() const { return tower_; }
  const Tower<T>& branch_b() const { return tower_; }
  SpatialTransformer<T>* stn() { return stn_ ? &*stn_ : nullptr; }

  //! Trainable tensors, prefixed "tower/" and "stn/".
  std::vector<NamedTensor<T>> parameters() const;
  std::vector<NamedTensor<T>> buffers() const;
  //! Parameters then buffers, in a fixed order.
  std::vector<NamedTensor<T>> state_tensors() const;
  void set_training(bool training) { tower_.set_training(training); }

 private:
  ModelSpec spec_;
  Tower<T> tower_;
  std::optional<SpatialTransformer<T>> stn_;
};

using ModelState = SiameseModel<float>;

template <typename T>
BasicTensor<T> tower_forward(SiameseModel<T>& model, const BasicTensor<T>& batch) {
  return model.tower().forward(batch);
}

template <typename T>
BasicTensor<T> siamese_forward(SiameseModel<T>& model, const BasicTensor<T>& a, const BasicTensor<T>& b,
                               DistanceKind metric) {
  return model.forward(a, b, metric);
}

template <typename T>
BasicTensor<T> stn_forward(SpatialTransformer<T>& stn, const BasicTensor<T>& image) {
  return stn.forward(image);
}

}  // namespace sddi
