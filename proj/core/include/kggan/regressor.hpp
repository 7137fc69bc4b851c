// Copyright 2026 The kggan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "kggan/layers.hpp"
#include "kggan/optimizer.hpp"
#include "kggan/semantics.hpp"
#include "kggan/synth_data.hpp"

namespace kggan {

struct RegressorConfig {
  std::size_t hidden1 = 128;
  std::size_t hidden2 = 64;
  std::size_t steps = 2000;
  std::size_t batch_size = 32;
  AdamConfig adam{1e-3, 0.9, 0.999, 1e-8};
  std::uint64_t seed = 7;
  // Early stop when the mean loss of a window improves on the previous
  // window by less than this relative amount. 0 disables.
  std::size_t plateau_window = 250;
  double plateau_tolerance = 1e-3;
  // Sees the category ids of every training batch.
  std::function<void(std::span<const int>)> batch_observer;
};

/// Image -> embedding MLP [3HW -> hidden1 -> hidden2 -> d] with leaky-relu
/// hidden layers and a sigmoid output. The hidden2 activations double as the
/// Frechet feature space.
class RegressorModel {
 public:
  RegressorModel() = default;
  RegressorModel(std::size_t image_size, std::size_t embedding_dim, std::size_t hidden1, std::size_t hidden2,
                 Rng& rng);

  std::size_t image_size() const { return image_size_; }
  std::size_t input_dim() const { return 3 * image_size_ * image_size_; }
  std::size_t embedding_dim() const { return layers_.back().out_dim(); }
  std::size_t feature_dim() const { return layers_[1].out_dim(); }

  bool frozen() const { return frozen_; }
  void freeze();

  const std::vector<double>& training_loss_history() const { return loss_history_; }
  std::vector<double>& mutable_loss_history() { return loss_history_; }

  /// Forward pass over images [batch, 3, H, W] (or flattened [batch, 3HW]).
  /// Parameters are bound as tracked parameters unless the model is frozen,
  /// so gradients still reach the input either way. features, when given,
  /// receives the penultimate activations.
  Var forward(Tape& tape, Var images, Var* features = nullptr);
  /// Same computation with parameters held constant.
  Var forward(Tape& tape, Var images, Var* features = nullptr) const;

  ParameterList parameters();
  std::uint64_t parameter_hash() const;

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

 private:
  Var run(Tape& tape, Var images, Var* features, bool track) const;

  std::size_t image_size_ = 0;
  std::vector<DenseLayer> layers_;
  bool frozen_ = false;
  std::vector<double> loss_history_;
};

/// Fits E to ||E(x) - v_y||^2 on seen-category samples. Throws a contract
/// error if any sample belongs to an unseen category or lacks an embedding.
RegressorModel train_embedder(std::span<const Sample> seen_samples, const EmbeddingTable& embeddings,
                              const SplitPlan& split, std::size_t image_size, const RegressorConfig& config);

/// Marks the model frozen; its parameters stop receiving gradients.
RegressorModel freeze(RegressorModel model);

std::vector<double> predict_embedding(const RegressorModel& model, const Tensor& image);

/// Penultimate-layer features, one row per image.
std::vector<std::vector<double>> extract_features(const RegressorModel& model, std::span<const Tensor> images);

/// Stacks images [3, H, W] into one batch tensor [n, 3, H, W].
Tensor stack_images(std::span<const Tensor> images);

}  // namespace kggan
