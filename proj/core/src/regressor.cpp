// Copyright 2026 The kggan Authors
// SPDX-License-Identifier: Apache-2.0

#include "kggan/regressor.hpp"

#include <algorithm>
#include <cmath>

#include "kggan/error.hpp"
#include "kggan/hash.hpp"

namespace kggan {

RegressorModel::RegressorModel(std::size_t image_size, std::size_t embedding_dim, std::size_t hidden1,
                               std::size_t hidden2, Rng& rng)
    : image_size_(image_size) {
  require(image_size >= 1 && embedding_dim >= 1 && hidden1 >= 1 && hidden2 >= 1, ErrorKind::kConfig,
          "regressor: all layer widths must be positive");
  layers_.emplace_back(3 * image_size * image_size, hidden1, rng);
  layers_.emplace_back(hidden1, hidden2, rng);
  layers_.emplace_back(hidden2, embedding_dim, rng);
}

void RegressorModel::freeze() {
  frozen_ = true;
  for (auto& layer : layers_) {
    layer.weight.set_requires_grad(false);
    layer.bias.set_requires_grad(false);
    layer.weight.clear_grad();
    layer.bias.clear_grad();
  }
}

Var RegressorModel::run(Tape& tape, Var images, Var* features, bool track) const {
  const Tensor& x = tape.value(images);
  require(x.rank() >= 2 && x.size() / x.dim(0) == input_dim(), ErrorKind::kDimension,
          "regressor: input " + shape_string(x.shape()) + " does not match image size " +
              std::to_string(image_size_));
  Var h = x.rank() == 2 ? images : tape.reshape(images, {x.dim(0), input_dim()});
  auto bind = [&](const Tensor& t) {
    return track ? tape.parameter(const_cast<Tensor&>(t)) : tape.reference(t);
  };
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = tape.affine(h, bind(layers_[i].weight), bind(layers_[i].bias));
    if (i + 1 < layers_.size()) {
      h = tape.leaky_relu(h, kLeakySlope);
      if (i + 2 == layers_.size() && features) *features = h;
    }
  }
  return tape.sigmoid(h);
}

Var RegressorModel::forward(Tape& tape, Var images, Var* features) {
  return run(tape, images, features, !frozen_);
}

Var RegressorModel::forward(Tape& tape, Var images, Var* features) const {
  return run(tape, images, features, false);
}

ParameterList RegressorModel::parameters() {
  ParameterList list;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    list.add("embedder.layer" + std::to_string(i) + ".weight", layers_[i].weight);
    list.add("embedder.layer" + std::to_string(i) + ".bias", layers_[i].bias);
  }
  return list;
}

std::uint64_t RegressorModel::parameter_hash() const {
  Fnv1a64 h;
  for (const auto& layer : layers_) {
    h.update(layer.weight.data());
    h.update(layer.bias.data());
  }
  return h.digest();
}

Tensor stack_images(std::span<const Tensor> images) {
  require(!images.empty(), ErrorKind::kContract, "stack_images: no images");
  const Shape& s = images.front().shape();
  Shape out_shape{images.size()};
  out_shape.insert(out_shape.end(), s.begin(), s.end());
  std::vector<double> data;
  data.reserve(images.size() * images.front().size());
  for (const Tensor& img : images) {
    require(img.shape() == s, ErrorKind::kDimension,
            "stack_images: mixed shapes " + shape_string(s) + " and " + shape_string(img.shape()));
    data.insert(data.end(), img.data().begin(), img.data().end());
  }
  return Tensor(std::move(out_shape), std::move(data));
}

RegressorModel train_embedder(std::span<const Sample> seen_samples, const EmbeddingTable& embeddings,
                              const SplitPlan& split, std::size_t image_size, const RegressorConfig& config) {
  std::size_t dim = 0;
  for (const Sample& s : seen_samples) {
    require(!split.is_unseen(s.category_id), ErrorKind::kContract,
            "train_embedder: sample of unseen category " + std::to_string(s.category_id) + " in training data");
    require(split.is_seen(s.category_id), ErrorKind::kContract,
            "train_embedder: category " + std::to_string(s.category_id) + " is not in the seen split");
    auto it = embeddings.find(s.category_id);
    require(it != embeddings.end(), ErrorKind::kContract,
            "train_embedder: no embedding for category " + std::to_string(s.category_id));
    dim = it->second.vector.size();
  }
  require(!seen_samples.empty() || config.steps == 0, ErrorKind::kContract, "train_embedder: no samples");
  if (dim == 0 && !embeddings.empty()) dim = embeddings.begin()->second.vector.size();
  require(dim > 0, ErrorKind::kContract, "train_embedder: no embeddings");

  Rng rng(config.seed);
  RegressorModel model(image_size, dim, config.hidden1, config.hidden2, rng);
  ParameterList params = model.parameters();
  OptimizerState opt(config.adam, params.tensors);

  std::vector<Tensor> batch_images;
  std::vector<int> batch_ids;
  double previous_window = -1.0;
  double window_sum = 0.0;
  for (std::size_t step = 0; step < config.steps; ++step) {
    batch_images.clear();
    batch_ids.clear();
    Tensor targets({config.batch_size, dim});
    for (std::size_t b = 0; b < config.batch_size; ++b) {
      const Sample& s = seen_samples[rng.below(seen_samples.size())];
      batch_images.push_back(s.image);
      batch_ids.push_back(s.category_id);
      const auto& v = embeddings.at(s.category_id).vector;
      std::copy(v.begin(), v.end(), targets.data().begin() + b * dim);
    }
    if (config.batch_observer) config.batch_observer(batch_ids);

    Tape tape;
    Var x = tape.constant(stack_images(batch_images));
    Var pred = model.forward(tape, x);
    Var loss = tape.mean(tape.row_squared_norm(tape.sub(pred, tape.constant(std::move(targets)))));
    const double loss_value = tape.value(loss)[0];
    require(std::isfinite(loss_value), ErrorKind::kNumerical, "train_embedder: non-finite loss");
    params.zero_grad();
    tape.backward(loss);
    optimizer_step(params.tensors, params.names, opt);
    model.mutable_loss_history().push_back(loss_value);

    window_sum += loss_value;
    if (config.plateau_window > 0 && (step + 1) % config.plateau_window == 0) {
      const double window_mean = window_sum / static_cast<double>(config.plateau_window);
      window_sum = 0.0;
      if (previous_window > 0.0 && previous_window - window_mean < config.plateau_tolerance * previous_window) break;
      previous_window = window_mean;
    }
  }
  params.zero_grad();
  return model;
}

RegressorModel freeze(RegressorModel model) {
  model.freeze();
  return model;
}

std::vector<double> predict_embedding(const RegressorModel& model, const Tensor& image) {
  require(image.size() == model.input_dim(), ErrorKind::kDimension,
          "predict_embedding: image " + shape_string(image.shape()) + " does not match trained size " +
              std::to_string(model.image_size()));
  Tape tape;
  Var x = tape.constant(image.reshaped({1, model.input_dim()}));
  Var y = model.forward(tape, x);
  const auto out = tape.value(y).data();
  return {out.begin(), out.end()};
}

std::vector<std::vector<double>> extract_features(const RegressorModel& model, std::span<const Tensor> images) {
  std::vector<std::vector<double>> rows;
  if (images.empty()) return rows;
  constexpr std::size_t kChunk = 256;
  for (std::size_t start = 0; start < images.size(); start += kChunk) {
    const std::size_t n = std::min(kChunk, images.size() - start);
    Tape tape;
    Var x = tape.constant(stack_images(images.subspan(start, n)));
    Var features;
    model.forward(tape, x, &features);
    const Tensor& f = tape.value(features);
    const std::size_t d = f.dim(1);
    for (std::size_t r = 0; r < n; ++r)
      rows.emplace_back(f.data().begin() + r * d, f.data().begin() + (r + 1) * d);
  }
  return rows;
}

}  // namespace kggan
