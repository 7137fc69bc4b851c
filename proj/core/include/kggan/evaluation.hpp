// Copyright 2026 The kggan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "kggan/gan.hpp"
#include "kggan/linalg.hpp"
#include "kggan/regressor.hpp"
#include "kggan/semantics.hpp"
#include "kggan/synth_data.hpp"

namespace kggan {

struct GaussianStats {
  std::vector<double> mean;
  SquareMatrix covariance;  // unbiased
  std::size_t sample_count = 0;
};

/// Mean and unbiased covariance of feature rows (at least 2).
GaussianStats gaussian_stats(const std::vector<std::vector<double>>& rows);

/// Statistics of the extractor's penultimate-layer features.
GaussianStats feature_stats(std::span<const Tensor> images, const RegressorModel& extractor);

/// ||mu1 - mu2||^2 + tr(S1 + S2 - 2 (S1^1/2 S2 S1^1/2)^1/2), clamped at 0.
/// Eigenvalues of the inner product below zero are clamped; below -1e-6 a
/// warning is emitted.
double frechet_distance(const GaussianStats& p, const GaussianStats& q);

/// Supplies images for a category, e.g. a trained generator.
class ImageSource {
 public:
  virtual ~ImageSource() = default;
  virtual std::vector<Tensor> images(int category_id, std::size_t n) = 0;
};

/// Draws from a generator; the noise for a category depends only on the
/// seed and the category id.
class GeneratorSource : public ImageSource {
 public:
  GeneratorSource(GanModel& model, const ConditionSource& conditions, std::uint64_t seed)
      : model_(&model), conditions_(&conditions), seed_(seed) {}
  std::vector<Tensor> images(int category_id, std::size_t n) override;

 private:
  GanModel* model_;
  const ConditionSource* conditions_;
  std::uint64_t seed_;
};

/// Returns the dataset's own images of the category; n is ignored.
class PassThroughSource : public ImageSource {
 public:
  explicit PassThroughSource(const Dataset& dataset) : dataset_(&dataset) {}
  std::vector<Tensor> images(int category_id, std::size_t) override { return dataset_->images_of(category_id); }

 private:
  const Dataset* dataset_;
};

struct FidReport {
  std::map<int, double> per_category;
  double seen_avg = 0.0;
  double unseen_avg = 0.0;
  std::vector<int> skipped;  // categories with fewer than 2 real images
};

/// Fills the seen and unseen averages from the per-category entries.
void summarize(FidReport& report, const SplitPlan& split);

/// Per-category Frechet distance between generated and real images,
/// averaged separately over seen and unseen categories.
FidReport per_category_fid(ImageSource& source, const Dataset& real, const SplitPlan& split,
                           const RegressorModel& extractor, std::size_t n_gen);

/// Per category, mean ||E(x') - v||^2 over n_gen generated images.
std::map<int, double> embedding_consistency(ImageSource& source, const RegressorModel& embedder,
                                            const EmbeddingTable& embeddings, std::span<const int> category_ids,
                                            std::size_t n_gen);

/// Per category, the fraction of generated images whose mean foreground
/// color has the same dominant channel as the category's base color.
std::map<int, double> color_fidelity(ImageSource& source, std::span<const CategorySpec> specs,
                                     std::span<const int> category_ids, std::size_t n_gen);

/// Mean of the map's values over the given ids (NaN when none are present).
double mean_over(const std::map<int, double>& values, std::span<const int> ids);

}  // namespace kggan
