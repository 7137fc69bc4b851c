// Copyright 2026 The kggan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kggan/linalg.hpp"
#include "kggan/tensor.hpp"

namespace kggan {

using Rgb = std::array<double, 3>;

enum class FlowerShape { kDisk, kRing, kCross, kPetals };

std::string_view to_string(FlowerShape shape);

/// Procedural recipe for one synthetic flower category.
struct CategorySpec {
  int id = 0;
  Rgb base_color{};
  FlowerShape shape = FlowerShape::kDisk;
  double texture_freq = 0.0;  // stripes per image width; 0 means untextured
  std::vector<std::string> descriptions;
};

struct Sample {
  Tensor image;  // [3, H, W], values in [-1, 1]
  int category_id = 0;
};

struct SplitPlan {
  std::set<int> seen_ids;
  std::set<int> unseen_ids;
  std::uint64_t seed = 0;

  bool is_seen(int id) const { return seen_ids.contains(id); }
  bool is_unseen(int id) const { return unseen_ids.contains(id); }
};

struct RenderConfig {
  std::size_t image_size = 16;
  double background = 0.05;       // dark background level in [0, 1]
  double color_jitter = 0.05;     // +- per channel, uniform
  double position_jitter = 0.08;  // +- fraction of the side, uniform
  double scale_jitter = 0.10;     // +- relative radius, uniform
  double radius_fraction = 0.35;  // nominal radius / side
  double pixel_noise = 0.02;      // Gaussian sigma per pixel
  double texture_depth = 0.35;    // max relative darkening inside a stripe
};

/// Dominant channel (0 = R, 1 = G, 2 = B); ties resolve to the lower index.
int dominant_channel(const Rgb& color);

/// Name of the nearest palette color; always one of the palette words.
std::string color_word(const Rgb& color);
std::string_view shape_word(FlowerShape shape);
std::string_view texture_word(double texture_freq);

/// Renders one image of the category. Deterministic in (spec, instance_seed).
Sample render_sample(const CategorySpec& spec, std::uint64_t instance_seed, const RenderConfig& config = {});

/// Foreground mask of the nominal (unjittered) shape, row-major [H * W].
std::vector<bool> nominal_mask(FlowerShape shape, const RenderConfig& config);

/// n template sentences naming the category's color, texture and shape.
std::vector<std::string> describe_category(const CategorySpec& spec, std::size_t n);

struct CropWindow {
  std::size_t x0 = 0;
  std::size_t y0 = 0;
  std::size_t size = 0;
  bool flip = false;
};

enum class FlipMode { kRandom, kNever, kAlways };

/// Crop placement for a seed: size = max(1, round(fraction * side)); then,
/// from std::mt19937_64(seed), x0 = draw % (side - size + 1),
/// y0 = draw % (side - size + 1), flip = top bit of the next draw.
CropWindow crop_window(std::uint64_t seed, std::size_t side, double crop_fraction);

Tensor horizontal_flip(const Tensor& image);

/// Random crop resized back with nearest-neighbour sampling, then an
/// optional horizontal flip. crop_fraction must lie in [0.5, 1].
Tensor augment_flip_crop(const Tensor& image, std::uint64_t seed, double crop_fraction,
                         FlipMode flip_mode = FlipMode::kRandom);

struct ColorBasis {
  SquareMatrix covariance;  // 3x3 over all pixels of the set
  std::array<double, 3> eigenvalues{};
  std::array<Rgb, 3> eigenvectors{};  // eigenvectors[k] pairs with eigenvalues[k]
};

ColorBasis rgb_principal_components(std::span<const Tensor> images);

/// Adds sum_k alpha_k * lambda_k * e_k to every pixel of each image, with
/// alpha ~ N(0, sigma) drawn per image, then clamps to [-1, 1].
std::vector<Tensor> augment_pca_color(std::span<const Tensor> images, std::uint64_t magnitude_seed,
                                      double sigma = 0.1);

/// Same perturbation with caller-supplied alphas, one triple per image.
std::vector<Tensor> augment_pca_color_with(std::span<const Tensor> images, std::span<const Rgb> alphas);

/// Seeded Fisher-Yates shuffle of the ids; the last n_unseen are unseen.
SplitPlan make_split(std::vector<int> category_ids, std::size_t n_unseen, std::uint64_t seed);

struct DatasetConfig {
  std::size_t n_categories = 12;
  std::size_t images_per_category = 80;
  std::size_t image_size = 16;
  std::size_t descriptions_per_category = 10;
  std::uint64_t seed = 1;
};

/// Deterministic category recipes: colors cycle through a palette, shapes
/// change every palette cycle, textures every palette x shape cycle.
std::vector<CategorySpec> make_category_specs(const DatasetConfig& config);

struct Dataset {
  std::size_t image_size = 0;
  std::vector<CategorySpec> categories;
  std::vector<Sample> samples;

  std::vector<int> category_ids() const;
  const CategorySpec& category(int id) const;
  /// Indices into samples for one category.
  std::vector<std::size_t> indices_of(int category_id) const;
  std::vector<Tensor> images_of(int category_id) const;
};

Dataset generate_dataset(const DatasetConfig& config);

/// Mean foreground color (in [0, 1] units) over pixels whose brightest
/// channel exceeds threshold; returns false when no pixel qualifies.
bool mean_foreground_color(const Tensor& image, Rgb& out, double threshold = 0.3);

}  // namespace kggan
