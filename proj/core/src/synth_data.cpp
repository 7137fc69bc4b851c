// Copyright 2026 The kggan Authors
// SPDX-License-Identifier: Apache-2.0

#include "kggan/synth_data.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "kggan/error.hpp"
#include "kggan/rng.hpp"

namespace kggan {
namespace {

struct PaletteEntry {
  const char* name;
  Rgb color;
};

constexpr std::array<PaletteEntry, 6> kPalette{{
    {"red", {0.90, 0.15, 0.12}},
    {"green", {0.15, 0.80, 0.20}},
    {"blue", {0.15, 0.25, 0.90}},
    {"orange", {0.95, 0.50, 0.10}},
    {"purple", {0.50, 0.10, 0.90}},
    {"teal", {0.10, 0.75, 0.50}},
}};

constexpr std::array<FlowerShape, 4> kShapes{FlowerShape::kDisk, FlowerShape::kRing, FlowerShape::kCross,
                                             FlowerShape::kPetals};

constexpr std::array<double, 3> kTextures{0.0, 2.0, 4.0};

bool inside_shape(FlowerShape shape, double dx, double dy, double radius) {
  const double r = std::hypot(dx, dy);
  switch (shape) {
    case FlowerShape::kDisk:
      return r <= radius;
    case FlowerShape::kRing:
      return r <= radius && r >= 0.5 * radius;
    case FlowerShape::kCross:
      return std::max(std::abs(dx), std::abs(dy)) <= radius &&
             (std::abs(dx) <= 0.3 * radius || std::abs(dy) <= 0.3 * radius);
    case FlowerShape::kPetals: {
      const double theta = std::atan2(dy, dx);
      return r <= radius * (0.45 + 0.55 * std::abs(std::cos(2.5 * theta)));
    }
  }
  return false;
}

std::size_t side_of(const Tensor& image) {
  require(image.rank() == 3 && image.dim(0) == 3 && image.dim(1) == image.dim(2), ErrorKind::kDimension,
          "expected an image of shape [3, H, H], got " + shape_string(image.shape()));
  return image.dim(1);
}

}  // namespace

std::string_view to_string(FlowerShape shape) {
  switch (shape) {
    case FlowerShape::kDisk:
      return "disk";
    case FlowerShape::kRing:
      return "ring";
    case FlowerShape::kCross:
      return "cross";
    case FlowerShape::kPetals:
      return "petals";
  }
  return "?";
}

int dominant_channel(const Rgb& color) {
  int best = 0;
  for (int c = 1; c < 3; ++c)
    if (color[c] > color[best]) best = c;
  return best;
}

std::string color_word(const Rgb& color) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < kPalette.size(); ++i) {
    double d = 0.0;
    for (int c = 0; c < 3; ++c) d += (color[c] - kPalette[i].color[c]) * (color[c] - kPalette[i].color[c]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return kPalette[best].name;
}

std::string_view shape_word(FlowerShape shape) {
  switch (shape) {
    case FlowerShape::kDisk:
      return "round";
    case FlowerShape::kRing:
      return "ring";
    case FlowerShape::kCross:
      return "cross";
    case FlowerShape::kPetals:
      return "star";
  }
  return "round";
}

std::string_view texture_word(double texture_freq) {
  if (texture_freq <= 0.0) return "smooth";
  if (texture_freq < 3.0) return "striped";
  return "banded";
}

Sample render_sample(const CategorySpec& spec, std::uint64_t instance_seed, const RenderConfig& config) {
  require(config.image_size >= 8, ErrorKind::kConfig,
          "image size must be at least 8, got " + std::to_string(config.image_size));
  const std::size_t side = config.image_size;
  const double s = static_cast<double>(side);
  Rng rng(derive_seed(instance_seed, static_cast<std::uint64_t>(spec.id)));

  Rgb color;
  for (int c = 0; c < 3; ++c)
    color[c] = std::clamp(spec.base_color[c] + rng.uniform(-config.color_jitter, config.color_jitter), 0.0, 1.0);
  const double cx = 0.5 * s + rng.uniform(-config.position_jitter, config.position_jitter) * s;
  const double cy = 0.5 * s + rng.uniform(-config.position_jitter, config.position_jitter) * s;
  const double radius =
      config.radius_fraction * s * (1.0 + rng.uniform(-config.scale_jitter, config.scale_jitter));

  Tensor image({3, side, side});
  auto px = image.data();
  for (std::size_t y = 0; y < side; ++y) {
    for (std::size_t x = 0; x < side; ++x) {
      const double dx = static_cast<double>(x) + 0.5 - cx;
      const double dy = static_cast<double>(y) + 0.5 - cy;
      const bool fg = inside_shape(spec.shape, dx, dy, radius);
      double shade = 1.0;
      if (fg && spec.texture_freq > 0.0) {
        const double phase = 2.0 * std::numbers::pi * spec.texture_freq * (static_cast<double>(x) + 0.5) / s;
        shade = 1.0 - config.texture_depth * (0.5 + 0.5 * std::sin(phase));
      }
      for (std::size_t c = 0; c < 3; ++c) {
        double v = fg ? color[c] * shade : config.background;
        v += config.pixel_noise * rng.normal();
        v = std::clamp(v, 0.0, 1.0);
        px[(c * side + y) * side + x] = 2.0 * v - 1.0;
      }
    }
  }
  return Sample{std::move(image), spec.id};
}

std::vector<bool> nominal_mask(FlowerShape shape, const RenderConfig& config) {
  const std::size_t side = config.image_size;
  const double s = static_cast<double>(side);
  std::vector<bool> mask(side * side);
  for (std::size_t y = 0; y < side; ++y)
    for (std::size_t x = 0; x < side; ++x)
      mask[y * side + x] = inside_shape(shape, static_cast<double>(x) + 0.5 - 0.5 * s,
                                        static_cast<double>(y) + 0.5 - 0.5 * s, config.radius_fraction * s);
  return mask;
}

std::vector<std::string> describe_category(const CategorySpec& spec, std::size_t n) {
  require(n >= 1, ErrorKind::kContract, "describe_category: n must be at least 1");
  const std::string color = color_word(spec.base_color);
  const std::string shape(shape_word(spec.shape));
  const std::string texture(texture_word(spec.texture_freq));
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    switch (i % 5) {
      case 0:
        out.push_back("a " + color + " flower with " + texture + " petals and a " + shape + " center");
        break;
      case 1:
        out.push_back("this flower has " + texture + " " + color + " petals in a " + shape + " pattern");
        break;
      case 2:
        out.push_back("the petals of this flower are " + color + " and " + texture + " with a " + shape + " form");
        break;
      case 3:
        out.push_back("a " + shape + " bloom with " + color + " " + texture + " petals");
        break;
      default:
        out.push_back("this " + color + " flower is " + shape + " and its petals are " + texture);
        break;
    }
  }
  return out;
}

CropWindow crop_window(std::uint64_t seed, std::size_t side, double crop_fraction) {
  require(crop_fraction >= 0.5 && crop_fraction <= 1.0, ErrorKind::kConfig,
          "crop_fraction must lie in [0.5, 1], got " + std::to_string(crop_fraction));
  CropWindow w;
  w.size = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(crop_fraction * static_cast<double>(side))));
  w.size = std::min(w.size, side);
  std::mt19937_64 engine(seed);
  const std::uint64_t range = side - w.size + 1;
  w.x0 = engine() % range;
  w.y0 = engine() % range;
  w.flip = (engine() >> 63) != 0;
  return w;
}

Tensor horizontal_flip(const Tensor& image) {
  const std::size_t side = side_of(image);
  Tensor out = image;
  out.clear_grad();
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < side; ++y)
      for (std::size_t x = 0; x < side; ++x)
        out[(c * side + y) * side + x] = image[(c * side + y) * side + (side - 1 - x)];
  return out;
}

Tensor augment_flip_crop(const Tensor& image, std::uint64_t seed, double crop_fraction, FlipMode flip_mode) {
  const std::size_t side = side_of(image);
  const CropWindow w = crop_window(seed, side, crop_fraction);
  Tensor out({3, side, side});
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < side; ++y)
      for (std::size_t x = 0; x < side; ++x) {
        const std::size_t sy = w.y0 + y * w.size / side;
        const std::size_t sx = w.x0 + x * w.size / side;
        out[(c * side + y) * side + x] = image[(c * side + sy) * side + sx];
      }
  const bool flip = flip_mode == FlipMode::kAlways || (flip_mode == FlipMode::kRandom && w.flip);
  return flip ? horizontal_flip(out) : out;
}

ColorBasis rgb_principal_components(std::span<const Tensor> images) {
  require(images.size() >= 2, ErrorKind::kContract, "PCA color augmentation needs at least 2 images");
  std::array<double, 3> mean{};
  double count = 0.0;
  for (const Tensor& img : images) {
    const std::size_t side = side_of(img);
    const std::size_t plane = side * side;
    for (std::size_t p = 0; p < plane; ++p)
      for (std::size_t c = 0; c < 3; ++c) mean[c] += img[c * plane + p];
    count += static_cast<double>(plane);
  }
  for (double& m : mean) m /= count;

  ColorBasis basis;
  basis.covariance = SquareMatrix(3);
  for (const Tensor& img : images) {
    const std::size_t plane = img.dim(1) * img.dim(2);
    for (std::size_t p = 0; p < plane; ++p) {
      std::array<double, 3> d;
      for (std::size_t c = 0; c < 3; ++c) d[c] = img[c * plane + p] - mean[c];
      for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 3; ++c) basis.covariance(r, c) += d[r] * d[c];
    }
  }
  for (double& v : basis.covariance.values) v /= (count - 1.0);

  const SymmetricEigen eig = symmetric_eigen(basis.covariance);
  for (std::size_t k = 0; k < 3; ++k) {
    basis.eigenvalues[k] = eig.values[k];
    for (std::size_t r = 0; r < 3; ++r) basis.eigenvectors[k][r] = eig.vectors(r, k);
  }
  return basis;
}

std::vector<Tensor> augment_pca_color_with(std::span<const Tensor> images, std::span<const Rgb> alphas) {
  require(alphas.size() == images.size(), ErrorKind::kContract, "one alpha triple per image required");
  const ColorBasis basis = rgb_principal_components(images);
  std::vector<Tensor> out;
  out.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    Rgb shift{};
    for (std::size_t k = 0; k < 3; ++k)
      for (std::size_t c = 0; c < 3; ++c) shift[c] += alphas[i][k] * basis.eigenvalues[k] * basis.eigenvectors[k][c];
    Tensor img = images[i];
    img.clear_grad();
    const std::size_t plane = img.dim(1) * img.dim(2);
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t p = 0; p < plane; ++p) {
        double& v = img[c * plane + p];
        v = std::clamp(v + shift[c], -1.0, 1.0);
      }
    out.push_back(std::move(img));
  }
  return out;
}

std::vector<Tensor> augment_pca_color(std::span<const Tensor> images, std::uint64_t magnitude_seed, double sigma) {
  Rng rng(magnitude_seed);
  std::vector<Rgb> alphas(images.size());
  for (Rgb& a : alphas)
    for (double& x : a) x = rng.normal(0.0, sigma);
  return augment_pca_color_with(images, alphas);
}

SplitPlan make_split(std::vector<int> category_ids, std::size_t n_unseen, std::uint64_t seed) {
  require(n_unseen >= 1 && n_unseen < category_ids.size(), ErrorKind::kConfig,
          "n_unseen must lie in [1, " + std::to_string(category_ids.size()) + "), got " + std::to_string(n_unseen));
  const std::set<int> unique(category_ids.begin(), category_ids.end());
  require(unique.size() == category_ids.size(), ErrorKind::kContract, "make_split: duplicate category ids");
  Rng rng(seed);
  for (std::size_t i = category_ids.size() - 1; i > 0; --i) {
    const std::size_t j = rng.below(i + 1);
    std::swap(category_ids[i], category_ids[j]);
  }
  SplitPlan plan;
  plan.seed = seed;
  const std::size_t first_unseen = category_ids.size() - n_unseen;
  for (std::size_t i = 0; i < category_ids.size(); ++i)
    (i < first_unseen ? plan.seen_ids : plan.unseen_ids).insert(category_ids[i]);
  return plan;
}

std::vector<CategorySpec> make_category_specs(const DatasetConfig& config) {
  require(config.n_categories >= 2, ErrorKind::kConfig, "need at least 2 categories");
  require(config.descriptions_per_category >= 1, ErrorKind::kConfig, "need at least 1 description per category");
  const std::size_t n_colors =
      std::clamp<std::size_t>((config.n_categories + kShapes.size() - 1) / kShapes.size(), 1, kPalette.size());
  std::vector<CategorySpec> specs;
  for (std::size_t i = 0; i < config.n_categories; ++i) {
    CategorySpec s;
    s.id = static_cast<int>(i);
    s.base_color = kPalette[i % n_colors].color;
    s.shape = kShapes[(i / n_colors) % kShapes.size()];
    s.texture_freq = kTextures[(i / (n_colors * kShapes.size())) % kTextures.size()];
    s.descriptions = describe_category(s, config.descriptions_per_category);
    specs.push_back(std::move(s));
  }
  return specs;
}

std::vector<int> Dataset::category_ids() const {
  std::vector<int> ids;
  for (const auto& c : categories) ids.push_back(c.id);
  return ids;
}

const CategorySpec& Dataset::category(int id) const {
  for (const auto& c : categories)
    if (c.id == id) return c;
  fail(ErrorKind::kContract, "unknown category id " + std::to_string(id));
}

std::vector<std::size_t> Dataset::indices_of(int category_id) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (samples[i].category_id == category_id) out.push_back(i);
  return out;
}

std::vector<Tensor> Dataset::images_of(int category_id) const {
  std::vector<Tensor> out;
  for (const auto& s : samples)
    if (s.category_id == category_id) out.push_back(s.image);
  return out;
}

Dataset generate_dataset(const DatasetConfig& config) {
  RenderConfig render;
  render.image_size = config.image_size;
  Dataset ds;
  ds.image_size = config.image_size;
  ds.categories = make_category_specs(config);
  for (const auto& spec : ds.categories)
    for (std::size_t k = 0; k < config.images_per_category; ++k) {
      const std::uint64_t instance = derive_seed(config.seed, (static_cast<std::uint64_t>(spec.id) << 32) | k);
      ds.samples.push_back(render_sample(spec, instance, render));
    }
  return ds;
}

bool mean_foreground_color(const Tensor& image, Rgb& out, double threshold) {
  const std::size_t side = side_of(image);
  const std::size_t plane = side * side;
  Rgb acc{};
  std::size_t count = 0;
  for (std::size_t p = 0; p < plane; ++p) {
    Rgb px;
    for (std::size_t c = 0; c < 3; ++c) px[c] = 0.5 * (image[c * plane + p] + 1.0);
    if (std::max({px[0], px[1], px[2]}) <= threshold) continue;
    for (std::size_t c = 0; c < 3; ++c) acc[c] += px[c];
    ++count;
  }
  if (count == 0) return false;
  for (std::size_t c = 0; c < 3; ++c) out[c] = acc[c] / static_cast<double>(count);
  return true;
}

}  // namespace kggan
