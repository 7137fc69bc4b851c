// Copyright 2026 The kggan Authors
// SPDX-License-Identifier: Apache-2.0

#include "kggan/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kggan/error.hpp"
#include "kggan/log.hpp"

namespace kggan {
namespace {

void require_symmetric(const SquareMatrix& m, const char* which) {
  double scale = 1.0;
  for (double x : m.values) scale = std::max(scale, std::abs(x));
  require(m.max_asymmetry() <= 1e-10 * scale, ErrorKind::kContract,
          std::string("frechet_distance: covariance ") + which + " is not symmetric");
}

}  // namespace

GaussianStats gaussian_stats(const std::vector<std::vector<double>>& rows) {
  require(rows.size() >= 2, ErrorKind::kContract, "gaussian statistics need at least 2 samples");
  const std::size_t d = rows.front().size();
  // Shifted by the first row: identical rows give an exactly zero
  // covariance and large offsets do not swamp the spread.
  const std::vector<double>& shift = rows.front();
  GaussianStats s;
  s.sample_count = rows.size();
  std::vector<double> shifted_mean(d, 0.0);
  for (const auto& r : rows) {
    require(r.size() == d, ErrorKind::kDimension, "gaussian statistics: ragged feature rows");
    for (std::size_t i = 0; i < d; ++i) shifted_mean[i] += r[i] - shift[i];
  }
  const double n = static_cast<double>(rows.size());
  for (double& m : shifted_mean) m /= n;
  s.mean.resize(d);
  for (std::size_t i = 0; i < d; ++i) s.mean[i] = shift[i] + shifted_mean[i];

  s.covariance = SquareMatrix(d);
  std::vector<double> centered(d);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < d; ++i) centered[i] = (r[i] - shift[i]) - shifted_mean[i];
    for (std::size_t i = 0; i < d; ++i) {
      const double ci = centered[i];
      if (ci == 0.0) continue;
      for (std::size_t j = i; j < d; ++j) s.covariance(i, j) += ci * centered[j];
    }
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) {
      const double v = s.covariance(i, j) / (n - 1.0);
      s.covariance(i, j) = v;
      s.covariance(j, i) = v;
    }
  return s;
}

GaussianStats feature_stats(std::span<const Tensor> images, const RegressorModel& extractor) {
  require(images.size() >= 2, ErrorKind::kContract, "feature_stats: need at least 2 images");
  return gaussian_stats(extract_features(extractor, images));
}

double frechet_distance(const GaussianStats& p, const GaussianStats& q) {
  require(p.mean.size() == q.mean.size() && p.covariance.n == q.covariance.n && p.covariance.n == p.mean.size(),
          ErrorKind::kDimension,
          "frechet_distance: feature dimensions differ (" + std::to_string(p.mean.size()) + " vs " +
              std::to_string(q.mean.size()) + ")");
  require_symmetric(p.covariance, "p");
  require_symmetric(q.covariance, "q");

  double mean_term = 0.0;
  for (std::size_t i = 0; i < p.mean.size(); ++i) {
    const double d = p.mean[i] - q.mean[i];
    mean_term += d * d;
  }

  const SquareMatrix root_p = symmetric_sqrt(p.covariance);
  SquareMatrix inner = multiply(multiply(root_p, q.covariance), root_p);
  for (std::size_t r = 0; r < inner.n; ++r)
    for (std::size_t c = r + 1; c < inner.n; ++c) {
      const double avg = 0.5 * (inner(r, c) + inner(c, r));
      inner(r, c) = avg;
      inner(c, r) = avg;
    }
  const SymmetricEigen eig = symmetric_eigen(inner);
  double trace_root = 0.0;
  for (double lambda : eig.values) {
    if (lambda < -1e-6) warn("frechet_distance: clamping eigenvalue " + std::to_string(lambda) + " to zero");
    trace_root += std::sqrt(std::max(lambda, 0.0));
  }
  const double fid = mean_term + p.covariance.trace() + q.covariance.trace() - 2.0 * trace_root;
  return std::max(fid, 0.0);
}

std::vector<Tensor> GeneratorSource::images(int category_id, std::size_t n) {
  Rng rng(derive_seed(seed_, static_cast<std::uint64_t>(category_id)));
  std::vector<Tensor> out;
  out.reserve(n);
  constexpr std::size_t kChunk = 128;
  const std::size_t s = model_->image_size();
  for (std::size_t start = 0; start < n; start += kChunk) {
    const std::size_t m = std::min(kChunk, n - start);
    Tensor z({m, model_->arch.z_dim});
    for (double& x : z.storage()) x = rng.normal();
    const std::vector<int> ids(m, category_id);
    const Tensor batch = generate(*model_, z, conditions_->conditions(ids));
    const std::size_t pixels = 3 * s * s;
    for (std::size_t i = 0; i < m; ++i)
      out.emplace_back(Shape{3, s, s},
                       std::vector<double>(batch.data().begin() + i * pixels, batch.data().begin() + (i + 1) * pixels));
  }
  return out;
}

double mean_over(const std::map<int, double>& values, std::span<const int> ids) {
  double sum = 0.0;
  std::size_t count = 0;
  for (int id : ids) {
    auto it = values.find(id);
    if (it == values.end()) continue;
    sum += it->second;
    ++count;
  }
  return count ? sum / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
}

void summarize(FidReport& report, const SplitPlan& split) {
  const std::vector<int> seen(split.seen_ids.begin(), split.seen_ids.end());
  const std::vector<int> unseen(split.unseen_ids.begin(), split.unseen_ids.end());
  report.seen_avg = mean_over(report.per_category, seen);
  report.unseen_avg = mean_over(report.per_category, unseen);
}

FidReport per_category_fid(ImageSource& source, const Dataset& real, const SplitPlan& split,
                           const RegressorModel& extractor, std::size_t n_gen) {
  require(n_gen >= 2, ErrorKind::kConfig, "per_category_fid: n_gen must be at least 2");
  FidReport report;
  for (int id : real.category_ids()) {
    const auto real_images = real.images_of(id);
    if (real_images.size() < 2) {
      warn("per_category_fid: category " + std::to_string(id) + " has fewer than 2 real images; skipped");
      report.skipped.push_back(id);
      continue;
    }
    const auto fakes = source.images(id, n_gen);
    const GaussianStats fake_stats = feature_stats(fakes, extractor);
    const GaussianStats real_stats = feature_stats(real_images, extractor);
    report.per_category[id] = frechet_distance(fake_stats, real_stats);
  }
  summarize(report, split);
  return report;
}

std::map<int, double> embedding_consistency(ImageSource& source, const RegressorModel& embedder,
                                            const EmbeddingTable& embeddings, std::span<const int> category_ids,
                                            std::size_t n_gen) {
  std::map<int, double> out;
  for (int id : category_ids) {
    const auto& target = embeddings.at(id).vector;
    require(target.size() == embedder.embedding_dim(), ErrorKind::kDimension,
            "embedding_consistency: embedding dimension mismatch");
    const auto images = source.images(id, n_gen);
    require(!images.empty(), ErrorKind::kContract, "embedding_consistency: source produced no images");
    Tape tape;
    Var pred = embedder.forward(tape, tape.constant(stack_images(images)));
    const Tensor& p = tape.value(pred);
    const std::size_t d = target.size();
    double total = 0.0;
    for (std::size_t i = 0; i < images.size(); ++i) {
      double sq = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = p[i * d + k] - target[k];
        sq += diff * diff;
      }
      total += sq;
    }
    out[id] = total / static_cast<double>(images.size());
  }
  return out;
}

std::map<int, double> color_fidelity(ImageSource& source, std::span<const CategorySpec> specs,
                                     std::span<const int> category_ids, std::size_t n_gen) {
  std::map<int, double> out;
  for (int id : category_ids) {
    auto spec = std::find_if(specs.begin(), specs.end(), [id](const CategorySpec& s) { return s.id == id; });
    require(spec != specs.end(), ErrorKind::kContract, "color_fidelity: no spec for category " + std::to_string(id));
    const int expected = dominant_channel(spec->base_color);
    const auto images = source.images(id, n_gen);
    std::size_t hits = 0;
    for (const Tensor& img : images) {
      Rgb mean;
      if (mean_foreground_color(img, mean) && dominant_channel(mean) == expected) ++hits;
    }
    out[id] = images.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(images.size());
  }
  return out;
}

}  // namespace kggan
