// Copyright 2026 The kggan Authors
// SPDX-License-Identifier: Apache-2.0

#include "kggan/evaluation.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"

namespace kggan {
namespace {

using testing::error_kind_of;

GaussianStats gaussian(std::vector<double> mean, SquareMatrix cov) {
  GaussianStats s;
  s.mean = std::move(mean);
  s.covariance = std::move(cov);
  s.sample_count = 100;
  return s;
}

SquareMatrix random_covariance(std::size_t n, Rng& rng) {
  SquareMatrix b(n);
  for (double& x : b.values) x = rng.uniform(-1, 1);
  SquareMatrix c(n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = 0; k < n; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += b(r, j) * b(k, j);
      c(r, k) = s;
    }
  return c;
}

GaussianStats random_gaussian(std::size_t n, Rng& rng) {
  std::vector<double> mean(n);
  for (double& m : mean) m = rng.uniform(-2, 2);
  return gaussian(std::move(mean), random_covariance(n, rng));
}

TEST(Frechet, IdenticalGaussiansGiveZero) {
  Rng rng(1);
  for (std::size_t n : {1u, 3u, 8u, 16u}) {
    const GaussianStats p = random_gaussian(n, rng);
    EXPECT_LT(frechet_distance(p, p), 1e-8) << "n=" << n;
  }
}

TEST(Frechet, IdentityCovarianceReducesToSquaredMeanGap) {
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 1 + rng.below(10);
    std::vector<double> a(n), b(n);
    double expected = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.uniform(-3, 3);
      b[i] = rng.uniform(-3, 3);
      expected += (a[i] - b[i]) * (a[i] - b[i]);
    }
    EXPECT_NEAR(frechet_distance(gaussian(a, SquareMatrix::identity(n)), gaussian(b, SquareMatrix::identity(n))),
                expected, 1e-10);
  }
}

TEST(Frechet, OneDimensionalClosedForm) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const double m1 = rng.uniform(-5, 5), m2 = rng.uniform(-5, 5);
    const double s1 = rng.uniform(0.01, 3), s2 = rng.uniform(0.01, 3);
    const double expected = (m1 - m2) * (m1 - m2) + (s1 - s2) * (s1 - s2);
    const double got = frechet_distance(gaussian({m1}, SquareMatrix(1, s1 * s1)), gaussian({m2}, SquareMatrix(1, s2 * s2)));
    EXPECT_NEAR(got, expected, 1e-10);
  }
}

TEST(Frechet, SymmetricAndNonNegative) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.below(12);
    const GaussianStats p = random_gaussian(n, rng);
    const GaussianStats q = random_gaussian(n, rng);
    const double pq = frechet_distance(p, q);
    EXPECT_NEAR(pq, frechet_distance(q, p), 1e-8);
    EXPECT_GE(pq, 0.0);
  }
}

TEST(Frechet, CommutingCovariancesMatchDiagonalFormula) {
  // Diagonal covariances: the trace term is sum (sqrt(a_i) - sqrt(b_i))^2.
  Rng rng(5);
  SquareMatrix a(5), b(5);
  double expected = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    a(i, i) = rng.uniform(0, 4);
    b(i, i) = rng.uniform(0, 4);
    expected += std::pow(std::sqrt(a(i, i)) - std::sqrt(b(i, i)), 2);
  }
  EXPECT_NEAR(frechet_distance(gaussian(std::vector<double>(5, 0.0), a), gaussian(std::vector<double>(5, 0.0), b)),
              expected, 1e-10);
}

TEST(Frechet, RejectsAsymmetricCovarianceAndDimensionMismatch) {
  SquareMatrix bad = SquareMatrix::identity(2);
  bad(0, 1) = 0.5;
  EXPECT_EQ(error_kind_of([&] {
              frechet_distance(gaussian({0, 0}, bad), gaussian({0, 0}, SquareMatrix::identity(2)));
            }),
            ErrorKind::kContract);
  EXPECT_EQ(error_kind_of([&] {
              frechet_distance(gaussian({0}, SquareMatrix::identity(1)), gaussian({0, 0}, SquareMatrix::identity(2)));
            }),
            ErrorKind::kDimension);
}

TEST(GaussianStats, TwoPointStatistics) {
  const std::vector<double> a{1.0, -2.0, 0.5}, b{3.0, 1.0, 0.5};
  const GaussianStats s = gaussian_stats({a, b});
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_DOUBLE_EQ(s.mean[i], 0.5 * (a[i] + b[i]));
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(s.covariance(i, j), 0.5 * (a[i] - b[i]) * (a[j] - b[j]), 1e-15);
  }
  EXPECT_EQ(s.sample_count, 2u);
}

TEST(GaussianStats, IdenticalRowsGiveZeroCovariance) {
  const GaussianStats s = gaussian_stats(std::vector<std::vector<double>>(10, {0.3, 0.7}));
  for (double x : s.covariance.values) EXPECT_EQ(x, 0.0);
}

TEST(GaussianStats, FewerThanTwoSamplesIsContractError) {
  EXPECT_EQ(error_kind_of([] { gaussian_stats({{1.0}}); }), ErrorKind::kContract);
  RegressorModel e;
  EXPECT_EQ(error_kind_of([&] { feature_stats(std::vector<Tensor>{Tensor({3, 2, 2})}, e); }), ErrorKind::kContract);
}

TEST(GaussianStats, RecoversKnownGaussianWithinThreeStandardErrors) {
  // x = mu + L e with L lower triangular, so cov = L L^T.
  const std::vector<double> mu{1.0, -0.5, 2.0};
  const double l[3][3] = {{1.0, 0.0, 0.0}, {0.5, 0.8, 0.0}, {-0.3, 0.2, 0.6}};
  double cov[3][3] = {};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) cov[i][j] += l[i][k] * l[j][k];

  Rng rng(6);
  const std::size_t n = 500;
  std::vector<std::vector<double>> rows;
  for (std::size_t s = 0; s < n; ++s) {
    const double e[3] = {rng.normal(), rng.normal(), rng.normal()};
    std::vector<double> x(3);
    for (int i = 0; i < 3; ++i) {
      x[i] = mu[i];
      for (int k = 0; k < 3; ++k) x[i] += l[i][k] * e[k];
    }
    rows.push_back(x);
  }
  const GaussianStats st = gaussian_stats(rows);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(st.mean[i], mu[i], 3.0 * std::sqrt(cov[i][i] / n));
    for (int j = 0; j < 3; ++j) {
      // Var of the sample covariance of a Gaussian: (s_ij^2 + s_ii s_jj) / (n - 1).
      const double se = std::sqrt((cov[i][j] * cov[i][j] + cov[i][i] * cov[j][j]) / (n - 1));
      EXPECT_NEAR(st.covariance(i, j), cov[i][j], 3.0 * se);
    }
  }
}

struct EvalWorld {
  Dataset dataset;
  SplitPlan split;
  EmbeddingTable embeddings;
  RegressorModel embedder;

  EvalWorld() {
    DatasetConfig cfg;
    cfg.n_categories = 6;
    cfg.images_per_category = 30;
    cfg.image_size = 8;
    cfg.seed = 31;
    dataset = generate_dataset(cfg);
    split = make_split(dataset.category_ids(), 2, 32);
    for (const auto& c : dataset.categories) embeddings[c.id] = category_embedding(c.id, c.descriptions, 64);
    std::vector<Sample> seen;
    for (const auto& s : dataset.samples)
      if (split.is_seen(s.category_id)) seen.push_back(s);
    RegressorConfig rc;
    rc.hidden1 = 32;
    rc.hidden2 = 8;
    rc.steps = 200;
    rc.batch_size = 16;
    embedder = freeze(train_embedder(seen, embeddings, split, 8, rc));
  }
};

// Serves another category's real images.
class SwappedSource : public ImageSource {
 public:
  SwappedSource(const Dataset& d, std::map<int, int> swap) : d_(&d), swap_(std::move(swap)) {}
  std::vector<Tensor> images(int id, std::size_t) override { return d_->images_of(swap_.at(id)); }

 private:
  const Dataset* d_;
  std::map<int, int> swap_;
};

class NoisySource : public ImageSource {
 public:
  NoisySource(const Dataset& d, double sigma) : d_(&d), sigma_(sigma) {}
  std::vector<Tensor> images(int id, std::size_t) override {
    Rng rng(derive_seed(77, static_cast<std::uint64_t>(id)));
    auto out = d_->images_of(id);
    for (Tensor& t : out)
      for (double& x : t.storage()) x += sigma_ * rng.normal();
    return out;
  }

 private:
  const Dataset* d_;
  double sigma_;
};

class SolidSource : public ImageSource {
 public:
  explicit SolidSource(std::map<int, Rgb> colors) : colors_(std::move(colors)) {}
  std::vector<Tensor> images(int id, std::size_t n) override {
    const Rgb c = colors_.at(id);
    Tensor img({3, 4, 4});
    for (std::size_t ch = 0; ch < 3; ++ch)
      for (std::size_t i = 0; i < 16; ++i) img.storage()[ch * 16 + i] = 2.0 * c[ch] - 1.0;
    return std::vector<Tensor>(n, img);
  }

 private:
  std::map<int, Rgb> colors_;
};

TEST(PerCategoryFid, PassThroughIsZero) {
  EvalWorld w;
  PassThroughSource src(w.dataset);
  const FidReport r = per_category_fid(src, w.dataset, w.split, w.embedder, 16);
  ASSERT_EQ(r.per_category.size(), 6u);
  for (const auto& [id, f] : r.per_category) EXPECT_LT(f, 1e-6) << id;
  EXPECT_TRUE(r.skipped.empty());
}

TEST(PerCategoryFid, AveragesMatchNaiveMean) {
  EvalWorld w;
  NoisySource src(w.dataset, 0.1);
  const FidReport r = per_category_fid(src, w.dataset, w.split, w.embedder, 16);
  double seen = 0.0, unseen = 0.0;
  for (const auto& [id, f] : r.per_category) (w.split.is_seen(id) ? seen : unseen) += f;
  EXPECT_NEAR(r.seen_avg, seen / w.split.seen_ids.size(), 1e-12);
  EXPECT_NEAR(r.unseen_avg, unseen / w.split.unseen_ids.size(), 1e-12);
}

TEST(PerCategoryFid, OtherCategoryScoresWorseThanItself) {
  EvalWorld w;
  PassThroughSource self(w.dataset);
  // Swap pairs of categories that differ in color.
  SwappedSource swapped(w.dataset, {{0, 1}, {1, 0}, {2, 3}, {3, 2}, {4, 5}, {5, 4}});
  const FidReport a = per_category_fid(self, w.dataset, w.split, w.embedder, 16);
  const FidReport b = per_category_fid(swapped, w.dataset, w.split, w.embedder, 16);
  for (const auto& [id, f] : a.per_category) EXPECT_GT(b.per_category.at(id), f) << id;
}

TEST(PerCategoryFid, GrowsWithNoiseLevel) {
  EvalWorld w;
  double previous = 0.0;
  for (double sigma : {0.05, 0.1, 0.2}) {
    NoisySource src(w.dataset, sigma);
    const FidReport r = per_category_fid(src, w.dataset, w.split, w.embedder, 16);
    const double all = 0.5 * (r.seen_avg + r.unseen_avg);
    EXPECT_GT(all, previous) << "sigma " << sigma;
    previous = all;
  }
}

TEST(PerCategoryFid, CategoryWithOneImageIsSkipped) {
  EvalWorld w;
  Dataset d = w.dataset;
  std::vector<Sample> kept;
  bool have_one = false;
  for (auto& s : d.samples) {
    if (s.category_id == 2 && have_one) continue;
    have_one = have_one || s.category_id == 2;
    kept.push_back(std::move(s));
  }
  d.samples = std::move(kept);
  PassThroughSource src(d);
  const FidReport r = per_category_fid(src, d, w.split, w.embedder, 16);
  EXPECT_EQ(r.skipped, std::vector<int>{2});
  EXPECT_FALSE(r.per_category.contains(2));
  EXPECT_EQ(error_kind_of([&] { per_category_fid(src, d, w.split, w.embedder, 1); }), ErrorKind::kConfig);
}

TEST(MeanOver, IgnoresMissingIdsAndIsNanWhenEmpty) {
  const std::map<int, double> v{{1, 2.0}, {2, 4.0}};
  EXPECT_EQ(mean_over(v, std::vector<int>{1, 2, 3}), 3.0);
  EXPECT_TRUE(std::isnan(mean_over(v, std::vector<int>{7})));
}

TEST(EmbeddingConsistency, MatchesPerItemLoop) {
  EvalWorld w;
  NoisySource src(w.dataset, 0.05);
  const std::vector<int> ids = w.dataset.category_ids();
  const auto got = embedding_consistency(src, w.embedder, w.embeddings, ids, 16);
  for (int id : ids) {
    double total = 0.0;
    const auto images = src.images(id, 16);
    for (const Tensor& img : images) {
      const auto p = predict_embedding(w.embedder, img);
      const auto& v = w.embeddings.at(id).vector;
      for (std::size_t k = 0; k < v.size(); ++k) total += (p[k] - v[k]) * (p[k] - v[k]);
    }
    EXPECT_NEAR(got.at(id), total / images.size(), 1e-12);
  }
}

class FixedSource : public ImageSource {
 public:
  explicit FixedSource(Tensor t) : t_(std::move(t)) {}
  std::vector<Tensor> images(int, std::size_t n) override { return std::vector<Tensor>(n, t_); }

 private:
  Tensor t_;
};

TEST(EmbeddingConsistency, ZeroWhenTargetsArePredictions) {
  EvalWorld w;
  Rng rng(7);
  const Tensor probe = testing::random_tensor({3, 8, 8}, rng);
  FixedSource src(probe);
  EmbeddingTable targets;
  targets[0] = SemanticEmbedding{0, predict_embedding(w.embedder, probe)};
  EXPECT_EQ(embedding_consistency(src, w.embedder, targets, std::vector<int>{0}, 5).at(0), 0.0);
}

TEST(ColorFidelity, SolidColors) {
  std::vector<CategorySpec> specs(3);
  specs[0].id = 0;
  specs[0].base_color = {0.9, 0.1, 0.1};
  specs[1].id = 1;
  specs[1].base_color = {0.1, 0.8, 0.2};
  specs[2].id = 2;
  specs[2].base_color = {0.1, 0.2, 0.9};
  const std::vector<int> ids{0, 1, 2};

  SolidSource right({{0, specs[0].base_color}, {1, specs[1].base_color}, {2, specs[2].base_color}});
  for (const auto& [id, rate] : color_fidelity(right, specs, ids, 10)) EXPECT_EQ(rate, 1.0) << id;

  SolidSource wrong({{0, specs[1].base_color}, {1, specs[2].base_color}, {2, specs[0].base_color}});
  for (const auto& [id, rate] : color_fidelity(wrong, specs, ids, 10)) EXPECT_EQ(rate, 0.0) << id;

  // Too dark to have any foreground: counts as a miss.
  SolidSource dark({{0, {0.1, 0.05, 0.05}}});
  EXPECT_EQ(color_fidelity(dark, specs, std::vector<int>{0}, 4).at(0), 0.0);
  EXPECT_EQ(error_kind_of([&] { color_fidelity(right, specs, std::vector<int>{9}, 1); }), ErrorKind::kContract);
}

TEST(GeneratorSource, NoiseDependsOnlyOnSeedAndCategory) {
  GanArchitecture a;
  a.image_size = 4;
  a.z_dim = 3;
  a.condition_dim = 64;
  a.generator_hidden = {8};
  a.discriminator_hidden = {8};
  GanModel m = GanModel::create(a, ConditionMode::kSemanticEmbedding, 1);
  EvalWorld w;
  const ConditionSource cond(ConditionMode::kSemanticEmbedding, w.dataset.category_ids(), w.embeddings);
  GeneratorSource s1(m, cond, 5), s2(m, cond, 5), s3(m, cond, 6);
  const auto first = s1.images(3, 200);
  s2.images(1, 7);  // unrelated draw first
  EXPECT_EQ(s2.images(3, 200), first);
  EXPECT_NE(s3.images(3, 200), first);
  EXPECT_EQ(first.size(), 200u);
  EXPECT_EQ(first.front().shape(), (Shape{3, 4, 4}));
}

}  // namespace
}  // namespace kggan
