// Copyright 2026 The kggan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kggan/layers.hpp"
#include "kggan/optimizer.hpp"
#include "kggan/regressor.hpp"
#include "kggan/semantics.hpp"
#include "kggan/spectral.hpp"
#include "kggan/synth_data.hpp"

namespace kggan {

enum class ConditionMode { kSemanticEmbedding, kOneHot };

std::string_view to_string(ConditionMode mode);
ConditionMode parse_condition_mode(std::string_view text);

/// Maps category ids to generator/discriminator conditions and to L_se
/// targets. Targets are always the semantic embeddings; conditions are
/// either the same embeddings or one-hot vectors over the ordered ids.
class ConditionSource {
 public:
  ConditionSource() = default;
  ConditionSource(ConditionMode mode, std::vector<int> category_ids, EmbeddingTable embeddings);

  ConditionMode mode() const { return mode_; }
  std::size_t condition_dim() const;
  std::size_t embedding_dim() const;
  const std::vector<int>& category_ids() const { return ids_; }

  std::vector<double> condition(int category_id) const;
  const std::vector<double>& target(int category_id) const;

  Tensor conditions(std::span<const int> ids) const;  // [n, condition_dim]
  Tensor targets(std::span<const int> ids) const;     // [n, embedding_dim]

 private:
  ConditionMode mode_ = ConditionMode::kSemanticEmbedding;
  std::vector<int> ids_;
  EmbeddingTable embeddings_;
};

struct GanArchitecture {
  std::size_t image_size = 16;
  std::size_t z_dim = 16;
  std::size_t condition_dim = kDefaultEmbeddingDim;
  std::vector<std::size_t> generator_hidden{128, 256};
  std::vector<std::size_t> discriminator_hidden{256, 128};  // last entry is the feature width
};

/// Generator plus projection discriminator. There is exactly one generator
/// parameter set; seen and unseen generation both run through it.
struct GanModel {
  ConditionMode condition_mode = ConditionMode::kSemanticEmbedding;
  GanArchitecture arch;
  std::vector<DenseLayer> generator;
  std::vector<DenseLayer> features;  // phi
  DenseLayer head;                   // psi: [feat, 1]
  Tensor projection;                 // V: [condition_dim, feat]
  // One state per discriminator weight: features..., head, projection.
  std::vector<SpectralState> spectral;

  static GanModel create(const GanArchitecture& arch, ConditionMode mode, std::uint64_t seed);

  std::size_t image_size() const { return arch.image_size; }
  std::size_t pixel_count() const { return 3 * arch.image_size * arch.image_size; }
  std::size_t feature_dim() const { return projection.dim(1); }

  ParameterList generator_parameters();
  ParameterList discriminator_parameters();
  /// Discriminator weights in spectral-state order.
  std::vector<Tensor*> spectral_weights();
  std::uint64_t generator_hash() const;

  void update_spectral_states();
};

/// x' = tanh(MLP([z ; v])) as [batch, 3, H, W]. Generator parameters are
/// tracked when track is set.
Var generator_forward(Tape& tape, GanModel& model, Var z, Var v, bool track);

/// score = psi(phi(x)) + <v, V phi(x)> with every weight divided by its
/// spectral estimate. Returns [batch].
Var discriminator_forward(Tape& tape, GanModel& model, Var x, Var v, bool track);

/// Value-level conveniences (nothing tracked).
Tensor generate(GanModel& model, const Tensor& z, const Tensor& v);
std::vector<double> discriminate(GanModel& model, const Tensor& x, const Tensor& v);

/// mean(max(0, 1 - real)) + mean(max(0, 1 + fake))
Var hinge_d_loss(Tape& tape, Var real_scores, Var fake_scores);
double hinge_d_loss(std::span<const double> real_scores, std::span<const double> fake_scores);

/// -mean(fake)
Var hinge_g_loss(Tape& tape, Var fake_scores);
double hinge_g_loss(std::span<const double> fake_scores);

/// mean over the batch of ||E(x') - v||^2. E must be frozen.
Var semantic_embedding_loss(Tape& tape, Var fake_images, Var targets, const RegressorModel& embedder);

/// L_G = adversarial + lambda * (se_seen + se_unseen)
double combine_generator_loss(double adversarial, double se_seen, double se_unseen, double lambda_se);

struct SeenBatch {
  Tensor real_images;      // [b, 3, H, W]
  std::vector<int> real_ids;
  Tensor real_conditions;  // [b, cond]
  Tensor z;                // [b, z_dim]
  std::vector<int> fake_ids;
  Tensor fake_conditions;  // [b, cond]
  Tensor fake_targets;     // [b, d]
};

struct UnseenBatch {
  std::vector<int> ids;
  Tensor z;           // [b, z_dim]
  Tensor conditions;  // [b, cond]
  Tensor targets;     // [b, d]
};

struct LossValues {
  double d_loss = 0.0;
  double g_loss = 0.0;
  double g_adversarial = 0.0;
  double se_seen = 0.0;
  double se_unseen = 0.0;
};

/// Evaluates both objectives at the current parameters. L_D uses only the
/// seen batch; L_G adds the knowledge loss over both batches. Real images of
/// an unseen category are a contract violation.
LossValues total_losses(GanModel& model, const SeenBatch& seen, const UnseenBatch& unseen,
                        const RegressorModel& embedder, const SplitPlan& split, double lambda_se);

enum class Objective {
  kKnowledgeGuided,  // hinge adversarial + lambda_se * semantic embedding loss
  kAdversarialOnly,  // plain conditional hinge GAN; L_se only logged
};

enum class BatchKind { kRealDiscriminator, kFakeDiscriminator, kGeneratorSeen, kGeneratorUnseen };

struct BatchRecord {
  std::size_t iteration = 0;
  BatchKind kind = BatchKind::kRealDiscriminator;
  std::vector<int> ids;
};

struct TrainConfig {
  double lambda_se = 0.1;
  std::size_t iterations = 3000;
  std::size_t batch_size = 64;
  std::size_t d_steps_per_g_step = 1;
  std::uint64_t seed = 11;
  AdamConfig generator_adam{};
  AdamConfig discriminator_adam{};
  // Both learning rates fall linearly from their configured value at the
  // first iteration towards zero at the last.
  bool linear_lr_decay = false;
  Objective objective = Objective::kKnowledgeGuided;
  // Draw real images (and seen-branch conditions) from every category
  // instead of the seen split only.
  bool reals_from_all_categories = false;
  // Random crop + flip on real discriminator inputs.
  bool augment_real = false;
  std::function<void(const BatchRecord&)> batch_observer;
};

void validate(const TrainConfig& config);

struct MetricRow {
  std::size_t iteration = 0;
  double d_loss = 0.0;
  double g_loss = 0.0;
  double se_seen = 0.0;
  double se_unseen = 0.0;

  friend bool operator==(const MetricRow&, const MetricRow&) = default;
};

/// Everything besides the model needed to continue a run bit-exactly.
struct TrainerSnapshot {
  std::size_t iteration = 0;
  OptimizerState generator_opt;
  OptimizerState discriminator_opt;
  std::string data_rng;
  std::string knowledge_rng;
};

/// Alternating hinge-GAN training with the category-dependent generator
/// loss. Holds references to the dataset, split and embedder; they must
/// outlive the trainer.
class GanTrainer {
 public:
  GanTrainer(GanModel model, const Dataset& dataset, const SplitPlan& split, ConditionSource conditions,
             const RegressorModel* embedder, TrainConfig config);
  GanTrainer(const GanTrainer&) = delete;
  GanTrainer& operator=(const GanTrainer&) = delete;

  /// One iteration: spectral update, discriminator step(s), generator step.
  MetricRow step();
  /// Steps until iteration() == config.iterations. on_checkpoint fires every
  /// checkpoint_every iterations when both are set.
  void run(const std::function<void(const GanTrainer&)>& on_checkpoint = {}, std::size_t checkpoint_every = 0);

  std::size_t iteration() const { return iteration_; }
  const GanModel& model() const { return model_; }
  GanModel& mutable_model() { return model_; }
  const std::vector<MetricRow>& log() const { return log_; }
  const TrainConfig& config() const { return config_; }
  const ConditionSource& conditions() const { return conditions_; }

  TrainerSnapshot snapshot() const;
  void restore(const TrainerSnapshot& snapshot, std::vector<MetricRow> log);

 private:
  Tensor sample_noise(Rng& rng, std::size_t n) const;
  void discriminator_step(double& d_loss);
  void generator_step(double& g_loss, double& se_seen, double& se_unseen);
  void observe(BatchKind kind, const std::vector<int>& ids) const;

  GanModel model_;
  const Dataset* dataset_;
  const SplitPlan* split_;
  ConditionSource conditions_;
  const RegressorModel* embedder_;
  TrainConfig config_;

  std::vector<int> train_ids_;
  std::vector<int> unseen_ids_;
  std::vector<std::size_t> real_pool_;
  ParameterList g_params_;
  ParameterList d_params_;
  OptimizerState g_opt_;
  OptimizerState d_opt_;
  Rng data_rng_;
  Rng knowledge_rng_;
  std::size_t iteration_ = 0;
  std::vector<MetricRow> log_;
};

struct TrainResult {
  GanModel model;
  std::vector<MetricRow> log;
};

/// Runs a fresh trainer to config.iterations.
TrainResult train(GanModel model, const Dataset& dataset, const SplitPlan& split, const ConditionSource& conditions,
                  const RegressorModel* embedder, const TrainConfig& config);

}  // namespace kggan
