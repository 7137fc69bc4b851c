// Copyright 2026 The kggan Authors
// SPDX-License-Identifier: Apache-2.0

#include "kggan/gan.hpp"

#include <algorithm>
#include <cmath>

#include "kggan/error.hpp"
#include "kggan/hash.hpp"

namespace kggan {
namespace {

constexpr double kAugmentCropFraction = 0.875;

void require_nonempty(std::span<const double> scores, const char* what) {
  require(!scores.empty(), ErrorKind::kContract, std::string(what) + ": empty batch");
}

Var bind(Tape& tape, Tensor& t, bool track) { return track ? tape.parameter(t) : tape.reference(t); }

}  // namespace

std::string_view to_string(ConditionMode mode) {
  return mode == ConditionMode::kOneHot ? "one_hot" : "semantic_embedding";
}

ConditionMode parse_condition_mode(std::string_view text) {
  if (text == "one_hot") return ConditionMode::kOneHot;
  if (text == "semantic_embedding") return ConditionMode::kSemanticEmbedding;
  fail(ErrorKind::kConfig, "unknown condition mode '" + std::string(text) + "' (expected semantic_embedding or one_hot)");
}

// ---------------------------------------------------------------------------
// ConditionSource

ConditionSource::ConditionSource(ConditionMode mode, std::vector<int> category_ids, EmbeddingTable embeddings)
    : mode_(mode), ids_(std::move(category_ids)), embeddings_(std::move(embeddings)) {
  require(!ids_.empty(), ErrorKind::kContract, "ConditionSource: no categories");
  std::size_t dim = 0;
  for (int id : ids_) {
    auto it = embeddings_.find(id);
    require(it != embeddings_.end(), ErrorKind::kContract,
            "ConditionSource: no embedding for category " + std::to_string(id));
    if (dim == 0) dim = it->second.vector.size();
    require(it->second.vector.size() == dim && dim > 0, ErrorKind::kDimension,
            "ConditionSource: embeddings have inconsistent dimensions");
  }
}

std::size_t ConditionSource::condition_dim() const {
  return mode_ == ConditionMode::kOneHot ? ids_.size() : embedding_dim();
}

std::size_t ConditionSource::embedding_dim() const { return embeddings_.at(ids_.front()).vector.size(); }

std::vector<double> ConditionSource::condition(int category_id) const {
  if (mode_ == ConditionMode::kSemanticEmbedding) return target(category_id);
  auto it = std::find(ids_.begin(), ids_.end(), category_id);
  require(it != ids_.end(), ErrorKind::kContract, "unknown category id " + std::to_string(category_id));
  return one_hot(static_cast<std::size_t>(it - ids_.begin()), ids_.size()).vector;
}

const std::vector<double>& ConditionSource::target(int category_id) const {
  auto it = embeddings_.find(category_id);
  require(it != embeddings_.end(), ErrorKind::kContract, "unknown category id " + std::to_string(category_id));
  return it->second.vector;
}

Tensor ConditionSource::conditions(std::span<const int> ids) const {
  const std::size_t dim = condition_dim();
  Tensor out({ids.size(), dim});
  for (std::size_t r = 0; r < ids.size(); ++r) {
    const auto c = condition(ids[r]);
    std::copy(c.begin(), c.end(), out.data().begin() + r * dim);
  }
  return out;
}

Tensor ConditionSource::targets(std::span<const int> ids) const {
  const std::size_t dim = embedding_dim();
  Tensor out({ids.size(), dim});
  for (std::size_t r = 0; r < ids.size(); ++r) {
    const auto& t = target(ids[r]);
    std::copy(t.begin(), t.end(), out.data().begin() + r * dim);
  }
  return out;
}

// ---------------------------------------------------------------------------
// GanModel

GanModel GanModel::create(const GanArchitecture& arch, ConditionMode mode, std::uint64_t seed) {
  require(arch.image_size >= 1 && arch.z_dim >= 1 && arch.condition_dim >= 1 && !arch.discriminator_hidden.empty(),
          ErrorKind::kConfig, "GanModel: invalid architecture");
  Rng rng(seed);
  GanModel m;
  m.condition_mode = mode;
  m.arch = arch;
  const std::size_t pixels = 3 * arch.image_size * arch.image_size;

  std::size_t in = arch.z_dim + arch.condition_dim;
  for (std::size_t width : arch.generator_hidden) {
    m.generator.emplace_back(in, width, rng);
    in = width;
  }
  m.generator.emplace_back(in, pixels, rng);

  in = pixels;
  for (std::size_t width : arch.discriminator_hidden) {
    m.features.emplace_back(in, width, rng);
    in = width;
  }
  m.head = DenseLayer(in, 1, rng);
  m.projection = glorot_uniform(arch.condition_dim, in, rng);
  m.projection.set_requires_grad(true);

  for (Tensor* w : m.spectral_weights()) m.spectral.push_back(SpectralState::random(w->dim(0), w->dim(1), rng));
  return m;
}

ParameterList GanModel::generator_parameters() {
  ParameterList list;
  for (std::size_t i = 0; i < generator.size(); ++i) {
    list.add("generator.layer" + std::to_string(i) + ".weight", generator[i].weight);
    list.add("generator.layer" + std::to_string(i) + ".bias", generator[i].bias);
  }
  return list;
}

ParameterList GanModel::discriminator_parameters() {
  ParameterList list;
  for (std::size_t i = 0; i < features.size(); ++i) {
    list.add("discriminator.features" + std::to_string(i) + ".weight", features[i].weight);
    list.add("discriminator.features" + std::to_string(i) + ".bias", features[i].bias);
  }
  list.add("discriminator.head.weight", head.weight);
  list.add("discriminator.head.bias", head.bias);
  list.add("discriminator.projection", projection);
  return list;
}

std::vector<Tensor*> GanModel::spectral_weights() {
  std::vector<Tensor*> out;
  for (auto& layer : features) out.push_back(&layer.weight);
  out.push_back(&head.weight);
  out.push_back(&projection);
  return out;
}

std::uint64_t GanModel::generator_hash() const {
  Fnv1a64 h;
  for (const auto& layer : generator) {
    h.update(layer.weight.data());
    h.update(layer.bias.data());
  }
  return h.digest();
}

void GanModel::update_spectral_states() {
  auto weights = spectral_weights();
  require(weights.size() == spectral.size(), ErrorKind::kContract, "spectral state count mismatch");
  for (std::size_t i = 0; i < weights.size(); ++i) power_iteration_step(*weights[i], spectral[i]);
}

// ---------------------------------------------------------------------------
// Forward passes

Var generator_forward(Tape& tape, GanModel& model, Var z, Var v, bool track) {
  const Tensor& zv = tape.value(z);
  const Tensor& vv = tape.value(v);
  require(zv.rank() == 2 && zv.dim(1) == model.arch.z_dim, ErrorKind::kDimension,
          "generator: noise " + shape_string(zv.shape()) + " does not match z_dim " + std::to_string(model.arch.z_dim));
  require(vv.rank() == 2 && vv.dim(1) == model.arch.condition_dim && vv.dim(0) == zv.dim(0), ErrorKind::kDimension,
          "generator: condition " + shape_string(vv.shape()) + " does not match condition_dim " +
              std::to_string(model.arch.condition_dim));
  Var h = tape.concat_columns(z, v);
  for (std::size_t i = 0; i < model.generator.size(); ++i) {
    h = model.generator[i].apply(tape, h, track);
    h = i + 1 < model.generator.size() ? tape.leaky_relu(h, kLeakySlope) : tape.tanh(h);
  }
  const std::size_t s = model.arch.image_size;
  return tape.reshape(h, {zv.dim(0), 3, s, s});
}

Var discriminator_forward(Tape& tape, GanModel& model, Var x, Var v, bool track) {
  const Tensor& xv = tape.value(x);
  const Tensor& vv = tape.value(v);
  const std::size_t pixels = model.pixel_count();
  require(xv.rank() >= 2 && xv.size() / xv.dim(0) == pixels, ErrorKind::kDimension,
          "discriminator: input " + shape_string(xv.shape()) + " does not match image size " +
              std::to_string(model.arch.image_size));
  const std::size_t batch = xv.dim(0);
  require(vv.rank() == 2 && vv.dim(0) == batch && vv.dim(1) == model.arch.condition_dim, ErrorKind::kDimension,
          "discriminator: condition " + shape_string(vv.shape()) + " does not match batch " + std::to_string(batch) +
              " x condition_dim " + std::to_string(model.arch.condition_dim));
  require(model.spectral.size() == model.features.size() + 2, ErrorKind::kContract,
          "discriminator: spectral states missing");

  auto normalized = [&](Tensor& w, const SpectralState& s) {
    return tape.spectral_normalized(bind(tape, w, track), s.u, s.v);
  };

  Var h = xv.rank() == 2 ? x : tape.reshape(x, {batch, pixels});
  for (std::size_t i = 0; i < model.features.size(); ++i) {
    h = tape.affine(h, normalized(model.features[i].weight, model.spectral[i]), bind(tape, model.features[i].bias, track));
    h = tape.leaky_relu(h, kLeakySlope);
  }
  const std::size_t nf = model.features.size();
  Var unconditional =
      tape.affine(h, normalized(model.head.weight, model.spectral[nf]), bind(tape, model.head.bias, track));
  unconditional = tape.reshape(unconditional, {batch});
  // <v, V phi(x)> computed as <v V, phi(x)> so V keeps its [cond, feat] layout.
  Var projected = tape.matmul(v, normalized(model.projection, model.spectral[nf + 1]));
  return tape.add(unconditional, tape.row_dot(projected, h));
}

Tensor generate(GanModel& model, const Tensor& z, const Tensor& v) {
  Tape tape;
  Var out = generator_forward(tape, model, tape.reference(z), tape.reference(v), false);
  return tape.value(out);
}

std::vector<double> discriminate(GanModel& model, const Tensor& x, const Tensor& v) {
  Tape tape;
  Var out = discriminator_forward(tape, model, tape.reference(x), tape.reference(v), false);
  const auto s = tape.value(out).data();
  return {s.begin(), s.end()};
}

// ---------------------------------------------------------------------------
// Losses

Var hinge_d_loss(Tape& tape, Var real_scores, Var fake_scores) {
  require_nonempty(tape.value(real_scores).data(), "hinge_d_loss");
  require_nonempty(tape.value(fake_scores).data(), "hinge_d_loss");
  Var real_term = tape.mean(tape.hinge(real_scores));
  Var fake_term = tape.mean(tape.hinge(tape.scale(fake_scores, -1.0)));
  return tape.add(real_term, fake_term);
}

double hinge_d_loss(std::span<const double> real_scores, std::span<const double> fake_scores) {
  require_nonempty(real_scores, "hinge_d_loss");
  require_nonempty(fake_scores, "hinge_d_loss");
  double real_sum = 0.0, fake_sum = 0.0;
  for (double r : real_scores) real_sum += std::max(0.0, 1.0 - r);
  for (double f : fake_scores) fake_sum += std::max(0.0, 1.0 + f);
  return real_sum / static_cast<double>(real_scores.size()) + fake_sum / static_cast<double>(fake_scores.size());
}

Var hinge_g_loss(Tape& tape, Var fake_scores) {
  require_nonempty(tape.value(fake_scores).data(), "hinge_g_loss");
  return tape.scale(tape.mean(fake_scores), -1.0);
}

double hinge_g_loss(std::span<const double> fake_scores) {
  require_nonempty(fake_scores, "hinge_g_loss");
  double sum = 0.0;
  for (double f : fake_scores) sum += f;
  return -(sum / static_cast<double>(fake_scores.size()));
}

Var semantic_embedding_loss(Tape& tape, Var fake_images, Var targets, const RegressorModel& embedder) {
  require(embedder.frozen(), ErrorKind::kContract, "semantic_embedding_loss: embedder must be frozen");
  const Tensor& t = tape.value(targets);
  require(t.rank() == 2 && t.dim(1) == embedder.embedding_dim() && t.dim(0) == tape.value(fake_images).dim(0),
          ErrorKind::kDimension,
          "semantic_embedding_loss: targets " + shape_string(t.shape()) + " do not match embedding dim " +
              std::to_string(embedder.embedding_dim()));
  Var predicted = embedder.forward(tape, fake_images);
  return tape.mean(tape.row_squared_norm(tape.sub(predicted, targets)));
}

double combine_generator_loss(double adversarial, double se_seen, double se_unseen, double lambda_se) {
  return adversarial + lambda_se * (se_seen + se_unseen);
}

LossValues total_losses(GanModel& model, const SeenBatch& seen, const UnseenBatch& unseen,
                        const RegressorModel& embedder, const SplitPlan& split, double lambda_se) {
  for (int id : seen.real_ids)
    require(!split.is_unseen(id), ErrorKind::kContract,
            "total_losses: real image supplied for unseen category " + std::to_string(id));
  for (int id : unseen.ids)
    require(split.is_unseen(id), ErrorKind::kContract,
            "total_losses: unseen batch contains non-unseen category " + std::to_string(id));
  require(std::isfinite(lambda_se) && lambda_se >= 0.0, ErrorKind::kConfig, "lambda_se must be finite and >= 0");

  LossValues out;
  {
    Tape tape;
    Var fake = generator_forward(tape, model, tape.reference(seen.z), tape.reference(seen.fake_conditions), false);
    Var real_scores =
        discriminator_forward(tape, model, tape.reference(seen.real_images), tape.reference(seen.real_conditions), false);
    Var fake_scores = discriminator_forward(tape, model, fake, tape.reference(seen.fake_conditions), false);
    out.d_loss = tape.value(hinge_d_loss(tape, real_scores, fake_scores))[0];
  }
  {
    Tape tape;
    Var fake = generator_forward(tape, model, tape.reference(seen.z), tape.reference(seen.fake_conditions), false);
    Var scores = discriminator_forward(tape, model, fake, tape.reference(seen.fake_conditions), false);
    out.g_adversarial = tape.value(hinge_g_loss(tape, scores))[0];
    out.se_seen = tape.value(semantic_embedding_loss(tape, fake, tape.reference(seen.fake_targets), embedder))[0];
    Var fake_unseen = generator_forward(tape, model, tape.reference(unseen.z), tape.reference(unseen.conditions), false);
    out.se_unseen = tape.value(semantic_embedding_loss(tape, fake_unseen, tape.reference(unseen.targets), embedder))[0];
  }
  out.g_loss = combine_generator_loss(out.g_adversarial, out.se_seen, out.se_unseen, lambda_se);
  return out;
}

// ---------------------------------------------------------------------------
// Training

void validate(const TrainConfig& config) {
  require(std::isfinite(config.lambda_se) && config.lambda_se >= 0.0, ErrorKind::kConfig,
          "lambda_se must be finite and non-negative");
  require(config.batch_size >= 1, ErrorKind::kConfig, "batch_size must be positive");
  require(config.d_steps_per_g_step >= 1, ErrorKind::kConfig, "d_steps_per_g_step must be positive");
}

GanTrainer::GanTrainer(GanModel model, const Dataset& dataset, const SplitPlan& split, ConditionSource conditions,
                       const RegressorModel* embedder, TrainConfig config)
    : model_(std::move(model)),
      dataset_(&dataset),
      split_(&split),
      conditions_(std::move(conditions)),
      embedder_(embedder),
      config_(std::move(config)),
      data_rng_(derive_seed(config_.seed, 1)),
      knowledge_rng_(derive_seed(config_.seed, 2)) {
  validate(config_);
  require(!split.unseen_ids.empty(), ErrorKind::kContract, "trainer: split has no unseen categories");
  require(conditions_.condition_dim() == model_.arch.condition_dim, ErrorKind::kDimension,
          "trainer: condition source dimension " + std::to_string(conditions_.condition_dim()) +
              " does not match the model's " + std::to_string(model_.arch.condition_dim));
  require(dataset.image_size == model_.arch.image_size, ErrorKind::kDimension,
          "trainer: dataset image size does not match the model");
  if (config_.objective == Objective::kKnowledgeGuided) {
    require(embedder_ != nullptr, ErrorKind::kContract, "trainer: knowledge-guided objective needs an embedder");
    require(embedder_->frozen(), ErrorKind::kContract, "trainer: embedder must be frozen before GAN training");
  }
  if (embedder_) {
    require(embedder_->embedding_dim() == conditions_.embedding_dim(), ErrorKind::kDimension,
            "trainer: embedder output dimension does not match the semantic embeddings");
  }

  for (int id : dataset.category_ids()) {
    if (config_.reals_from_all_categories || split.is_seen(id)) train_ids_.push_back(id);
  }
  unseen_ids_.assign(split.unseen_ids.begin(), split.unseen_ids.end());
  require(!train_ids_.empty(), ErrorKind::kContract, "trainer: no training categories");
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    const int id = dataset.samples[i].category_id;
    if (std::find(train_ids_.begin(), train_ids_.end(), id) != train_ids_.end()) real_pool_.push_back(i);
  }
  require(!real_pool_.empty(), ErrorKind::kContract, "trainer: no real images in the training categories");

  g_params_ = model_.generator_parameters();
  d_params_ = model_.discriminator_parameters();
  g_opt_ = OptimizerState(config_.generator_adam, g_params_.tensors);
  d_opt_ = OptimizerState(config_.discriminator_adam, d_params_.tensors);
}

Tensor GanTrainer::sample_noise(Rng& rng, std::size_t n) const {
  Tensor z({n, model_.arch.z_dim});
  for (double& x : z.storage()) x = rng.normal();
  return z;
}

void GanTrainer::observe(BatchKind kind, const std::vector<int>& ids) const {
  if (config_.batch_observer) config_.batch_observer(BatchRecord{iteration_, kind, ids});
}

void GanTrainer::discriminator_step(double& d_loss) {
  const std::size_t b = config_.batch_size;
  std::vector<Tensor> reals;
  std::vector<int> real_ids, fake_ids;
  for (std::size_t i = 0; i < b; ++i) {
    const Sample& s = dataset_->samples[real_pool_[data_rng_.below(real_pool_.size())]];
    reals.push_back(config_.augment_real
                        ? augment_flip_crop(s.image, data_rng_.next_u64(), kAugmentCropFraction)
                        : s.image);
    real_ids.push_back(s.category_id);
  }
  for (std::size_t i = 0; i < b; ++i) fake_ids.push_back(train_ids_[data_rng_.below(train_ids_.size())]);
  Tensor z = sample_noise(data_rng_, b);
  observe(BatchKind::kRealDiscriminator, real_ids);
  observe(BatchKind::kFakeDiscriminator, fake_ids);

  const Tensor real_images = stack_images(reals);
  const Tensor real_cond = conditions_.conditions(real_ids);
  const Tensor fake_cond = conditions_.conditions(fake_ids);

  Tape tape;
  Var fake = generator_forward(tape, model_, tape.reference(z), tape.reference(fake_cond), false);
  Var real_scores = discriminator_forward(tape, model_, tape.reference(real_images), tape.reference(real_cond), true);
  Var fake_scores = discriminator_forward(tape, model_, fake, tape.reference(fake_cond), true);
  Var loss = hinge_d_loss(tape, real_scores, fake_scores);
  d_loss = tape.value(loss)[0];
  require(std::isfinite(d_loss), ErrorKind::kNumerical,
          "non-finite discriminator loss at iteration " + std::to_string(iteration_ + 1));
  d_params_.zero_grad();
  tape.backward(loss);
  optimizer_step(d_params_.tensors, d_params_.names, d_opt_);
  d_params_.zero_grad();
}

void GanTrainer::generator_step(double& g_loss, double& se_seen, double& se_unseen) {
  const std::size_t b = config_.batch_size;
  std::vector<int> seen_ids, unseen_ids;
  for (std::size_t i = 0; i < b; ++i) seen_ids.push_back(train_ids_[data_rng_.below(train_ids_.size())]);
  Tensor z_seen = sample_noise(data_rng_, b);
  // The unseen branch draws from its own stream so that switching the
  // knowledge loss on or off never perturbs the adversarial sampling.
  for (std::size_t i = 0; i < b; ++i) unseen_ids.push_back(unseen_ids_[knowledge_rng_.below(unseen_ids_.size())]);
  Tensor z_unseen = sample_noise(knowledge_rng_, b);
  observe(BatchKind::kGeneratorSeen, seen_ids);
  observe(BatchKind::kGeneratorUnseen, unseen_ids);

  const Tensor cond_seen = conditions_.conditions(seen_ids);
  const Tensor cond_unseen = conditions_.conditions(unseen_ids);
  const Tensor target_seen = conditions_.targets(seen_ids);
  const Tensor target_unseen = conditions_.targets(unseen_ids);

  Tape tape;
  Var fake_seen = generator_forward(tape, model_, tape.reference(z_seen), tape.reference(cond_seen), true);
  Var scores = discriminator_forward(tape, model_, fake_seen, tape.reference(cond_seen), false);
  Var adversarial = hinge_g_loss(tape, scores);
  Var loss = adversarial;

  if (config_.objective == Objective::kKnowledgeGuided) {
    Var se_s = semantic_embedding_loss(tape, fake_seen, tape.reference(target_seen), *embedder_);
    Var fake_unseen = generator_forward(tape, model_, tape.reference(z_unseen), tape.reference(cond_unseen), true);
    Var se_u = semantic_embedding_loss(tape, fake_unseen, tape.reference(target_unseen), *embedder_);
    se_seen = tape.value(se_s)[0];
    se_unseen = tape.value(se_u)[0];
    loss = tape.add(adversarial, tape.scale(tape.add(se_s, se_u), config_.lambda_se));
  } else if (embedder_ != nullptr) {
    // Logged only: the same forward computations, outside the gradient path.
    Tape probe;
    Var fs = probe.reference(tape.value(fake_seen));
    se_seen = probe.value(semantic_embedding_loss(probe, fs, probe.reference(target_seen), *embedder_))[0];
    Var fu = generator_forward(probe, model_, probe.reference(z_unseen), probe.reference(cond_unseen), false);
    se_unseen = probe.value(semantic_embedding_loss(probe, fu, probe.reference(target_unseen), *embedder_))[0];
  } else {
    se_seen = 0.0;
    se_unseen = 0.0;
  }

  g_loss = tape.value(loss)[0];
  require(std::isfinite(g_loss) && std::isfinite(se_seen) && std::isfinite(se_unseen), ErrorKind::kNumerical,
          "non-finite generator loss at iteration " + std::to_string(iteration_ + 1));
  g_params_.zero_grad();
  tape.backward(loss);
  optimizer_step(g_params_.tensors, g_params_.names, g_opt_);
  g_params_.zero_grad();
}

MetricRow GanTrainer::step() {
  if (config_.linear_lr_decay) {
    const double remaining =
        1.0 - static_cast<double>(iteration_) / static_cast<double>(std::max<std::size_t>(config_.iterations, 1));
    g_opt_.config.learning_rate = config_.generator_adam.learning_rate * std::max(remaining, 0.0);
    d_opt_.config.learning_rate = config_.discriminator_adam.learning_rate * std::max(remaining, 0.0);
  }
  model_.update_spectral_states();
  MetricRow row;
  for (std::size_t k = 0; k < config_.d_steps_per_g_step; ++k) discriminator_step(row.d_loss);
  generator_step(row.g_loss, row.se_seen, row.se_unseen);
  iteration_ += 1;
  row.iteration = iteration_;
  log_.push_back(row);
  return row;
}

void GanTrainer::run(const std::function<void(const GanTrainer&)>& on_checkpoint, std::size_t checkpoint_every) {
  while (iteration_ < config_.iterations) {
    step();
    if (on_checkpoint && checkpoint_every > 0 && iteration_ % checkpoint_every == 0) on_checkpoint(*this);
  }
}

TrainerSnapshot GanTrainer::snapshot() const {
  return TrainerSnapshot{iteration_, g_opt_, d_opt_, data_rng_.serialize(), knowledge_rng_.serialize()};
}

void GanTrainer::restore(const TrainerSnapshot& snapshot, std::vector<MetricRow> log) {
  require(snapshot.generator_opt.first_moment.size() == g_params_.tensors.size() &&
              snapshot.discriminator_opt.first_moment.size() == d_params_.tensors.size(),
          ErrorKind::kContract, "trainer snapshot does not match the model");
  iteration_ = snapshot.iteration;
  g_opt_ = snapshot.generator_opt;
  d_opt_ = snapshot.discriminator_opt;
  data_rng_.deserialize(snapshot.data_rng);
  knowledge_rng_.deserialize(snapshot.knowledge_rng);
  log_ = std::move(log);
}

TrainResult train(GanModel model, const Dataset& dataset, const SplitPlan& split, const ConditionSource& conditions,
                  const RegressorModel* embedder, const TrainConfig& config) {
  GanTrainer trainer(std::move(model), dataset, split, conditions, embedder, config);
  trainer.run();
  return TrainResult{trainer.model(), trainer.log()};
}

}  // namespace kggan
