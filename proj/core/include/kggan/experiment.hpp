// Copyright 2026 The kggan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kggan/evaluation.hpp"
#include "kggan/gan.hpp"
#include "kggan/regressor.hpp"
#include "kggan/semantics.hpp"
#include "kggan/synth_data.hpp"

namespace kggan {

/// Every knob of an experiment. Defaults are the desk-scale setting: 16x16
/// images instead of 64x64 and 3,000 GAN iterations instead of 200k, with
/// the knowledge weight kept at 0.1.
struct ExperimentConfig {
  std::uint64_t seed = 1;
  // Sub-seeds; with_master_seed() derives them all from `seed`.
  std::uint64_t data_seed = 0;
  std::uint64_t split_seed = 0;
  std::uint64_t embedder_seed = 0;
  std::uint64_t gan_seed = 0;
  std::uint64_t train_seed = 0;
  std::uint64_t eval_seed = 0;

  std::size_t n_categories = 12;
  std::size_t n_unseen = 3;
  std::size_t images_per_category = 80;
  std::size_t image_size = 16;
  std::size_t descriptions_per_category = 10;
  std::size_t embedding_dim = kDefaultEmbeddingDim;

  // Used by `train` without --cell; ablation cells fix their own.
  ConditionMode condition_mode = ConditionMode::kSemanticEmbedding;
  double lambda_se = 0.1;

  std::size_t z_dim = 16;
  std::vector<std::size_t> generator_hidden{128, 256};
  std::vector<std::size_t> discriminator_hidden{256, 128};
  std::size_t gan_iterations = 3000;
  std::size_t gan_batch_size = 64;
  std::size_t d_steps_per_g_step = 1;
  double gan_learning_rate = 2e-4;
  double gan_beta1 = 0.0;
  double gan_beta2 = 0.9;
  bool gan_lr_decay = false;
  bool augment_real = false;

  std::size_t embedder_hidden1 = 128;
  std::size_t embedder_hidden2 = 64;
  std::size_t embedder_steps = 2000;
  std::size_t embedder_batch_size = 32;
  double embedder_learning_rate = 1e-3;

  std::size_t n_gen = 256;
  std::size_t sample_grid_columns = 8;
  std::size_t sample_grid_rows = 4;
  std::size_t checkpoint_every = 500;

  std::string out_dir = "out";

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Defaults with every sub-seed derived from master.
ExperimentConfig default_config(std::uint64_t master_seed = 1);
/// Sets seed and re-derives all sub-seeds.
void with_master_seed(ExperimentConfig& config, std::uint64_t master_seed);

/// "key = value" lines; '#' starts a comment. Keys missing from the text keep
/// their defaults (sub-seeds derive from the seed given in the text). Unknown
/// keys and malformed values are config errors.
ExperimentConfig parse_config(std::string_view text);
std::string serialize_config(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);
void validate(const ExperimentConfig& config);

/// FNV-1a of the serialized config without out_dir, so moving an output tree
/// does not change the provenance of what is in it.
std::uint64_t config_hash(const ExperimentConfig& config);

struct AblationCell {
  std::string name;
  std::string method;  // row label in the report
  ConditionMode condition_mode;
  Objective objective;
  bool knowledge_loss;  // lambda_se applied
  bool reals_from_all_categories;
};

/// baseline_full_data, one_hot_kggan, kggan_no_se, kggan_full, in report order.
const std::vector<AblationCell>& ablation_cells();
/// Config error listing valid names when the cell is unknown.
const AblationCell& find_cell(std::string_view name);

TrainConfig train_config_for(const ExperimentConfig& config, const AblationCell& cell);
GanArchitecture architecture_for(const ExperimentConfig& config, std::size_t condition_dim);
RegressorConfig embedder_config_for(const ExperimentConfig& config);

/// Dataset, split and embeddings of an experiment.
struct ExperimentData {
  Dataset dataset;
  SplitPlan split;
  EmbeddingTable embeddings;
};

ExperimentData build_data(const ExperimentConfig& config);
RegressorModel build_embedder(const ExperimentConfig& config, const ExperimentData& data);

struct CellEvaluation {
  FidReport fid;
  std::map<int, double> consistency;           // trained generator
  std::map<int, double> consistency_baseline;  // same cell, untrained generator
  std::map<int, double> color_match;
  double consistency_ratio = 0.0;              // unseen mean trained / untrained
  double unseen_color_match = 0.0;
};

/// Trains one cell in memory from a fresh model.
TrainResult train_cell(const ExperimentConfig& config, const AblationCell& cell, const ExperimentData& data,
                       const RegressorModel* embedder);

CellEvaluation evaluate_cell(const ExperimentConfig& config, const AblationCell& cell, const ExperimentData& data,
                             const RegressorModel& embedder, GanModel& trained);

// On-disk commands. Layout under config.out_dir:
//   data/       manifest.csv images.bin descriptions.txt categories.csv
//               embeddings.txt split.txt config.txt
//   embedder/   embedder.ckpt loss.csv
//   cells/<name>/checkpoint.ckpt metrics.csv eval/...
//   ablation/   report.txt report.csv
struct Paths {
  std::filesystem::path root;

  std::filesystem::path data() const { return root / "data"; }
  std::filesystem::path embedder() const { return root / "embedder" / "embedder.ckpt"; }
  std::filesystem::path cell(std::string_view name) const { return root / "cells" / std::string(name); }
  std::filesystem::path checkpoint(std::string_view name) const { return cell(name) / "checkpoint.ckpt"; }
  std::filesystem::path metrics(std::string_view name) const { return cell(name) / "metrics.csv"; }
  std::filesystem::path eval(std::string_view name) const { return cell(name) / "eval"; }
  std::filesystem::path ablation() const { return root / "ablation"; }
};

void cmd_generate_data(const ExperimentConfig& config);
ExperimentData load_data(const ExperimentConfig& config);

void cmd_train_embedder(const ExperimentConfig& config);
RegressorModel load_embedder(const ExperimentConfig& config);

/// Trains a cell, checkpointing every config.checkpoint_every iterations.
/// With resume, continues from the cell's checkpoint. A numerical failure
/// keeps the last good checkpoint and rethrows.
void cmd_train(const ExperimentConfig& config, std::string_view cell, bool resume = false);

/// Evaluates a checkpoint (the cell's own when none is given) and writes the
/// eval/ directory.
CellEvaluation cmd_evaluate(const ExperimentConfig& config, std::string_view cell,
                            const std::optional<std::filesystem::path>& checkpoint = std::nullopt);

struct AblationRow {
  const AblationCell* cell = nullptr;
  bool ok = false;
  std::string failure;
  double seen_fid = 0.0;
  double unseen_fid = 0.0;
};

/// Runs every cell end to end and writes ablation/report.{txt,csv}. Missing
/// data or embedder artifacts are produced first. Returns false when any
/// cell failed; the report then notes the failure.
bool cmd_ablate(const ExperimentConfig& config);

/// Re-renders the ablation report from the cells' eval directories.
bool cmd_report(const ExperimentConfig& config);

std::string format_ablation_report(const ExperimentConfig& config, const std::vector<AblationRow>& rows);
std::string format_ablation_csv(const ExperimentConfig& config, const std::vector<AblationRow>& rows);

}  // namespace kggan
