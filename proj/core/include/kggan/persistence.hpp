// Copyright 2026 The kggan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "kggan/gan.hpp"
#include "kggan/regressor.hpp"
#include "kggan/semantics.hpp"
#include "kggan/synth_data.hpp"

namespace kggan {

namespace fs = std::filesystem;

/// Provenance line written at the top of text artifacts ("# ..." comment).
struct ArtifactHeader {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::string kind;

  std::string line() const;
};

// Dataset on disk:
//   manifest.csv      "# header", "offset,category_id", one row per sample;
//                     offset is the sample index into the blob
//   images.bin        "KGDS" | version u32 | count u32 | side u32 | f32 LE data
//   descriptions.txt  "#category <id>" then one description per line
//   categories.csv    id,r,g,b,shape,texture_freq (17 significant digits)
inline constexpr std::uint32_t kDatasetVersion = 1;

void write_dataset(const fs::path& dir, const Dataset& dataset, const ArtifactHeader& header);
Dataset read_dataset(const fs::path& dir);

void write_image_blob(const fs::path& path, std::span<const Sample> samples, std::size_t image_size);
/// Returns images in blob order; image_size receives the side length.
std::vector<Tensor> read_image_blob(const fs::path& path, std::size_t& image_size);

void write_descriptions(const fs::path& path, std::span<const CategorySpec> categories, const ArtifactHeader& header);
std::map<int, std::vector<std::string>> read_descriptions(const fs::path& path);

/// Rows "category_id v_1 ... v_d" with 17 significant digits.
void write_embeddings(const fs::path& path, const EmbeddingTable& embeddings, const ArtifactHeader& header);
EmbeddingTable read_embeddings(const fs::path& path);

/// "seen 1 2 3" / "unseen 4 5" / "seed N" lines.
void write_split(const fs::path& path, const SplitPlan& split, const ArtifactHeader& header);
SplitPlan read_split(const fs::path& path);

// Checkpoints (all little-endian):
//   "KGCK" | version u32 | kind u32 | condition_mode u32 | config_hash u64
//   | tensor_count u32 | per tensor: name_len u32, name, rank u32, dims u32[rank]
//   | metadata_len u32 | metadata ("key=value\n" lines)
//   | f64 data of every tensor in header order
//   | FNV-1a 64 over all preceding bytes
inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class CheckpointKind : std::uint32_t { kRegressor = 1, kGan = 2 };

struct Checkpoint {
  CheckpointKind kind = CheckpointKind::kRegressor;
  std::uint32_t condition_mode = 0;
  std::uint64_t config_hash = 0;
  std::vector<std::pair<std::string, Tensor>> tensors;
  std::map<std::string, std::string> metadata;

  const Tensor& tensor(const std::string& name) const;
  const std::string& meta(const std::string& key) const;
};

void write_checkpoint(const fs::path& path, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(const fs::path& path);

Checkpoint regressor_checkpoint(const RegressorModel& model, std::uint64_t config_hash);
RegressorModel regressor_from_checkpoint(const Checkpoint& checkpoint);

Checkpoint gan_checkpoint(const GanModel& model, const TrainerSnapshot& snapshot, std::uint64_t config_hash);
GanModel gan_from_checkpoint(const Checkpoint& checkpoint);
TrainerSnapshot snapshot_from_checkpoint(const Checkpoint& checkpoint, const AdamConfig& generator_adam,
                                         const AdamConfig& discriminator_adam);

/// "iteration,L_D,L_G,L_se_seen,L_se_unseen" rows, 17 significant digits.
void write_metric_log(const fs::path& path, std::span<const MetricRow> rows, const ArtifactHeader& header);
std::vector<MetricRow> read_metric_log(const fs::path& path);

/// Binary PPM (P6) of images laid out row-major in a grid of `columns`.
void write_ppm_grid(const fs::path& path, std::span<const Tensor> images, std::size_t columns);

/// Whole file as a string; I/O error naming the path on failure.
std::string read_text_file(const fs::path& path);
void write_text_file(const fs::path& path, const std::string& contents);

}  // namespace kggan
