// Copyright 2026 The kggan Authors
// SPDX-License-Identifier: Apache-2.0

#include "kggan/experiment.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "kggan/error.hpp"
#include "kggan/hash.hpp"
#include "kggan/log.hpp"
#include "kggan/persistence.hpp"

namespace kggan {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v[0] != '-') {
      const unsigned long long x = std::stoull(v, &used);
      if (used == v.size()) return x;
    }
  } catch (const std::exception&) {
  }
  fail(ErrorKind::kConfig, "config: " + key + " expects a non-negative integer, got '" + v + "'");
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used == v.size() && std::isfinite(x)) return x;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::kConfig, "config: " + key + " expects a finite number, got '" + v + "'");
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(ErrorKind::kConfig, "config: " + key + " expects true or false, got '" + v + "'");
}

std::vector<std::size_t> to_sizes(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  std::istringstream in(v);
  std::string field;
  while (std::getline(in, field, ',')) out.push_back(to_u64(key, trim(field)));
  if (out.empty()) fail(ErrorKind::kConfig, "config: " + key + " expects a comma-separated list of widths");
  return out;
}

std::string from_sizes(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::string from_double(double x) { return fmt::format("{}", x); }

struct Field {
  const char* key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

#define KGGAN_U64(name)                                                                  \
  Field {                                                                                \
    #name, [](const ExperimentConfig& c) { return std::to_string(c.name); },            \
        [](ExperimentConfig& c, const std::string& v) { c.name = to_u64(#name, v); }     \
  }
#define KGGAN_DOUBLE(name)                                                               \
  Field {                                                                                \
    #name, [](const ExperimentConfig& c) { return from_double(c.name); },               \
        [](ExperimentConfig& c, const std::string& v) { c.name = to_double(#name, v); }  \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      KGGAN_U64(seed),
      KGGAN_U64(data_seed),
      KGGAN_U64(split_seed),
      KGGAN_U64(embedder_seed),
      KGGAN_U64(gan_seed),
      KGGAN_U64(train_seed),
      KGGAN_U64(eval_seed),
      KGGAN_U64(n_categories),
      KGGAN_U64(n_unseen),
      KGGAN_U64(images_per_category),
      KGGAN_U64(image_size),
      KGGAN_U64(descriptions_per_category),
      KGGAN_U64(embedding_dim),
      Field{"condition_mode", [](const ExperimentConfig& c) { return std::string(to_string(c.condition_mode)); },
            [](ExperimentConfig& c, const std::string& v) { c.condition_mode = parse_condition_mode(v); }},
      KGGAN_DOUBLE(lambda_se),
      KGGAN_U64(z_dim),
      Field{"generator_hidden", [](const ExperimentConfig& c) { return from_sizes(c.generator_hidden); },
            [](ExperimentConfig& c, const std::string& v) { c.generator_hidden = to_sizes("generator_hidden", v); }},
      Field{"discriminator_hidden", [](const ExperimentConfig& c) { return from_sizes(c.discriminator_hidden); },
            [](ExperimentConfig& c, const std::string& v) {
              c.discriminator_hidden = to_sizes("discriminator_hidden", v);
            }},
      KGGAN_U64(gan_iterations),
      KGGAN_U64(gan_batch_size),
      KGGAN_U64(d_steps_per_g_step),
      KGGAN_DOUBLE(gan_learning_rate),
      KGGAN_DOUBLE(gan_beta1),
      KGGAN_DOUBLE(gan_beta2),
      Field{"gan_lr_decay", [](const ExperimentConfig& c) { return std::string(c.gan_lr_decay ? "true" : "false"); },
            [](ExperimentConfig& c, const std::string& v) { c.gan_lr_decay = to_bool("gan_lr_decay", v); }},
      Field{"augment_real", [](const ExperimentConfig& c) { return std::string(c.augment_real ? "true" : "false"); },
            [](ExperimentConfig& c, const std::string& v) { c.augment_real = to_bool("augment_real", v); }},
      KGGAN_U64(embedder_hidden1),
      KGGAN_U64(embedder_hidden2),
      KGGAN_U64(embedder_steps),
      KGGAN_U64(embedder_batch_size),
      KGGAN_DOUBLE(embedder_learning_rate),
      KGGAN_U64(n_gen),
      KGGAN_U64(sample_grid_columns),
      KGGAN_U64(sample_grid_rows),
      KGGAN_U64(checkpoint_every),
      Field{"out_dir", [](const ExperimentConfig& c) { return c.out_dir; },
            [](ExperimentConfig& c, const std::string& v) { c.out_dir = v; }},
  };
  return table;
}

#undef KGGAN_U64
#undef KGGAN_DOUBLE

constexpr std::uint64_t kSeedTagData = 1;
constexpr std::uint64_t kSeedTagSplit = 2;
constexpr std::uint64_t kSeedTagEmbedder = 3;
constexpr std::uint64_t kSeedTagGan = 4;
constexpr std::uint64_t kSeedTagTrain = 5;
constexpr std::uint64_t kSeedTagEval = 6;

ArtifactHeader header_for(const ExperimentConfig& config, std::string kind) {
  return ArtifactHeader{config_hash(config), config.seed, std::move(kind)};
}

ConditionSource conditions_for(const AblationCell& cell, const ExperimentData& data) {
  return ConditionSource(cell.condition_mode, data.dataset.category_ids(), data.embeddings);
}

std::vector<int> unseen_ids(const SplitPlan& split) { return {split.unseen_ids.begin(), split.unseen_ids.end()}; }

std::string fixed(double x) { return std::isfinite(x) ? fmt::format("{:.4f}", x) : std::string("n/a"); }

std::string per_category_csv(const ExperimentConfig& config, const SplitPlan& split, const std::string& kind,
                             const std::string& column, const std::map<int, double>& values) {
  std::string out = header_for(config, kind).line() + "\ncategory_id,split," + column + "\n";
  for (const auto& [id, v] : values) {
    out += fmt::format("{},{},{:.17g}\n", id, split.is_unseen(id) ? "unseen" : "seen", v);
  }
  return out;
}

void check_hash(const ExperimentConfig& config, const Checkpoint& c, const fs::path& path) {
  require(c.config_hash == config_hash(config), ErrorKind::kConfig,
          fmt::format("{} was written under config hash {:016x}, current config hashes to {:016x}", path.string(),
                      c.config_hash, config_hash(config)));
}

}  // namespace

// ---- config ----------------------------------------------------------------

ExperimentConfig default_config(std::uint64_t master_seed) {
  ExperimentConfig c;
  with_master_seed(c, master_seed);
  return c;
}

void with_master_seed(ExperimentConfig& c, std::uint64_t master_seed) {
  c.seed = master_seed;
  c.data_seed = derive_seed(master_seed, kSeedTagData);
  c.split_seed = derive_seed(master_seed, kSeedTagSplit);
  c.embedder_seed = derive_seed(master_seed, kSeedTagEmbedder);
  c.gan_seed = derive_seed(master_seed, kSeedTagGan);
  c.train_seed = derive_seed(master_seed, kSeedTagTrain);
  c.eval_seed = derive_seed(master_seed, kSeedTagEval);
}

ExperimentConfig parse_config(std::string_view text) {
  std::map<std::string, std::string> entries;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorKind::kConfig,
            fmt::format("config line {}: expected 'key = value', got '{}'", line_no, line));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const bool known =
        std::any_of(fields().begin(), fields().end(), [&](const Field& f) { return key == f.key; });
    require(known, ErrorKind::kConfig, fmt::format("config line {}: unknown key '{}'", line_no, key));
    require(!entries.contains(key), ErrorKind::kConfig, fmt::format("config line {}: duplicate key '{}'", line_no, key));
    entries[key] = value;
  }
  ExperimentConfig c;
  std::uint64_t master = 1;
  if (auto it = entries.find("seed"); it != entries.end()) master = to_u64("seed", it->second);
  with_master_seed(c, master);
  for (const Field& f : fields()) {
    if (auto it = entries.find(f.key); it != entries.end()) f.set(c, it->second);
  }
  return c;
}

std::string serialize_config(const ExperimentConfig& config) {
  std::string out;
  for (const Field& f : fields()) out += std::string(f.key) + " = " + f.get(config) + "\n";
  return out;
}

ExperimentConfig load_config(const fs::path& path) { return parse_config(read_text_file(path)); }

void validate(const ExperimentConfig& c) {
  require(c.n_categories >= 2, ErrorKind::kConfig, "config: n_categories must be at least 2");
  require(c.n_unseen >= 1 && c.n_unseen < c.n_categories, ErrorKind::kConfig,
          "config: n_unseen must lie in [1, n_categories)");
  require(c.images_per_category >= 2, ErrorKind::kConfig, "config: images_per_category must be at least 2");
  require(c.image_size >= 4, ErrorKind::kConfig, "config: image_size must be at least 4");
  require(c.descriptions_per_category >= 1, ErrorKind::kConfig, "config: descriptions_per_category must be positive");
  require(c.embedding_dim >= 1 && c.z_dim >= 1, ErrorKind::kConfig, "config: embedding_dim and z_dim must be positive");
  require(c.lambda_se >= 0.0, ErrorKind::kConfig, "config: lambda_se must be non-negative");
  for (auto widths : {c.generator_hidden, c.discriminator_hidden}) {
    require(std::all_of(widths.begin(), widths.end(), [](std::size_t w) { return w > 0; }), ErrorKind::kConfig,
            "config: hidden widths must be positive");
  }
  require(c.gan_batch_size >= 1 && c.d_steps_per_g_step >= 1, ErrorKind::kConfig,
          "config: gan_batch_size and d_steps_per_g_step must be positive");
  require(c.gan_learning_rate > 0.0 && c.embedder_learning_rate > 0.0, ErrorKind::kConfig,
          "config: learning rates must be positive");
  require(c.gan_beta1 >= 0.0 && c.gan_beta1 < 1.0 && c.gan_beta2 >= 0.0 && c.gan_beta2 < 1.0, ErrorKind::kConfig,
          "config: Adam betas must lie in [0, 1)");
  require(c.embedder_hidden1 >= 1 && c.embedder_hidden2 >= 1 && c.embedder_batch_size >= 1, ErrorKind::kConfig,
          "config: embedder widths and batch size must be positive");
  require(c.n_gen >= 2, ErrorKind::kConfig, "config: n_gen must be at least 2");
  require(c.sample_grid_columns >= 1 && c.sample_grid_rows >= 1, ErrorKind::kConfig,
          "config: sample grid must be non-empty");
  require(!c.out_dir.empty(), ErrorKind::kConfig, "config: out_dir must be set");
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  c.out_dir.clear();
  return fnv1a64(serialize_config(c));
}

// ---- cells -----------------------------------------------------------------

const std::vector<AblationCell>& ablation_cells() {
  static const std::vector<AblationCell> cells = {
      {"baseline_full_data", "SN-GAN", ConditionMode::kOneHot, Objective::kAdversarialOnly, false, true},
      {"one_hot_kggan", "One-hot KG-GAN", ConditionMode::kOneHot, Objective::kKnowledgeGuided, true, false},
      {"kggan_no_se", "KG-GAN w/o L_se", ConditionMode::kSemanticEmbedding, Objective::kKnowledgeGuided, false,
       false},
      {"kggan_full", "KG-GAN", ConditionMode::kSemanticEmbedding, Objective::kKnowledgeGuided, true, false},
  };
  return cells;
}

const AblationCell& find_cell(std::string_view name) {
  std::string names;
  for (const AblationCell& c : ablation_cells()) {
    if (c.name == name) return c;
    names += (names.empty() ? "" : ", ") + c.name;
  }
  fail(ErrorKind::kConfig, "unknown cell '" + std::string(name) + "'; valid cells: " + names);
}

TrainConfig train_config_for(const ExperimentConfig& config, const AblationCell& cell) {
  TrainConfig t;
  t.lambda_se = cell.knowledge_loss ? config.lambda_se : 0.0;
  t.iterations = config.gan_iterations;
  t.batch_size = config.gan_batch_size;
  t.d_steps_per_g_step = config.d_steps_per_g_step;
  t.seed = config.train_seed;
  t.generator_adam = AdamConfig{config.gan_learning_rate, config.gan_beta1, config.gan_beta2, 1e-8};
  t.discriminator_adam = t.generator_adam;
  t.linear_lr_decay = config.gan_lr_decay;
  t.objective = cell.objective;
  t.reals_from_all_categories = cell.reals_from_all_categories;
  t.augment_real = config.augment_real;
  return t;
}

GanArchitecture architecture_for(const ExperimentConfig& config, std::size_t condition_dim) {
  GanArchitecture a;
  a.image_size = config.image_size;
  a.z_dim = config.z_dim;
  a.condition_dim = condition_dim;
  a.generator_hidden = config.generator_hidden;
  a.discriminator_hidden = config.discriminator_hidden;
  return a;
}

RegressorConfig embedder_config_for(const ExperimentConfig& config) {
  RegressorConfig r;
  r.hidden1 = config.embedder_hidden1;
  r.hidden2 = config.embedder_hidden2;
  r.steps = config.embedder_steps;
  r.batch_size = config.embedder_batch_size;
  r.adam.learning_rate = config.embedder_learning_rate;
  r.seed = config.embedder_seed;
  return r;
}

// ---- in-memory pipeline ----------------------------------------------------

ExperimentData build_data(const ExperimentConfig& config) {
  validate(config);
  DatasetConfig dc;
  dc.n_categories = config.n_categories;
  dc.images_per_category = config.images_per_category;
  dc.image_size = config.image_size;
  dc.descriptions_per_category = config.descriptions_per_category;
  dc.seed = config.data_seed;
  ExperimentData data;
  data.dataset = generate_dataset(dc);
  data.split = make_split(data.dataset.category_ids(), config.n_unseen, config.split_seed);
  for (const CategorySpec& c : data.dataset.categories) {
    data.embeddings[c.id] = category_embedding(c.id, c.descriptions, config.embedding_dim);
  }
  return data;
}

RegressorModel build_embedder(const ExperimentConfig& config, const ExperimentData& data) {
  std::vector<Sample> seen;
  for (const Sample& s : data.dataset.samples) {
    if (data.split.is_seen(s.category_id)) seen.push_back(s);
  }
  return freeze(train_embedder(seen, data.embeddings, data.split, config.image_size, embedder_config_for(config)));
}

TrainResult train_cell(const ExperimentConfig& config, const AblationCell& cell, const ExperimentData& data,
                       const RegressorModel* embedder) {
  const ConditionSource conditions = conditions_for(cell, data);
  GanModel model =
      GanModel::create(architecture_for(config, conditions.condition_dim()), cell.condition_mode, config.gan_seed);
  return train(std::move(model), data.dataset, data.split, conditions, embedder, train_config_for(config, cell));
}

CellEvaluation evaluate_cell(const ExperimentConfig& config, const AblationCell& cell, const ExperimentData& data,
                             const RegressorModel& embedder, GanModel& trained) {
  const ConditionSource conditions = conditions_for(cell, data);
  const std::vector<int> unseen = unseen_ids(data.split);
  const std::vector<int> all = data.dataset.category_ids();
  CellEvaluation ev;

  GeneratorSource source(trained, conditions, config.eval_seed);
  ev.fid = per_category_fid(source, data.dataset, data.split, embedder, config.n_gen);
  ev.consistency = embedding_consistency(source, embedder, data.embeddings, all, config.n_gen);
  ev.color_match = color_fidelity(source, data.dataset.categories, all, config.n_gen);

  GanModel untrained = GanModel::create(trained.arch, cell.condition_mode, config.gan_seed);
  GeneratorSource untrained_source(untrained, conditions, config.eval_seed);
  ev.consistency_baseline = embedding_consistency(untrained_source, embedder, data.embeddings, all, config.n_gen);

  ev.consistency_ratio = mean_over(ev.consistency, unseen) / mean_over(ev.consistency_baseline, unseen);
  ev.unseen_color_match = mean_over(ev.color_match, unseen);
  return ev;
}

// ---- on-disk commands ------------------------------------------------------

void cmd_generate_data(const ExperimentConfig& config) {
  const ExperimentData data = build_data(config);
  const Paths paths{config.out_dir};
  const ArtifactHeader header = header_for(config, "dataset");
  write_dataset(paths.data(), data.dataset, header);
  write_embeddings(paths.data() / "embeddings.txt", data.embeddings, header);
  write_split(paths.data() / "split.txt", data.split, header);
  write_text_file(paths.data() / "config.txt", header.line() + "\n" + serialize_config(config));
}

ExperimentData load_data(const ExperimentConfig& config) {
  const Paths paths{config.out_dir};
  require(fs::exists(paths.data() / "manifest.csv"), ErrorKind::kIo,
          "no dataset under " + paths.data().string() + "; run generate-data first");
  ExperimentData data;
  data.dataset = read_dataset(paths.data());
  data.split = read_split(paths.data() / "split.txt");
  data.embeddings = read_embeddings(paths.data() / "embeddings.txt");
  for (int id : data.dataset.category_ids()) {
    require(data.embeddings.contains(id), ErrorKind::kIo,
            "embeddings.txt lacks category " + std::to_string(id));
    require(data.split.is_seen(id) || data.split.is_unseen(id), ErrorKind::kIo,
            "split.txt does not place category " + std::to_string(id));
  }
  require(data.dataset.image_size == config.image_size, ErrorKind::kConfig,
          "dataset image size differs from the config; regenerate the data");
  return data;
}

void cmd_train_embedder(const ExperimentConfig& config) {
  const ExperimentData data = load_data(config);
  const RegressorModel model = build_embedder(config, data);
  const Paths paths{config.out_dir};
  write_checkpoint(paths.embedder(), regressor_checkpoint(model, config_hash(config)));
  std::string loss = header_for(config, "embedder-loss").line() + "\nstep,loss\n";
  const auto& history = model.training_loss_history();
  for (std::size_t i = 0; i < history.size(); ++i) loss += fmt::format("{},{:.17g}\n", i + 1, history[i]);
  write_text_file(paths.embedder().parent_path() / "loss.csv", loss);
}

RegressorModel load_embedder(const ExperimentConfig& config) {
  const Paths paths{config.out_dir};
  require(fs::exists(paths.embedder()), ErrorKind::kIo,
          "no embedder at " + paths.embedder().string() + "; run train-embedder first");
  const Checkpoint c = read_checkpoint(paths.embedder());
  check_hash(config, c, paths.embedder());
  RegressorModel model = regressor_from_checkpoint(c);
  return model.frozen() ? model : freeze(std::move(model));
}

void cmd_train(const ExperimentConfig& config, std::string_view cell_name, bool resume) {
  validate(config);
  const AblationCell& cell = find_cell(cell_name);
  const Paths paths{config.out_dir};
  const ExperimentData data = load_data(config);

  std::optional<RegressorModel> embedder;
  if (cell.objective == Objective::kKnowledgeGuided || fs::exists(paths.embedder())) {
    embedder = load_embedder(config);
  }
  const TrainConfig train_config = train_config_for(config, cell);
  const ConditionSource conditions = conditions_for(cell, data);
  const std::uint64_t hash = config_hash(config);

  GanModel model;
  std::optional<TrainerSnapshot> snapshot;
  std::vector<MetricRow> log;
  if (resume) {
    const Checkpoint c = read_checkpoint(paths.checkpoint(cell.name));
    check_hash(config, c, paths.checkpoint(cell.name));
    model = gan_from_checkpoint(c);
    require(model.condition_mode == cell.condition_mode, ErrorKind::kConfig,
            "checkpoint condition mode does not match cell " + cell.name);
    snapshot = snapshot_from_checkpoint(c, train_config.generator_adam, train_config.discriminator_adam);
    log = read_metric_log(paths.metrics(cell.name));
    require(log.size() >= snapshot->iteration, ErrorKind::kIo, "metric log is shorter than the checkpoint");
    log.resize(snapshot->iteration);
  } else {
    model = GanModel::create(architecture_for(config, conditions.condition_dim()), cell.condition_mode,
                             config.gan_seed);
  }

  GanTrainer trainer(std::move(model), data.dataset, data.split, conditions, embedder ? &*embedder : nullptr,
                     train_config);
  if (snapshot) trainer.restore(*snapshot, std::move(log));

  const ArtifactHeader header = header_for(config, "metrics " + cell.name);
  auto save = [&](const GanTrainer& t) {
    write_checkpoint(paths.checkpoint(cell.name), gan_checkpoint(t.model(), t.snapshot(), hash));
    write_metric_log(paths.metrics(cell.name), t.log(), header);
  };
  if (!resume) save(trainer);
  try {
    trainer.run(save, config.checkpoint_every);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kNumerical) {
      // The checkpoint on disk is the last good one; keep the log up to the
      // failing iteration for diagnosis.
      write_metric_log(paths.cell(cell.name) / "metrics_failed.csv", trainer.log(), header);
    }
    throw;
  }
  save(trainer);
}

CellEvaluation cmd_evaluate(const ExperimentConfig& config, std::string_view cell_name,
                            const std::optional<fs::path>& checkpoint) {
  const AblationCell& cell = find_cell(cell_name);
  const Paths paths{config.out_dir};
  const fs::path ckpt_path = checkpoint.value_or(paths.checkpoint(cell.name));
  require(fs::exists(ckpt_path), ErrorKind::kIo, "missing checkpoint " + ckpt_path.string());
  const Checkpoint c = read_checkpoint(ckpt_path);
  check_hash(config, c, ckpt_path);
  GanModel model = gan_from_checkpoint(c);
  const ExperimentData data = load_data(config);
  const RegressorModel embedder = load_embedder(config);

  const CellEvaluation ev = evaluate_cell(config, cell, data, embedder, model);
  const fs::path dir = paths.eval(cell.name);
  write_text_file(dir / "fid.csv", per_category_csv(config, data.split, "fid " + cell.name, "fid", ev.fid.per_category));
  write_text_file(dir / "consistency.csv",
                  per_category_csv(config, data.split, "consistency " + cell.name, "error", ev.consistency));
  write_text_file(dir / "consistency_untrained.csv",
                  per_category_csv(config, data.split, "consistency-untrained " + cell.name, "error",
                                   ev.consistency_baseline));
  write_text_file(dir / "color.csv",
                  per_category_csv(config, data.split, "color " + cell.name, "match_rate", ev.color_match));

  std::string table = header_for(config, "evaluation " + cell.name).line() + "\n";
  table += fmt::format("{:<10} {:<7} {:>12} {:>12} {:>12}\n", "category", "split", "FID", "consistency", "color");
  for (const auto& [id, fid] : ev.fid.per_category) {
    table += fmt::format("{:<10} {:<7} {:>12} {:>12} {:>12}\n", id, data.split.is_unseen(id) ? "unseen" : "seen",
                         fixed(fid), fixed(ev.consistency.at(id)), fixed(ev.color_match.at(id)));
  }
  table += fmt::format("seen average FID    {}\nunseen average FID  {}\n", fixed(ev.fid.seen_avg),
                       fixed(ev.fid.unseen_avg));
  table += fmt::format("unseen consistency / untrained  {}\nunseen color match  {}\n", fixed(ev.consistency_ratio),
                       fixed(ev.unseen_color_match));
  for (int id : ev.fid.skipped) table += fmt::format("skipped category {} (fewer than 2 real images)\n", id);
  write_text_file(dir / "table.txt", table);

  const ConditionSource conditions = conditions_for(cell, data);
  GeneratorSource source(model, conditions, derive_seed(config.eval_seed, 0x5a4d));
  const std::size_t per_grid = config.sample_grid_columns * config.sample_grid_rows;
  for (int id : data.dataset.category_ids()) {
    write_ppm_grid(dir / "samples" / fmt::format("category_{:03}.ppm", id), source.images(id, per_grid),
                   config.sample_grid_columns);
  }
  return ev;
}

// ---- ablation report -------------------------------------------------------

namespace {

struct ReferenceRow {
  const char* method;
  double seen;
  double unseen;
};

// Published per-category FID averages for the four rows, quoted for
// orientation only; desk-scale numbers live on a different scale.
constexpr ReferenceRow kReference[] = {
    {"SN-GAN", 0.6922, 0.6201},
    {"One-hot KG-GAN", 0.7077, 0.6286},
    {"KG-GAN w/o L_se", 0.1412, 0.1408},
    {"KG-GAN", 0.1385, 0.1386},
};

const AblationRow* row_for(const std::vector<AblationRow>& rows, std::string_view name) {
  for (const AblationRow& r : rows) {
    if (r.cell->name == name) return &r;
  }
  return nullptr;
}

struct Verdict {
  const char* better;
  const char* worse;
};

constexpr Verdict kVerdicts[] = {
    {"kggan_full", "one_hot_kggan"},
    {"kggan_no_se", "one_hot_kggan"},
    {"kggan_full", "kggan_no_se"},
};

std::string condition_label(const AblationCell& cell) {
  return cell.condition_mode == ConditionMode::kOneHot ? "one-hot" : "embedding";
}

}  // namespace

std::string format_ablation_report(const ExperimentConfig& config, const std::vector<AblationRow>& rows) {
  std::string out = header_for(config, "ablation").line() + "\n\n";
  out += fmt::format("{:<18} {:<10} {:<5} {:<10} {:>10} {:>11}\n", "Method", "Condition", "L_se", "Data",
                     "Seen FID", "Unseen FID");
  for (const AblationRow& r : rows) {
    const AblationCell& c = *r.cell;
    const std::string data = c.reals_from_all_categories ? "Y1+Y2" : "Y1";
    if (r.ok) {
      out += fmt::format("{:<18} {:<10} {:<5} {:<10} {:>10} {:>11}\n", c.method, condition_label(c),
                         c.knowledge_loss ? "yes" : "no", data, fixed(r.seen_fid), fixed(r.unseen_fid));
    } else {
      out += fmt::format("{:<18} {:<10} {:<5} {:<10} FAILED: {}\n", c.method, condition_label(c),
                         c.knowledge_loss ? "yes" : "no", data, r.failure);
    }
  }
  out += "\n";
  for (const Verdict& v : kVerdicts) {
    const AblationRow* a = row_for(rows, v.better);
    const AblationRow* b = row_for(rows, v.worse);
    std::string outcome = "undetermined (cell failed)";
    if (a && b && a->ok && b->ok) {
      outcome = a->unseen_fid < b->unseen_fid ? "holds" : "does not hold";
      outcome += fmt::format(" ({} vs {})", fixed(a->unseen_fid), fixed(b->unseen_fid));
    }
    out += fmt::format("verdict: unseen FID {} < {}: {}\n", v.better, v.worse, outcome);
  }
  out += "\nreference (published seen / unseen FID, different scale):\n";
  for (const ReferenceRow& r : kReference) out += fmt::format("  {:<18} {:.4f} / {:.4f}\n", r.method, r.seen, r.unseen);
  return out;
}

std::string format_ablation_csv(const ExperimentConfig& config, const std::vector<AblationRow>& rows) {
  std::string out = header_for(config, "ablation").line() + "\ncell,method,condition,l_se,seen_fid,unseen_fid,status\n";
  for (const AblationRow& r : rows) {
    const AblationCell& c = *r.cell;
    out += fmt::format("{},{},{},{},{:.17g},{:.17g},{}\n", c.name, c.method, condition_label(c),
                       c.knowledge_loss ? 1 : 0, r.ok ? r.seen_fid : NAN, r.ok ? r.unseen_fid : NAN,
                       r.ok ? "ok" : "failed");
  }
  return out;
}

namespace {

bool write_report(const ExperimentConfig& config, const std::vector<AblationRow>& rows) {
  const Paths paths{config.out_dir};
  write_text_file(paths.ablation() / "report.txt", format_ablation_report(config, rows));
  write_text_file(paths.ablation() / "report.csv", format_ablation_csv(config, rows));
  return std::all_of(rows.begin(), rows.end(), [](const AblationRow& r) { return r.ok; });
}

}  // namespace

bool cmd_ablate(const ExperimentConfig& config) {
  validate(config);
  const Paths paths{config.out_dir};
  if (!fs::exists(paths.data() / "manifest.csv")) cmd_generate_data(config);
  if (!fs::exists(paths.embedder())) cmd_train_embedder(config);

  std::vector<AblationRow> rows;
  for (const AblationCell& cell : ablation_cells()) {
    AblationRow row;
    row.cell = &cell;
    try {
      cmd_train(config, cell.name);
      const CellEvaluation ev = cmd_evaluate(config, cell.name);
      row.ok = true;
      row.seen_fid = ev.fid.seen_avg;
      row.unseen_fid = ev.fid.unseen_avg;
    } catch (const Error& e) {
      warn("cell " + cell.name + " failed: " + e.what());
      row.failure = e.what();
    }
    rows.push_back(std::move(row));
  }
  return write_report(config, rows);
}

bool cmd_report(const ExperimentConfig& config) {
  const Paths paths{config.out_dir};
  std::vector<AblationRow> rows;
  for (const AblationCell& cell : ablation_cells()) {
    AblationRow row;
    row.cell = &cell;
    const fs::path fid_path = paths.eval(cell.name) / "fid.csv";
    if (!fs::exists(fid_path)) {
      row.failure = "no evaluation at " + fid_path.string();
      rows.push_back(std::move(row));
      continue;
    }
    std::istringstream in(read_text_file(fid_path));
    std::string line;
    std::map<int, double> per_category;
    SplitPlan split;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#' || line.rfind("category_id", 0) == 0) continue;
      std::istringstream fields_in(line);
      std::string id, which, value;
      std::getline(fields_in, id, ',');
      std::getline(fields_in, which, ',');
      std::getline(fields_in, value, ',');
      try {
        const int cid = std::stoi(id);
        per_category[cid] = std::stod(value);
        (which == "unseen" ? split.unseen_ids : split.seen_ids).insert(cid);
      } catch (const std::exception&) {
        fail(ErrorKind::kIo, fid_path.string() + ": malformed row '" + line + "'");
      }
    }
    FidReport report;
    report.per_category = std::move(per_category);
    summarize(report, split);
    row.ok = true;
    row.seen_fid = report.seen_avg;
    row.unseen_fid = report.unseen_avg;
    rows.push_back(std::move(row));
  }
  return write_report(config, rows);
}

}  // namespace kggan
