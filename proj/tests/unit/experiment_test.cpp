// Copyright 2026 The kggan Authors
// SPDX-License-Identifier: Apache-2.0

#include "kggan/experiment.hpp"

#include <gtest/gtest.h>

#include <map>

#include "kggan/persistence.hpp"
#include "test_util.hpp"

namespace kggan {
namespace {

using testing::error_kind_of;

ExperimentConfig tiny_config(const fs::path& out) {
  ExperimentConfig c = default_config(7);
  c.n_categories = 6;
  c.n_unseen = 2;
  c.images_per_category = 6;
  c.image_size = 8;
  c.descriptions_per_category = 3;
  c.embedding_dim = 64;
  c.z_dim = 4;
  c.generator_hidden = {16};
  c.discriminator_hidden = {16, 8};
  c.gan_iterations = 20;
  c.gan_batch_size = 8;
  c.embedder_hidden1 = 16;
  c.embedder_hidden2 = 8;
  c.embedder_steps = 30;
  c.embedder_batch_size = 8;
  c.n_gen = 8;
  c.sample_grid_columns = 2;
  c.sample_grid_rows = 2;
  c.checkpoint_every = 7;
  c.out_dir = out.string();
  return c;
}

// Every regular file under dir, keyed by relative path.
std::map<std::string, std::string> snapshot_tree(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) files[fs::relative(entry.path(), dir).string()] = read_text_file(entry.path());
  }
  return files;
}

class ExperimentTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("kggan_experiment_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path dir_;
};

TEST(ExperimentConfigText, RoundTrip) {
  ExperimentConfig c = tiny_config("somewhere");
  c.lambda_se = 0.25;
  c.condition_mode = ConditionMode::kOneHot;
  c.augment_real = true;
  c.gan_learning_rate = 3.3e-4;
  const std::string text = serialize_config(c);
  EXPECT_EQ(parse_config(text), c);
  EXPECT_EQ(serialize_config(parse_config(text)), text);
}

TEST(ExperimentConfigText, MissingKeysKeepDefaultsAndSeedsDerive) {
  EXPECT_EQ(parse_config(""), default_config(1));
  EXPECT_EQ(parse_config("# only a comment\nseed = 5  # trailing\n"), default_config(5));
  const ExperimentConfig c = parse_config("seed = 5\ngan_seed = 99\n");
  EXPECT_EQ(c.gan_seed, 99u);
  EXPECT_EQ(c.data_seed, default_config(5).data_seed);
  EXPECT_NE(default_config(5).data_seed, default_config(6).data_seed);
}

TEST(ExperimentConfigText, BadInputIsConfigError) {
  for (const char* text : {"no_such_key = 1", "seed = 1\nseed = 2", "seed 1", "seed = -3", "lambda_se = nan",
                           "gan_iterations = 12x", "augment_real = maybe", "generator_hidden = 8,,8",
                           "condition_mode = sideways"}) {
    EXPECT_EQ(error_kind_of([&] { parse_config(text); }), ErrorKind::kConfig) << text;
  }
}

TEST(ExperimentConfigText, ValidateRejectsBadValues) {
  const ExperimentConfig good = tiny_config("x");
  EXPECT_NO_THROW(validate(good));
  auto broken = [&](auto mutate) {
    ExperimentConfig c = good;
    mutate(c);
    return error_kind_of([&] { validate(c); });
  };
  EXPECT_EQ(broken([](ExperimentConfig& c) { c.n_unseen = c.n_categories; }), ErrorKind::kConfig);
  EXPECT_EQ(broken([](ExperimentConfig& c) { c.lambda_se = -0.1; }), ErrorKind::kConfig);
  EXPECT_EQ(broken([](ExperimentConfig& c) { c.generator_hidden = {8, 0}; }), ErrorKind::kConfig);
  EXPECT_EQ(broken([](ExperimentConfig& c) { c.gan_beta2 = 1.0; }), ErrorKind::kConfig);
  EXPECT_EQ(broken([](ExperimentConfig& c) { c.n_gen = 1; }), ErrorKind::kConfig);
  EXPECT_EQ(broken([](ExperimentConfig& c) { c.out_dir.clear(); }), ErrorKind::kConfig);
}

TEST(ExperimentConfigText, HashIgnoresOutDirOnly) {
  const ExperimentConfig a = tiny_config("a");
  ExperimentConfig b = tiny_config("b");
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.lambda_se = 0.2;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(AblationCells, OrderAndSemantics) {
  const auto& cells = ablation_cells();
  ASSERT_EQ(cells.size(), 4u);
  EXPECT_EQ(cells[0].name, "baseline_full_data");
  EXPECT_EQ(cells[1].name, "one_hot_kggan");
  EXPECT_EQ(cells[2].name, "kggan_no_se");
  EXPECT_EQ(cells[3].name, "kggan_full");

  const ExperimentConfig c = tiny_config("x");
  const TrainConfig baseline = train_config_for(c, find_cell("baseline_full_data"));
  EXPECT_EQ(baseline.objective, Objective::kAdversarialOnly);
  EXPECT_TRUE(baseline.reals_from_all_categories);
  EXPECT_EQ(find_cell("baseline_full_data").condition_mode, ConditionMode::kOneHot);

  EXPECT_EQ(find_cell("one_hot_kggan").condition_mode, ConditionMode::kOneHot);
  EXPECT_EQ(train_config_for(c, find_cell("one_hot_kggan")).lambda_se, c.lambda_se);
  EXPECT_FALSE(train_config_for(c, find_cell("one_hot_kggan")).reals_from_all_categories);

  EXPECT_EQ(find_cell("kggan_no_se").condition_mode, ConditionMode::kSemanticEmbedding);
  EXPECT_EQ(train_config_for(c, find_cell("kggan_no_se")).lambda_se, 0.0);

  const TrainConfig full = train_config_for(c, find_cell("kggan_full"));
  EXPECT_EQ(full.lambda_se, 0.1);
  EXPECT_EQ(full.objective, Objective::kKnowledgeGuided);
  EXPECT_EQ(full.seed, c.train_seed);
  EXPECT_EQ(full.iterations, c.gan_iterations);
}

TEST(AblationCells, UnknownNameListsValidCells) {
  try {
    find_cell("kggan_ful");
    FAIL() << "expected a config error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
    const std::string message = e.what();
    for (const auto& cell : ablation_cells()) EXPECT_NE(message.find(cell.name), std::string::npos) << message;
  }
}

TEST_F(ExperimentTest, GenerateDataIsDeterministicAndComplete) {
  const ExperimentConfig c = tiny_config(dir_);
  cmd_generate_data(c);
  const auto first = snapshot_tree(dir_);
  cmd_generate_data(c);
  EXPECT_EQ(snapshot_tree(dir_), first);

  for (const char* name : {"data/manifest.csv", "data/images.bin", "data/descriptions.txt", "data/categories.csv",
                           "data/embeddings.txt", "data/split.txt", "data/config.txt"}) {
    EXPECT_TRUE(first.contains(name)) << name;
  }
  const ExperimentData loaded = load_data(c);
  EXPECT_EQ(loaded.dataset.samples.size(), c.n_categories * c.images_per_category);
  EXPECT_EQ(loaded.split.unseen_ids.size(), c.n_unseen);
  const EmbeddingTable built = build_data(c).embeddings;
  ASSERT_EQ(loaded.embeddings.size(), built.size());
  for (const auto& [id, e] : built) EXPECT_EQ(loaded.embeddings.at(id).vector, e.vector) << id;
}

TEST_F(ExperimentTest, CommandsNeedTheirInputs) {
  const ExperimentConfig c = tiny_config(dir_);
  EXPECT_EQ(error_kind_of([&] { cmd_train(c, "kggan_full"); }), ErrorKind::kIo);
  cmd_generate_data(c);
  EXPECT_EQ(error_kind_of([&] { cmd_train(c, "kggan_full"); }), ErrorKind::kIo);  // no embedder yet
  EXPECT_EQ(error_kind_of([&] { cmd_evaluate(c, "kggan_full"); }), ErrorKind::kIo);
  EXPECT_EQ(error_kind_of([&] { cmd_train(c, "nope"); }), ErrorKind::kConfig);
}

TEST_F(ExperimentTest, CheckpointFromAnotherConfigIsRejected) {
  ExperimentConfig c = tiny_config(dir_);
  cmd_generate_data(c);
  cmd_train_embedder(c);
  c.lambda_se = 0.5;
  EXPECT_EQ(error_kind_of([&] { load_embedder(c); }), ErrorKind::kConfig);
}

TEST_F(ExperimentTest, ResumeFromMidRunCheckpointMatchesUninterruptedRun) {
  const ExperimentConfig c = tiny_config(dir_);
  cmd_generate_data(c);
  cmd_train_embedder(c);
  cmd_train(c, "kggan_full");
  const Paths paths{c.out_dir};
  const std::string full_ckpt = read_text_file(paths.checkpoint("kggan_full"));
  const std::string full_log = read_text_file(paths.metrics("kggan_full"));
  EXPECT_EQ(read_metric_log(paths.metrics("kggan_full")).size(), c.gan_iterations);

  // Replace the artifacts with those of a run stopped after 9 iterations.
  {
    const ExperimentData data = load_data(c);
    const RegressorModel embedder = load_embedder(c);
    const AblationCell& cell = find_cell("kggan_full");
    const ConditionSource conditions(cell.condition_mode, data.dataset.category_ids(), data.embeddings);
    GanTrainer trainer(
        GanModel::create(architecture_for(c, conditions.condition_dim()), cell.condition_mode, c.gan_seed),
        data.dataset, data.split, conditions, &embedder, train_config_for(c, cell));
    for (int i = 0; i < 9; ++i) trainer.step();
    write_checkpoint(paths.checkpoint(cell.name), gan_checkpoint(trainer.model(), trainer.snapshot(), config_hash(c)));
    write_metric_log(paths.metrics(cell.name), trainer.log(), ArtifactHeader{config_hash(c), c.seed, "metrics kggan_full"});
  }
  ASSERT_NE(read_text_file(paths.checkpoint("kggan_full")), full_ckpt);

  cmd_train(c, "kggan_full", /*resume=*/true);
  EXPECT_EQ(read_text_file(paths.checkpoint("kggan_full")), full_ckpt);
  EXPECT_EQ(read_text_file(paths.metrics("kggan_full")), full_log);
}

TEST_F(ExperimentTest, EvaluateIsRepeatableAndWritesGrids) {
  const ExperimentConfig c = tiny_config(dir_);
  cmd_generate_data(c);
  cmd_train_embedder(c);
  cmd_train(c, "kggan_no_se");
  const CellEvaluation a = cmd_evaluate(c, "kggan_no_se");
  const fs::path eval_dir = Paths{c.out_dir}.eval("kggan_no_se");
  const auto first = snapshot_tree(eval_dir);
  const CellEvaluation b = cmd_evaluate(c, "kggan_no_se");
  EXPECT_EQ(snapshot_tree(eval_dir), first);
  EXPECT_EQ(a.fid.per_category, b.fid.per_category);

  std::size_t grids = 0;
  for (const auto& [name, contents] : first) grids += name.starts_with("samples/") && name.ends_with(".ppm");
  EXPECT_EQ(grids, c.n_categories);
  for (const char* name : {"fid.csv", "consistency.csv", "consistency_untrained.csv", "color.csv", "table.txt"}) {
    EXPECT_TRUE(first.contains(name)) << name;
  }
  EXPECT_EQ(a.fid.per_category.size(), c.n_categories);
  EXPECT_TRUE(std::isfinite(a.consistency_ratio));
}

TEST_F(ExperimentTest, AblateWritesFourRowsAndReportReRendersIt) {
  ExperimentConfig c = tiny_config(dir_);
  c.gan_iterations = 5;
  ASSERT_TRUE(cmd_ablate(c));
  const Paths paths{c.out_dir};
  const std::string report = read_text_file(paths.ablation() / "report.txt");
  const std::string csv = read_text_file(paths.ablation() / "report.csv");
  for (const auto& cell : ablation_cells()) {
    EXPECT_NE(report.find(cell.method), std::string::npos) << cell.method;
    EXPECT_NE(csv.find(cell.name + ","), std::string::npos) << cell.name;
    EXPECT_TRUE(fs::exists(paths.checkpoint(cell.name)));
  }
  EXPECT_EQ(report.find("FAILED"), std::string::npos);
  EXPECT_EQ(report.find("undetermined"), std::string::npos);

  ASSERT_TRUE(cmd_report(c));
  EXPECT_EQ(read_text_file(paths.ablation() / "report.txt"), report);
  EXPECT_EQ(read_text_file(paths.ablation() / "report.csv"), csv);
}

std::vector<AblationRow> rows_with(double full, double one_hot, double no_se) {
  std::vector<AblationRow> rows;
  for (const auto& cell : ablation_cells()) {
    AblationRow r;
    r.cell = &cell;
    r.ok = true;
    r.seen_fid = 1.0;
    r.unseen_fid = cell.name == "kggan_full"      ? full
                   : cell.name == "one_hot_kggan" ? one_hot
                   : cell.name == "kggan_no_se"   ? no_se
                                                  : 9.0;
    rows.push_back(r);
  }
  return rows;
}

TEST(AblationReport, VerdictsCompareUnseenFid) {
  const ExperimentConfig c = tiny_config("x");
  const std::string report = format_ablation_report(c, rows_with(1.0, 3.0, 2.0));
  EXPECT_NE(report.find("verdict: unseen FID kggan_full < one_hot_kggan: holds (1.0000 vs 3.0000)"), std::string::npos)
      << report;
  EXPECT_NE(report.find("verdict: unseen FID kggan_no_se < one_hot_kggan: holds (2.0000 vs 3.0000)"),
            std::string::npos);
  EXPECT_NE(report.find("verdict: unseen FID kggan_full < kggan_no_se: holds (1.0000 vs 2.0000)"), std::string::npos);

  const std::string reversed = format_ablation_report(c, rows_with(3.0, 1.0, 2.0));
  EXPECT_NE(reversed.find("kggan_full < one_hot_kggan: does not hold (3.0000 vs 1.0000)"), std::string::npos);
  // Ties do not count as an improvement.
  const std::string tie = format_ablation_report(c, rows_with(2.0, 2.0, 2.0));
  EXPECT_NE(tie.find("kggan_full < one_hot_kggan: does not hold"), std::string::npos);
}

TEST(AblationReport, FailedCellIsReportedAndVerdictUndetermined) {
  const ExperimentConfig c = tiny_config("x");
  auto rows = rows_with(1.0, 3.0, 2.0);
  rows[1].ok = false;
  rows[1].failure = "numerical: non-finite loss";
  const std::string report = format_ablation_report(c, rows);
  EXPECT_NE(report.find("FAILED: numerical: non-finite loss"), std::string::npos) << report;
  EXPECT_NE(report.find("kggan_full < one_hot_kggan: undetermined"), std::string::npos);
  EXPECT_NE(report.find("kggan_full < kggan_no_se: holds"), std::string::npos);
  const std::string csv = format_ablation_csv(c, rows);
  EXPECT_NE(csv.find("one_hot_kggan,One-hot KG-GAN,one-hot,1,nan,nan,failed"), std::string::npos) << csv;
}

}  // namespace
}  // namespace kggan
