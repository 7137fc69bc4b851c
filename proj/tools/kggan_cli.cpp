// Copyright 2026 The kggan Authors
// SPDX-License-Identifier: Apache-2.0
//
// kggan: synthetic data, embedder, GAN training, evaluation and ablation.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "kggan/error.hpp"
#include "kggan/experiment.hpp"
#include "kggan/persistence.hpp"

namespace {

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
};

kggan::ExperimentConfig resolve(const GlobalOptions& opts) {
  kggan::ExperimentConfig config =
      opts.config_path.empty() ? kggan::default_config() : kggan::load_config(opts.config_path);
  if (opts.seed) kggan::with_master_seed(config, *opts.seed);
  if (!opts.out_dir.empty()) config.out_dir = opts.out_dir;
  kggan::validate(config);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"knowledge-guided conditional GAN experiments"};
  app.require_subcommand(1);

  GlobalOptions opts;
  app.add_option("--config", opts.config_path, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--seed", opts.seed, "master seed; re-derives every sub-seed");
  app.add_option("--out", opts.out_dir, "output directory (overrides out_dir)");

  auto* generate = app.add_subcommand("generate-data", "render the synthetic dataset and embeddings");
  auto* embedder = app.add_subcommand("train-embedder", "fit and freeze the embedding regressor");

  auto* train = app.add_subcommand("train", "train one ablation cell");
  std::string cell;
  bool resume = false;
  train->add_option("--cell", cell, "baseline_full_data, one_hot_kggan, kggan_no_se or kggan_full")->required();
  train->add_flag("--resume", resume, "continue from the cell's checkpoint");

  auto* evaluate = app.add_subcommand("evaluate", "per-category FID, consistency, color match, sample grids");
  std::string eval_cell;
  std::string checkpoint;
  evaluate->add_option("--cell", eval_cell, "cell to evaluate")->required();
  evaluate->add_option("--checkpoint", checkpoint, "checkpoint path (default: the cell's own)");

  auto* ablate = app.add_subcommand("ablate", "train and evaluate all four cells, write the comparison report");
  auto* report = app.add_subcommand("report", "rebuild the comparison report from evaluated cells");
  auto* dump = app.add_subcommand("print-config", "print the resolved configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kggan::exit_code_for(kggan::ErrorKind::kConfig);
  }

  try {
    const kggan::ExperimentConfig config = resolve(opts);
    if (*generate) {
      kggan::cmd_generate_data(config);
    } else if (*embedder) {
      kggan::cmd_train_embedder(config);
    } else if (*train) {
      kggan::cmd_train(config, cell, resume);
    } else if (*evaluate) {
      const auto ev = kggan::cmd_evaluate(config, eval_cell,
                                          checkpoint.empty() ? std::nullopt : std::optional<std::string>(checkpoint));
      std::cout << "seen FID " << ev.fid.seen_avg << "  unseen FID " << ev.fid.unseen_avg << "\n";
    } else if (*ablate) {
      const bool ok = kggan::cmd_ablate(config);
      std::cout << kggan::read_text_file(kggan::Paths{config.out_dir}.ablation() / "report.txt");
      if (!ok) return 1;
    } else if (*report) {
      const bool ok = kggan::cmd_report(config);
      std::cout << kggan::read_text_file(kggan::Paths{config.out_dir}.ablation() / "report.txt");
      if (!ok) return 1;
    } else if (*dump) {
      std::cout << kggan::serialize_config(config);
    }
  } catch (const kggan::Error& e) {
    std::cerr << "kggan: " << e.what() << "\n";
    return kggan::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "kggan: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
