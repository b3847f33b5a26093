// SPDX-License-Identifier: Apache-2.0
#include <cstdlib>
#include <iostream>
#include <cstdint>
#include <optional>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "cli/commands.hpp"
#include "cli/config.hpp"

namespace {

using smsl::cli::ExperimentConfig;

// SMSL_LOG_LEVEL=trace|debug|info|warn|error|off, default warn.
void setup_logging() {
  auto logger = spdlog::stderr_color_mt("smsl");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char *level = std::getenv("SMSL_LOG_LEVEL")) {
    spdlog::set_level(spdlog::level::from_str(level));
  }
}

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string dataset;
};

void add_common(CLI::App *cmd, CommonFlags &flags) {
  cmd->add_option("--config", flags.config_path, "Experiment JSON config");
  cmd->add_option("--seed", flags.seed, "Overrides data_seed and seed");
  cmd->add_option("--out", flags.out, "Output directory");
}

ExperimentConfig resolve(const CommonFlags &flags) {
  ExperimentConfig cfg = flags.config_path.empty()
                             ? ExperimentConfig{}
                             : smsl::cli::load_config(flags.config_path);
  if (flags.seed) {
    cfg.data.seed = *flags.seed;
    cfg.train.seed = *flags.seed;
  }
  if (!flags.dataset.empty()) cfg.dataset_dir = flags.dataset;
  return cfg;
}

}  // namespace

int main(int argc, char **argv) {
  setup_logging();
  CLI::App app{"Soft-label metric learning lab: losses, training and retrieval metrics"};
  app.require_subcommand(1);

  CommonFlags gen_flags;
  auto *gen = app.add_subcommand("gen-data", "Generate a synthetic dataset");
  add_common(gen, gen_flags);

  CommonFlags train_flags;
  auto *train = app.add_subcommand("train", "Train an encoder pair");
  add_common(train, train_flags);
  train->add_option("--dataset", train_flags.dataset, "Dataset directory");

  smsl::cli::EvalOptions eval_opts;
  std::string eval_out;
  auto *eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval->add_option("--checkpoint", eval_opts.checkpoint, "checkpoint.bin")->required();
  eval->add_option("--dataset", eval_opts.dataset_dir, "Dataset directory")->required();
  eval->add_flag("--flip", eval_opts.flip, "Flip augmentation at inference");
  eval->add_option("--out", eval_out, "Directory for report.json / similarity.bin");
  eval->add_option("--relevance-threshold", eval_opts.relevance_threshold,
                   "mAP relevance threshold (default: any c > 0)");

  CommonFlags compare_flags;
  auto *compare = app.add_subcommand("compare", "Train and compare several losses");
  add_common(compare, compare_flags);
  compare->add_option("--dataset", compare_flags.dataset, "Dataset directory");

  smsl::cli::EnsembleOptions ens_opts;
  std::string ens_out;
  std::vector<std::string> ens_paths;
  std::string ens_relevancy;
  auto *ensemble = app.add_subcommand("ensemble", "Sum similarity matrices and evaluate");
  ensemble->add_option("matrices", ens_paths, "Similarity matrix files (.csv or SSL1)")
      ->required();
  ensemble->add_option("--relevancy", ens_relevancy, "Relevancy matrix file")->required();
  ensemble->add_option("--out", ens_out, "Directory for ensemble outputs");
  ensemble->add_option("--relevance-threshold", ens_opts.relevance_threshold,
                       "mAP relevance threshold (default: any c > 0)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? smsl::cli::kOk : smsl::cli::kUsage;
  }

  try {
    if (gen->parsed()) {
      ExperimentConfig cfg = resolve(gen_flags);
      if (!gen_flags.out.empty()) cfg.dataset_dir = gen_flags.out;
      smsl::cli::cmd_gen_data(cfg, std::cout);
    } else if (train->parsed()) {
      ExperimentConfig cfg = resolve(train_flags);
      if (!train_flags.out.empty()) cfg.out = train_flags.out;
      smsl::cli::cmd_train(cfg, std::cout);
    } else if (eval->parsed()) {
      eval_opts.out_dir = eval_out;
      smsl::cli::cmd_eval(eval_opts, std::cout);
    } else if (compare->parsed()) {
      ExperimentConfig cfg = resolve(compare_flags);
      if (!compare_flags.out.empty()) cfg.out = compare_flags.out;
      smsl::cli::cmd_compare(cfg, std::cout);
    } else if (ensemble->parsed()) {
      for (const auto &p : ens_paths) ens_opts.similarity_paths.emplace_back(p);
      ens_opts.relevancy_path = ens_relevancy;
      ens_opts.out_dir = ens_out;
      smsl::cli::cmd_ensemble(ens_opts, std::cout);
    }
  } catch (const smsl::Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return smsl::cli::exit_code_for(e.code());
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return smsl::cli::kUsage;
  }
  return smsl::cli::kOk;
}
