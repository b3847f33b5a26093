// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "smsl/synthetic.hpp"
#include "smsl/train.hpp"

namespace smsl::cli {

/// One row of a loss comparison. Unset fields inherit from the experiment.
struct CompareRun {
  std::string name;
  LossKind loss = LossKind::Sms;
  std::optional<double> margin;
  std::optional<double> tau;
  std::optional<std::string> dataset_dir;

  friend bool operator==(const CompareRun &, const CompareRun &) = default;
};

/// A whole experiment in one flat JSON document. Keys (all optional):
///
///   data:    data_seed n_items n_verb_classes n_noun_classes raw_dim
///            video_frames video_channels video_height video_width noise_sigma
///   loss:    loss margin tau alpha beta mining_threshold mining
///            triplet_strategy
///   train:   seed embed_dim lr lr_end warmup_epochs total_epochs batch_size
///            optimizer adam_beta1 adam_beta2 adam_epsilon weight_decay
///            evaluate_each_epoch init_checkpoint
///   metrics: relevance_threshold
///   paths:   dataset_dir out
///   compare: [{name, loss, margin?, tau?, dataset_dir?}, ...]
struct ExperimentConfig {
  SyntheticSpec data;
  TrainConfig train;
  std::string dataset_dir = "data";
  std::string out = "out";
  std::optional<std::string> init_checkpoint;
  std::vector<CompareRun> compare;

  friend bool operator==(const ExperimentConfig &,
                         const ExperimentConfig &) = default;
};

/// Default comparison runs: MI-MM (margin 0.2), adaptive MI-MM (0.4), SMS
/// without relaxation and SMS (margin 0.6, tau 0.1).
std::vector<CompareRun> default_compare_runs();

/// Throws ParseError / InvalidConfig with a "line N:" prefix pointing at the
/// offending text.
ExperimentConfig parse_config(const std::string &json);
ExperimentConfig load_config(const std::filesystem::path &path);
std::string print_config(const ExperimentConfig &cfg);

/// Validates the data and training sections.
void validate(const ExperimentConfig &cfg);

/// TrainConfig for one comparison row.
TrainConfig train_config_for(const ExperimentConfig &cfg, const CompareRun &run);

}  // namespace smsl::cli
