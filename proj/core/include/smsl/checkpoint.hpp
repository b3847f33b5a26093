// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "smsl/train.hpp"

namespace smsl {

std::string to_json(const TrainConfig &cfg);
TrainConfig train_config_from_json(const std::string &json);

std::string history_to_json(const std::vector<EpochRecord> &history);

/// `<path>` holds four SSL1 frames (video W, video b, text W, text b); the
/// sidecar `<path>` with extension ".json" holds the TrainConfig and history.
void save_checkpoint(const std::filesystem::path &path,
                     const EncoderParams &params, const TrainConfig &cfg,
                     const std::vector<EpochRecord> &history);

std::filesystem::path sidecar_path(const std::filesystem::path &checkpoint);

/// Loads the parameters; the sidecar is optional.
struct Checkpoint {
  EncoderParams params;
  std::optional<TrainConfig> config;
};

Checkpoint load_checkpoint(const std::filesystem::path &path);

}  // namespace smsl
