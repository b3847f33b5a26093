// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cli/config.hpp"
#include "smsl/error.hpp"
#include "smsl/metrics.hpp"
#include "smsl/synthetic.hpp"

namespace smsl::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDivergence = 2,
  kDataMismatch = 3,
};

ExitCode exit_code_for(ErrorCode code);

/// Dataset directory layout written by gen-data.
///   manifest.json   shapes, seed and file list
///   relevancy.csv   relevancy, CSV
///   relevancy.bin   relevancy, SSL1
///   video_raw.bin   N x (T*C*H*W) raw video inputs, SSL1
///   text_raw.bin    N x raw_dim raw text inputs, SSL1
///   labels.csv      id,verb,noun per item
void save_dataset(const std::filesystem::path &dir, const SyntheticDataset &data,
                  const SyntheticSpec &spec);
SyntheticDataset load_dataset(const std::filesystem::path &dir);

// Each command writes human-readable output to `out` and returns normally on
// success. Failures are thrown as smsl::Error; main maps them to exit codes.

void cmd_gen_data(const ExperimentConfig &cfg, std::ostream &out);

void cmd_train(const ExperimentConfig &cfg, std::ostream &out);

struct EvalOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path dataset_dir;
  std::filesystem::path out_dir;
  bool flip = false;
  double relevance_threshold = kAnyPositiveRelevance;
};

RetrievalReport cmd_eval(const EvalOptions &opts, std::ostream &out);

struct CompareRow {
  std::string name;
  RetrievalReport report;
};

std::vector<CompareRow> cmd_compare(const ExperimentConfig &cfg, std::ostream &out);

/// Table layout: Methods | mAP V->T T->V Avg | nDCG V->T T->V Avg, values
/// truncated to three significant digits.
std::string format_compare_table(const std::vector<CompareRow> &rows);
std::string format_compare_csv(const std::vector<CompareRow> &rows);

struct EnsembleOptions {
  std::vector<std::filesystem::path> similarity_paths;
  std::filesystem::path relevancy_path;
  std::filesystem::path out_dir;
  double relevance_threshold = kAnyPositiveRelevance;
};

struct EnsembleOutcome {
  std::vector<RetrievalReport> individual;
  RetrievalReport ensemble;
  /// ensemble minus the best individual value, per metric.
  RetrievalReport delta;
};

EnsembleOutcome cmd_ensemble(const EnsembleOptions &opts, std::ostream &out);

}  // namespace smsl::cli
