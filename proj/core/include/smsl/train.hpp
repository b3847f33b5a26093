// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "smsl/infer.hpp"
#include "smsl/losses.hpp"
#include "smsl/matrix.hpp"
#include "smsl/metrics.hpp"
#include "smsl/optimizer.hpp"
#include "smsl/synthetic.hpp"

namespace smsl {

struct TrainConfig {
  LossKind loss = LossKind::Sms;
  LossConfig loss_cfg;
  Mining mining = Mining::Paired;
  TripletStrategy strategy = TripletStrategy::AllPairs;
  std::size_t embed_dim = 256;
  double lr = 2e-5;
  double lr_end = 1e-6;
  std::size_t warmup_epochs = 1;
  std::size_t total_epochs = 100;
  std::size_t batch_size = 64;
  OptimizerConfig optimizer;
  std::uint64_t seed = 0;
  double relevance_threshold = kAnyPositiveRelevance;
  /// Record a full RetrievalReport in the history after every epoch.
  bool evaluate_each_epoch = true;

  friend bool operator==(const TrainConfig &, const TrainConfig &) = default;
};

/// Throws InvalidConfig: requires 0 <= lr_end <= lr, batch_size >= 2,
/// warmup_epochs < total_epochs, embed_dim >= 1 and a valid LossConfig.
void validate(const TrainConfig &cfg);

/// Linear projection encoders, features = x * W + b. Biases are 1 x D.
struct EncoderParams {
  Matrix video_weight;
  Matrix video_bias;
  Matrix text_weight;
  Matrix text_bias;

  std::size_t embed_dim() const noexcept { return video_weight.cols(); }

  friend bool operator==(const EncoderParams &, const EncoderParams &) = default;
};

/// Gaussian weights with std 1/sqrt(input_dim), zero biases.
EncoderParams init_encoder(std::size_t video_dim, std::size_t text_dim,
                           std::size_t embed_dim, std::uint64_t seed);

/// Throws DimensionMismatch when the inputs do not fit the parameters.
Matrix project(const Matrix &raw, const Matrix &weight, const Matrix &bias);

/// Encoder as an inference model: L2-normalized projections of each modality.
VideoTextModel as_model(const EncoderParams &params);

/// Full N x N similarity of a dataset under the encoder, optionally with flip
/// augmentation applied at inference.
SimilarityMatrix dataset_similarity(const EncoderParams &params,
                                    const SyntheticDataset &data,
                                    bool flip = false);

struct Batch {
  std::vector<std::size_t> video_indices;
  std::vector<std::size_t> text_indices;
};

/// One epoch of batches: videos shuffled, then grouped into batch_size chunks
/// (a trailing chunk smaller than 2 is dropped). Under Paired mining each
/// video is paired with a text drawn uniformly from
/// {j | c_ij >= mining_threshold}; under Threshold mining with its own text.
std::vector<Batch> sample_epoch(const SyntheticDataset &data,
                                const TrainConfig &cfg, std::mt19937_64 &rng);

struct ParamGradients {
  Matrix video_weight;
  Matrix video_bias;
  Matrix text_weight;
  Matrix text_bias;
};

struct BatchStep {
  LossResult loss;
  ParamGradients grads;
};

/// Forward and backward pass of the configured loss on one batch, using the
/// gathered B x B relevancy.
BatchStep batch_step(const EncoderParams &params, const SyntheticDataset &data,
                     const Batch &batch, const TrainConfig &cfg);

struct EpochRecord {
  std::size_t epoch = 0;
  /// Mean over batches of the raw (summed) batch loss.
  double train_loss = 0.0;
  /// Mean over batches of loss / triple_count.
  double mean_triple_loss = 0.0;
  /// Learning rate of the last step of the epoch.
  double lr = 0.0;
  std::optional<RetrievalReport> report;
};

struct TrainResult {
  EncoderParams params;
  std::vector<EpochRecord> history;
  RetrievalReport final_report;
};

using EpochCallback = std::function<void(const EpochRecord &)>;

/// Mini-batch training, single-threaded and deterministic in cfg.seed.
/// `init` warm-starts from existing parameters with a fresh schedule. Throws
/// DivergenceDetected when a batch loss or gradient becomes non-finite.
TrainResult train(const SyntheticDataset &data, const TrainConfig &cfg,
                  const std::optional<EncoderParams> &init = std::nullopt,
                  const EpochCallback &on_epoch = {});

}  // namespace smsl
