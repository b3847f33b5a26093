// SPDX-License-Identifier: Apache-2.0
#include "smsl/train.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "smsl/error.hpp"
#include "smsl/schedule.hpp"

namespace smsl {

void validate(const TrainConfig &cfg) {
  auto fail = [](const std::string &what) {
    throw Error(ErrorCode::InvalidConfig, what);
  };
  validate(cfg.loss_cfg);
  if (!(cfg.lr >= 0.0)) fail("lr must be >= 0");
  if (!(cfg.lr_end >= 0.0 && cfg.lr_end <= cfg.lr)) {
    fail("lr_end must satisfy 0 <= lr_end <= lr");
  }
  if (cfg.batch_size < 2) fail("batch_size must be >= 2");
  if (cfg.total_epochs == 0) fail("total_epochs must be >= 1");
  if (cfg.warmup_epochs >= cfg.total_epochs) {
    fail("warmup_epochs must be < total_epochs");
  }
  if (cfg.embed_dim == 0) fail("embed_dim must be >= 1");
  if (!(cfg.relevance_threshold > 0.0 && cfg.relevance_threshold <= 1.0)) {
    fail("relevance_threshold must be in (0,1]");
  }
  if (!(cfg.optimizer.beta1 >= 0.0 && cfg.optimizer.beta1 < 1.0 &&
        cfg.optimizer.beta2 >= 0.0 && cfg.optimizer.beta2 < 1.0)) {
    fail("optimizer betas must be in [0,1)");
  }
  if (!(cfg.optimizer.epsilon > 0.0)) fail("optimizer epsilon must be > 0");
  if (!(cfg.optimizer.weight_decay >= 0.0)) fail("weight_decay must be >= 0");
}

EncoderParams init_encoder(std::size_t video_dim, std::size_t text_dim,
                           std::size_t embed_dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto gaussian = [&rng](std::size_t rows, std::size_t cols) {
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(double(rows)));
    Matrix m(rows, cols);
    for (double &x : m.data()) x = normal(rng);
    return m;
  };
  EncoderParams p;
  p.video_weight = gaussian(video_dim, embed_dim);
  p.video_bias = Matrix(1, embed_dim);
  p.text_weight = gaussian(text_dim, embed_dim);
  p.text_bias = Matrix(1, embed_dim);
  return p;
}

Matrix project(const Matrix &raw, const Matrix &weight, const Matrix &bias) {
  if (raw.cols() != weight.rows() || bias.rows() != 1 ||
      bias.cols() != weight.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "input dim " + std::to_string(raw.cols()) +
                    " does not fit a " + std::to_string(weight.rows()) + "x" +
                    std::to_string(weight.cols()) + " projection");
  }
  Matrix out = matmul(raw, weight);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += bias(0, c);
  }
  return out;
}

VideoTextModel as_model(const EncoderParams &params) {
  return [params](const RawVideoBatch &video, const Matrix &text) {
    FeaturePair out;
    out.video = l2_normalize(FeatureMatrix(project(
                                 video.as_matrix(), params.video_weight,
                                 params.video_bias)))
                    .matrix();
    out.text = l2_normalize(FeatureMatrix(
                                project(text, params.text_weight, params.text_bias)))
                   .matrix();
    return out;
  };
}

SimilarityMatrix dataset_similarity(const EncoderParams &params,
                                    const SyntheticDataset &data, bool flip) {
  const VideoTextModel model = as_model(params);
  const FeaturePair features = flip
                                   ? flip_augmented_features(model, data.video, data.text)
                                   : model(data.video, data.text);
  return feature_similarity(features);
}

std::vector<Batch> sample_epoch(const SyntheticDataset &data,
                                const TrainConfig &cfg, std::mt19937_64 &rng) {
  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<std::size_t> partners(n);
  if (cfg.mining == Mining::Paired) {
    const PositiveSets sets = build_positive_sets(
        data.relevancy, cfg.loss_cfg.mining_threshold, Direction::VideoToText);
    for (std::size_t a = 0; a < n; ++a) {
      const auto &pos = sets.positives[order[a]];
      if (pos.empty()) {
        partners[a] = order[a];
        continue;
      }
      std::uniform_int_distribution<std::size_t> pick(0, pos.size() - 1);
      partners[a] = pos[pick(rng)];
    }
  } else {
    partners = order;
  }

  std::vector<Batch> batches;
  for (std::size_t start = 0; start < n; start += cfg.batch_size) {
    const std::size_t end = std::min(n, start + cfg.batch_size);
    if (end - start < 2) break;
    Batch b;
    b.video_indices.assign(order.begin() + start, order.begin() + end);
    b.text_indices.assign(partners.begin() + start, partners.begin() + end);
    batches.push_back(std::move(b));
  }
  return batches;
}

namespace {

Matrix column_sums(const Matrix &m) {
  Matrix out(1, m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) out(0, c) += row[c];
  }
  return out;
}

Matrix gather_rows(const Matrix &m, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= m.rows()) {
      throw Error(ErrorCode::IndexOutOfRange, "row " + std::to_string(rows[r]));
    }
    std::copy_n(m.row(rows[r]).begin(), m.cols(), out.row(r).begin());
  }
  return out;
}

}  // namespace

BatchStep batch_step(const EncoderParams &params, const SyntheticDataset &data,
                     const Batch &batch, const TrainConfig &cfg) {
  const Matrix video_in = data.video.select(batch.video_indices).as_matrix();
  const Matrix text_in = gather_rows(data.text, batch.text_indices);
  const FeatureMatrix video_feat(
      project(video_in, params.video_weight, params.video_bias));
  const FeatureMatrix text_feat(
      project(text_in, params.text_weight, params.text_bias));

  const SimilarityMatrix s =
      cosine_similarity(l2_normalize(video_feat), l2_normalize(text_feat));
  const RelevancyMatrix batch_relevancy = gather_batch_relevancy(
      data.relevancy, batch.video_indices, batch.text_indices);

  BatchStep out;
  out.loss = make_loss_function(cfg.loss, cfg.mining, cfg.strategy)(
      s, batch_relevancy, cfg.loss_cfg);
  const EmbeddingGradients g = backprop_to_embeddings(
      combined_similarity_gradient(out.loss), video_feat, text_feat);

  out.grads.video_weight = transposed_matmul(video_in, g.video);
  out.grads.video_bias = column_sums(g.video);
  out.grads.text_weight = transposed_matmul(text_in, g.text);
  out.grads.text_bias = column_sums(g.text);
  return out;
}

namespace {

bool finite(const ParamGradients &g) {
  return all_finite(g.video_weight) && all_finite(g.video_bias) &&
         all_finite(g.text_weight) && all_finite(g.text_bias);
}

std::size_t batches_per_epoch(std::size_t n, std::size_t batch_size) {
  return n / batch_size + (n % batch_size >= 2 ? 1 : 0);
}

}  // namespace

TrainResult train(const SyntheticDataset &data, const TrainConfig &cfg,
                  const std::optional<EncoderParams> &init,
                  const EpochCallback &on_epoch) {
  validate(cfg);
  const std::size_t video_dim = data.video.item_size();
  const std::size_t text_dim = data.text.cols();

  TrainResult result;
  result.params = init ? *init
                       : init_encoder(video_dim, text_dim, cfg.embed_dim, cfg.seed);
  const EncoderParams &p = result.params;
  if (p.video_weight.rows() != video_dim || p.text_weight.rows() != text_dim ||
      p.text_weight.cols() != p.video_weight.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "initial parameters do not fit the dataset");
  }

  const std::size_t per_epoch = batches_per_epoch(data.size(), cfg.batch_size);
  const std::size_t total_steps = cfg.total_epochs * per_epoch;
  const std::size_t warmup_steps = cfg.warmup_epochs * per_epoch;

  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  Optimizer optimizer(cfg.optimizer);
  const std::array<Matrix *, 4> params = {
      &result.params.video_weight, &result.params.video_bias,
      &result.params.text_weight, &result.params.text_bias};

  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.total_epochs; ++epoch) {
    EpochRecord record;
    record.epoch = epoch;
    const auto batches = sample_epoch(data, cfg, rng);
    for (const Batch &batch : batches) {
      const double lr =
          cosine_schedule(step, total_steps, warmup_steps, cfg.lr, cfg.lr_end);
      BatchStep bs;
      try {
        bs = batch_step(result.params, data, batch, cfg);
      } catch (const Error &e) {
        if (e.code() == ErrorCode::NonFinite || e.code() == ErrorCode::ZeroRow) {
          throw Error(ErrorCode::DivergenceDetected,
                      "epoch " + std::to_string(epoch) + ": " + e.detail());
        }
        throw;
      }
      if (!std::isfinite(bs.loss.value) || !finite(bs.grads)) {
        throw Error(ErrorCode::DivergenceDetected,
                    "non-finite loss at epoch " + std::to_string(epoch));
      }
      const std::array<const Matrix *, 4> grads = {
          &bs.grads.video_weight, &bs.grads.video_bias, &bs.grads.text_weight,
          &bs.grads.text_bias};
      optimizer.step(params, grads, lr);
      for (const Matrix *m : params) {
        if (!all_finite(*m)) {
          throw Error(ErrorCode::DivergenceDetected,
                      "parameters became non-finite at epoch " +
                          std::to_string(epoch));
        }
      }
      record.train_loss += bs.loss.value;
      record.mean_triple_loss += bs.loss.mean_per_triple();
      record.lr = lr;
      ++step;
    }
    if (!batches.empty()) {
      record.train_loss /= static_cast<double>(batches.size());
      record.mean_triple_loss /= static_cast<double>(batches.size());
    }
    if (cfg.evaluate_each_epoch) {
      record.report = evaluate(dataset_similarity(result.params, data),
                               data.relevancy, cfg.relevance_threshold);
    }
    result.history.push_back(record);
    if (on_epoch) on_epoch(result.history.back());
  }

  result.final_report = evaluate(dataset_similarity(result.params, data),
                                 data.relevancy, cfg.relevance_threshold);
  return result;
}

}  // namespace smsl
