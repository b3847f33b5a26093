// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "smsl/core.hpp"
#include "smsl/matrix.hpp"

namespace smsl {

/// N x T x C x H x W video tensor, contiguous with W fastest.
class RawVideoBatch {
 public:
  using Shape = std::array<std::size_t, 5>;

  RawVideoBatch() = default;
  RawVideoBatch(Shape shape, std::vector<double> data);

  const Shape &shape() const noexcept { return shape_; }
  std::size_t items() const noexcept { return shape_[0]; }
  std::size_t width() const noexcept { return shape_[4]; }
  /// T * C * H * W.
  std::size_t item_size() const noexcept;

  std::span<const double> data() const noexcept { return data_; }
  std::span<const double> item(std::size_t n) const noexcept {
    return {data_.data() + n * item_size(), item_size()};
  }

  /// One flattened item per row.
  Matrix as_matrix() const;
  RawVideoBatch select(std::span<const std::size_t> indices) const;

  friend bool operator==(const RawVideoBatch &, const RawVideoBatch &) = default;

 private:
  Shape shape_{};
  std::vector<double> data_;
};

/// Reverses the last (width) axis.
RawVideoBatch horizontal_flip(const RawVideoBatch &v);

struct FeaturePair {
  Matrix video;
  Matrix text;
};

/// Maps a (video, text) batch to a feature pair.
using VideoTextModel =
    std::function<FeaturePair(const RawVideoBatch &video, const Matrix &text)>;

/// Features of (v, t) plus features of (flip(v), t), summed elementwise for
/// both modalities. Nothing is renormalized; the text branch is summed as
/// well, so a text encoder that ignores video just doubles its output.
FeaturePair flip_augmented_features(const VideoTextModel &model,
                                    const RawVideoBatch &v, const Matrix &t);

/// Plain V * T^T of (possibly unnormalized) features.
SimilarityMatrix feature_similarity(const FeaturePair &features);

/// Elementwise sum. Throws EmptyEnsemble or ShapeMismatch.
SimilarityMatrix ensemble_similarity(std::span<const SimilarityMatrix> matrices);

}  // namespace smsl
