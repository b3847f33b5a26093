// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "smsl/matrix.hpp"

namespace smsl {

/// N x D embedding rows. When `normalized()` is true every row has unit
/// Euclidean norm (within 1e-6); all-zero rows are then rejected.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  explicit FeatureMatrix(Matrix data, bool normalized = false);

  const Matrix &matrix() const noexcept { return data_; }
  bool normalized() const noexcept { return normalized_; }
  std::size_t rows() const noexcept { return data_.rows(); }
  std::size_t dim() const noexcept { return data_.cols(); }

 private:
  Matrix data_;
  bool normalized_ = false;
};

/// Soft-label relevancy C with entries in [0, 1]. Out-of-range values are
/// rejected, never clamped.
class RelevancyMatrix {
 public:
  RelevancyMatrix() = default;
  explicit RelevancyMatrix(Matrix data);

  const Matrix &matrix() const noexcept { return data_; }
  std::size_t rows() const noexcept { return data_.rows(); }
  std::size_t cols() const noexcept { return data_.cols(); }
  double operator()(std::size_t i, std::size_t j) const noexcept {
    return data_(i, j);
  }

  /// Smallest strictly positive entry; empty when the matrix is all zeros.
  std::optional<double> min_positive() const noexcept { return min_positive_; }

  RelevancyMatrix transposed() const;

 private:
  Matrix data_;
  std::optional<double> min_positive_;
};

/// Similarity scores S (video rows x text columns unless stated otherwise).
/// Cosine similarity of normalized features lies in [-1, 1]; summed or
/// ensembled matrices do not, so no range is enforced here.
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  explicit SimilarityMatrix(Matrix data);

  const Matrix &matrix() const noexcept { return data_; }
  std::size_t rows() const noexcept { return data_.rows(); }
  std::size_t cols() const noexcept { return data_.cols(); }
  double operator()(std::size_t i, std::size_t j) const noexcept {
    return data_(i, j);
  }

  SimilarityMatrix transposed() const;

 private:
  Matrix data_;
};

/// The {V, T, C} triple plus stable per-row identifiers.
struct DatasetBundle {
  FeatureMatrix video_features;
  FeatureMatrix text_features;
  RelevancyMatrix relevancy;
  std::vector<std::string> video_ids;
  std::vector<std::string> text_ids;

  /// Throws ShapeMismatch when relevancy or id counts disagree with the
  /// feature row counts. Empty id lists are allowed.
  void validate() const;
};

FeatureMatrix l2_normalize(const FeatureMatrix &m);

SimilarityMatrix cosine_similarity(const FeatureMatrix &v,
                                   const FeatureMatrix &t);

using LabelSet = std::set<int>;

/// c_ij = 0.5 * Jaccard(verbs) + 0.5 * Jaccard(nouns). A synthetic stand-in
/// for a curated verb/noun relevancy, not a reproduction of one.
RelevancyMatrix relevancy_from_labels(std::span<const LabelSet> verbs_a,
                                      std::span<const LabelSet> nouns_a,
                                      std::span<const LabelSet> verbs_b,
                                      std::span<const LabelSet> nouns_b);

/// B x B slice of the full relevancy for one batch, [a][b] =
/// full[video_indices[a]][text_indices[b]]. Meant to be built by the data
/// pipeline, before the loss is evaluated.
RelevancyMatrix gather_batch_relevancy(const RelevancyMatrix &full,
                                       std::span<const std::size_t> video_indices,
                                       std::span<const std::size_t> text_indices);

}  // namespace smsl
