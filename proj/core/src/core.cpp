// SPDX-License-Identifier: Apache-2.0
#include "smsl/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "smsl/error.hpp"

namespace smsl {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroRow: return "ZeroRow";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::RangeError: return "RangeError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::EmptyLabelSet: return "EmptyLabelSet";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InvalidThreshold: return "InvalidThreshold";
    case ErrorCode::MissingSimilarity: return "MissingSimilarity";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidSchedule: return "InvalidSchedule";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::EmptyRelevantSet: return "EmptyRelevantSet";
    case ErrorCode::AllZeroGains: return "AllZeroGains";
    case ErrorCode::EmptyEnsemble: return "EmptyEnsemble";
    case ErrorCode::DivergenceDetected: return "DivergenceDetected";
  }
  return "Unknown";
}

namespace {

constexpr double kUnitNormTolerance = 1e-6;
constexpr double kZeroNorm = 1e-12;

double row_norm(std::span<const double> row) {
  double sq = 0.0;
  for (double x : row) sq += x * x;
  return std::sqrt(sq);
}

}  // namespace

FeatureMatrix::FeatureMatrix(Matrix data, bool normalized)
    : data_(std::move(data)), normalized_(normalized) {
  if (!all_finite(data_)) {
    throw Error(ErrorCode::NonFinite, "feature matrix has non-finite entries");
  }
  if (normalized_) {
    for (std::size_t r = 0; r < data_.rows(); ++r) {
      const double n = row_norm(data_.row(r));
      if (n < kZeroNorm) {
        throw Error(ErrorCode::ZeroRow, "row " + std::to_string(r));
      }
      if (std::abs(n - 1.0) > kUnitNormTolerance) {
        throw Error(ErrorCode::RangeError,
                    "row " + std::to_string(r) + " has norm " +
                        std::to_string(n) + " but is flagged normalized");
      }
    }
  }
}

RelevancyMatrix::RelevancyMatrix(Matrix data) : data_(std::move(data)) {
  for (std::size_t i = 0; i < data_.rows(); ++i) {
    for (std::size_t j = 0; j < data_.cols(); ++j) {
      const double c = data_(i, j);
      // NaN fails both comparisons and lands here too.
      if (!(c >= 0.0 && c <= 1.0)) {
        throw Error(ErrorCode::RangeError,
                    "entry (" + std::to_string(i) + "," + std::to_string(j) +
                        ") = " + std::to_string(c) + " outside [0,1]");
      }
      if (c > 0.0 && (!min_positive_ || c < *min_positive_)) {
        min_positive_ = c;
      }
    }
  }
}

RelevancyMatrix RelevancyMatrix::transposed() const {
  return RelevancyMatrix(data_.transposed());
}

SimilarityMatrix::SimilarityMatrix(Matrix data) : data_(std::move(data)) {}

SimilarityMatrix SimilarityMatrix::transposed() const {
  return SimilarityMatrix(data_.transposed());
}

void DatasetBundle::validate() const {
  if (relevancy.rows() != video_features.rows() ||
      relevancy.cols() != text_features.rows()) {
    throw Error(ErrorCode::ShapeMismatch,
                "relevancy is " + std::to_string(relevancy.rows()) + "x" +
                    std::to_string(relevancy.cols()) + " but features have " +
                    std::to_string(video_features.rows()) + " and " +
                    std::to_string(text_features.rows()) + " rows");
  }
  if (!video_ids.empty() && video_ids.size() != video_features.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "video id count mismatch");
  }
  if (!text_ids.empty() && text_ids.size() != text_features.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "text id count mismatch");
  }
}

FeatureMatrix l2_normalize(const FeatureMatrix &m) {
  Matrix out = m.matrix();
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    const double n = row_norm(row);
    if (n < kZeroNorm) {
      throw Error(ErrorCode::ZeroRow, "row " + std::to_string(r));
    }
    for (double &x : row) x /= n;
  }
  return FeatureMatrix(std::move(out), true);
}

SimilarityMatrix cosine_similarity(const FeatureMatrix &v,
                                   const FeatureMatrix &t) {
  if (v.dim() != t.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "feature dims " + std::to_string(v.dim()) + " and " +
                    std::to_string(t.dim()));
  }
  if (!v.normalized() || !t.normalized()) {
    throw Error(ErrorCode::InvalidConfig,
                "cosine_similarity requires normalized features");
  }
  return SimilarityMatrix(matmul_transposed(v.matrix(), t.matrix()));
}

namespace {

double jaccard(const LabelSet &a, const LabelSet &b) {
  std::size_t common = 0;
  for (int x : a) common += b.count(x);
  const std::size_t uni = a.size() + b.size() - common;
  return static_cast<double>(common) / static_cast<double>(uni);
}

void require_non_empty(std::span<const LabelSet> sets, std::size_t offset) {
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (sets[i].empty()) {
      throw Error(ErrorCode::EmptyLabelSet, "item " + std::to_string(i + offset));
    }
  }
}

}  // namespace

RelevancyMatrix relevancy_from_labels(std::span<const LabelSet> verbs_a,
                                      std::span<const LabelSet> nouns_a,
                                      std::span<const LabelSet> verbs_b,
                                      std::span<const LabelSet> nouns_b) {
  if (verbs_a.size() != nouns_a.size() || verbs_b.size() != nouns_b.size()) {
    throw Error(ErrorCode::ShapeMismatch, "verb and noun label counts differ");
  }
  require_non_empty(verbs_a, 0);
  require_non_empty(nouns_a, 0);
  require_non_empty(verbs_b, 0);
  require_non_empty(nouns_b, 0);

  Matrix c(verbs_a.size(), verbs_b.size());
  for (std::size_t i = 0; i < verbs_a.size(); ++i) {
    for (std::size_t j = 0; j < verbs_b.size(); ++j) {
      c(i, j) = 0.5 * jaccard(verbs_a[i], verbs_b[j]) +
                0.5 * jaccard(nouns_a[i], nouns_b[j]);
    }
  }
  return RelevancyMatrix(std::move(c));
}

RelevancyMatrix gather_batch_relevancy(const RelevancyMatrix &full,
                                       std::span<const std::size_t> video_indices,
                                       std::span<const std::size_t> text_indices) {
  for (std::size_t v : video_indices) {
    if (v >= full.rows()) {
      throw Error(ErrorCode::IndexOutOfRange, "video index " + std::to_string(v));
    }
  }
  for (std::size_t t : text_indices) {
    if (t >= full.cols()) {
      throw Error(ErrorCode::IndexOutOfRange, "text index " + std::to_string(t));
    }
  }
  Matrix out(video_indices.size(), text_indices.size());
  for (std::size_t a = 0; a < video_indices.size(); ++a) {
    for (std::size_t b = 0; b < text_indices.size(); ++b) {
      out(a, b) = full(video_indices[a], text_indices[b]);
    }
  }
  return RelevancyMatrix(std::move(out));
}

}  // namespace smsl
