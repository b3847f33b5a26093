// SPDX-License-Identifier: Apache-2.0
#include "smsl/infer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "smsl/error.hpp"

namespace smsl {

RawVideoBatch::RawVideoBatch(Shape shape, std::vector<double> data)
    : shape_(shape), data_(std::move(data)) {
  std::size_t expected = 1;
  for (std::size_t d : shape_) expected *= d;
  if (data_.size() != expected) {
    throw Error(ErrorCode::ShapeMismatch,
                "video batch has " + std::to_string(data_.size()) +
                    " values, shape implies " + std::to_string(expected));
  }
  if (shape_[4] == 0) {
    throw Error(ErrorCode::ShapeMismatch, "video width must be >= 1");
  }
  if (!std::all_of(data_.begin(), data_.end(),
                   [](double x) { return std::isfinite(x); })) {
    throw Error(ErrorCode::NonFinite, "video batch has non-finite entries");
  }
}

std::size_t RawVideoBatch::item_size() const noexcept {
  return shape_[1] * shape_[2] * shape_[3] * shape_[4];
}

Matrix RawVideoBatch::as_matrix() const {
  return Matrix(items(), item_size(), data_);
}

RawVideoBatch RawVideoBatch::select(std::span<const std::size_t> indices) const {
  std::vector<double> out;
  out.reserve(indices.size() * item_size());
  for (std::size_t n : indices) {
    if (n >= items()) {
      throw Error(ErrorCode::IndexOutOfRange, "video item " + std::to_string(n));
    }
    const auto src = item(n);
    out.insert(out.end(), src.begin(), src.end());
  }
  Shape shape = shape_;
  shape[0] = indices.size();
  return RawVideoBatch(shape, std::move(out));
}

RawVideoBatch horizontal_flip(const RawVideoBatch &v) {
  std::vector<double> out(v.data().begin(), v.data().end());
  const std::size_t w = v.width();
  for (std::size_t start = 0; start < out.size(); start += w) {
    std::reverse(out.begin() + static_cast<std::ptrdiff_t>(start),
                 out.begin() + static_cast<std::ptrdiff_t>(start + w));
  }
  return RawVideoBatch(v.shape(), std::move(out));
}

FeaturePair flip_augmented_features(const VideoTextModel &model,
                                    const RawVideoBatch &v, const Matrix &t) {
  const RawVideoBatch flipped = horizontal_flip(v);
  FeaturePair features = model(v, t);
  const FeaturePair flipped_features = model(flipped, t);
  features.video = features.video + flipped_features.video;
  features.text = features.text + flipped_features.text;
  return features;
}

SimilarityMatrix feature_similarity(const FeaturePair &features) {
  if (features.video.cols() != features.text.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "video and text feature dims differ");
  }
  return SimilarityMatrix(matmul_transposed(features.video, features.text));
}

SimilarityMatrix ensemble_similarity(std::span<const SimilarityMatrix> matrices) {
  if (matrices.empty()) {
    throw Error(ErrorCode::EmptyEnsemble, "no similarity matrices to ensemble");
  }
  Matrix sum = matrices.front().matrix();
  for (std::size_t m = 1; m < matrices.size(); ++m) {
    if (!matrices[m].matrix().same_shape(sum)) {
      throw Error(ErrorCode::ShapeMismatch,
                  "ensemble member " + std::to_string(m) + " has a different shape");
    }
    sum = sum + matrices[m].matrix();
  }
  return SimilarityMatrix(std::move(sum));
}

}  // namespace smsl
