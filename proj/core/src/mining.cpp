// SPDX-License-Identifier: Apache-2.0
#include "smsl/mining.hpp"

#include <string>

#include "smsl/error.hpp"

namespace smsl {

PositiveSets build_positive_sets(const RelevancyMatrix &relevancy,
                                 double threshold, Direction direction) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidThreshold,
                "threshold " + std::to_string(threshold) + " not in (0,1]");
  }
  const bool v2t = direction == Direction::VideoToText;
  const std::size_t anchors = v2t ? relevancy.rows() : relevancy.cols();
  const std::size_t candidates = v2t ? relevancy.cols() : relevancy.rows();

  PositiveSets sets;
  sets.direction = direction;
  sets.threshold = threshold;
  sets.positives.resize(anchors);
  sets.negatives.resize(anchors);
  for (std::size_t i = 0; i < anchors; ++i) {
    for (std::size_t j = 0; j < candidates; ++j) {
      if (oriented_relevancy(relevancy, direction, i, j) >= threshold) {
        sets.positives[i].push_back(j);
      } else {
        sets.negatives[i].push_back(j);
      }
    }
  }
  return sets;
}

PositiveSets paired_positive_sets(std::size_t batch_size, Direction direction) {
  PositiveSets sets;
  sets.direction = direction;
  sets.positives.resize(batch_size);
  sets.negatives.resize(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) {
    sets.positives[i].push_back(i);
    for (std::size_t k = 0; k < batch_size; ++k) {
      if (k != i) sets.negatives[i].push_back(k);
    }
  }
  return sets;
}

TripletSet enumerate_triplets(const PositiveSets &sets, TripletStrategy strategy,
                              const SimilarityMatrix *similarity) {
  TripletSet out;
  out.direction = sets.direction;
  if (strategy == TripletStrategy::AllPairs) {
    std::size_t total = 0;
    for (std::size_t i = 0; i < sets.anchor_count(); ++i) {
      total += sets.positives[i].size() * sets.negatives[i].size();
    }
    out.triples.reserve(total);
    for (std::size_t i = 0; i < sets.anchor_count(); ++i) {
      for (std::size_t j : sets.positives[i]) {
        for (std::size_t k : sets.negatives[i]) {
          out.triples.push_back({i, j, k});
        }
      }
    }
    return out;
  }

  if (similarity == nullptr) {
    throw Error(ErrorCode::MissingSimilarity,
                "hardest-negative mining needs a similarity matrix");
  }
  const SimilarityMatrix &s = *similarity;
  if (s.rows() != sets.anchor_count()) {
    throw Error(ErrorCode::ShapeMismatch,
                "similarity rows do not match the anchor count");
  }
  for (std::size_t i = 0; i < sets.anchor_count(); ++i) {
    const auto &negatives = sets.negatives[i];
    if (negatives.empty()) continue;
    std::size_t hardest = negatives.front();
    for (std::size_t k : negatives) {
      if (k >= s.cols()) {
        throw Error(ErrorCode::IndexOutOfRange, "negative " + std::to_string(k));
      }
      if (s(i, k) > s(i, hardest) || (s(i, k) == s(i, hardest) && k < hardest))
        hardest = k;
    }
    for (std::size_t j : sets.positives[i]) {
      out.triples.push_back({i, j, hardest});
    }
  }
  return out;
}

double pair_correlation(const RelevancyMatrix &relevancy, const Triplet &triplet,
                        Direction direction) {
  const bool v2t = direction == Direction::VideoToText;
  const std::size_t anchors = v2t ? relevancy.rows() : relevancy.cols();
  const std::size_t candidates = v2t ? relevancy.cols() : relevancy.rows();
  if (triplet.anchor >= anchors || triplet.positive >= candidates ||
      triplet.negative >= candidates) {
    throw Error(ErrorCode::IndexOutOfRange,
                "triple (" + std::to_string(triplet.anchor) + "," +
                    std::to_string(triplet.positive) + "," +
                    std::to_string(triplet.negative) + ")");
  }
  return oriented_relevancy(relevancy, direction, triplet.anchor,
                            triplet.positive) -
         oriented_relevancy(relevancy, direction, triplet.anchor,
                            triplet.negative);
}

}  // namespace smsl
