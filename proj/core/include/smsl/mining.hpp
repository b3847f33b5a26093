// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "smsl/core.hpp"

namespace smsl {

/// Retrieval direction. For TextToVideo the relevancy (and similarity) is read
/// transposed: anchors are texts, candidates are videos.
enum class Direction { VideoToText, TextToVideo };

/// Relevancy of (anchor, candidate) oriented by direction.
inline double oriented_relevancy(const RelevancyMatrix &c, Direction d,
                                 std::size_t anchor, std::size_t candidate) {
  return d == Direction::VideoToText ? c(anchor, candidate)
                                     : c(candidate, anchor);
}

inline constexpr double kDefaultMiningThreshold = 0.1;

/// Per-anchor positive / negative candidate lists. Built either by
/// thresholding the relevancy (threshold set) or from in-batch pairing, where
/// the diagonal is the positive and threshold is empty.
struct PositiveSets {
  Direction direction = Direction::VideoToText;
  std::optional<double> threshold;
  std::vector<std::vector<std::size_t>> positives;
  std::vector<std::vector<std::size_t>> negatives;

  std::size_t anchor_count() const noexcept { return positives.size(); }
};

/// j is a positive of anchor i iff c_ij >= threshold. Requires
/// 0 < threshold <= 1.
PositiveSets build_positive_sets(const RelevancyMatrix &relevancy,
                                 double threshold, Direction direction);

/// In-batch pairing: batch item a's own partner is its only positive, every
/// other item of the batch is a negative. This is the layout a pair-sampling
/// dataloader produces, and the only one in which a "negative" can be more
/// relevant than the positive.
PositiveSets paired_positive_sets(std::size_t batch_size, Direction direction);

struct Triplet {
  std::size_t anchor;
  std::size_t positive;
  std::size_t negative;

  friend bool operator==(const Triplet &, const Triplet &) = default;
};

struct TripletSet {
  Direction direction = Direction::VideoToText;
  std::vector<Triplet> triples;

  std::size_t size() const noexcept { return triples.size(); }
  bool empty() const noexcept { return triples.empty(); }
};

enum class TripletStrategy { AllPairs, HardestNegative };

/// Ordered by anchor, then positive, then negative. HardestNegative keeps one
/// negative per (anchor, positive): the argmax of the oriented similarity,
/// lowest index on ties; it throws MissingSimilarity without a similarity.
/// Anchors with no positives contribute nothing.
TripletSet enumerate_triplets(const PositiveSets &sets, TripletStrategy strategy,
                              const SimilarityMatrix *similarity = nullptr);

/// R = c_ij - c_ik in the triple's direction.
double pair_correlation(const RelevancyMatrix &relevancy, const Triplet &triplet,
                        Direction direction);

}  // namespace smsl
