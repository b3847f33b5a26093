// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "smsl/core.hpp"

namespace smsl {

/// Default mAP binarization: any strictly positive relevancy counts.
inline constexpr double kAnyPositiveRelevance =
    std::numeric_limits<double>::denorm_min();

/// Multi-instance retrieval metrics in percent.
struct RetrievalReport {
  double map_v2t = 0.0;
  double map_t2v = 0.0;
  double map_avg = 0.0;
  double ndcg_v2t = 0.0;
  double ndcg_t2v = 0.0;
  double ndcg_avg = 0.0;
  /// Anchors excluded from the mean because they had no relevant candidate.
  std::size_t skipped_anchors_v2t = 0;
  std::size_t skipped_anchors_t2v = 0;

  friend bool operator==(const RetrievalReport &,
                         const RetrievalReport &) = default;
};

/// Mean over relevant items of precision at their rank. Throws
/// EmptyRelevantSet when `relevant` is empty.
double average_precision(std::span<const std::size_t> ranking,
                         std::span<const std::size_t> relevant);

/// DCG / IDCG with log2(rank + 1) discounting; `gains[c]` is the gain of
/// candidate c. Throws AllZeroGains when no gain is positive.
double ndcg(std::span<const std::size_t> ranking, std::span<const double> gains);

/// Candidates sorted by descending score, ascending index on ties.
std::vector<std::size_t> rank_descending(std::span<const double> scores);

/// Ranks every anchor in both directions (t2v uses the transposes). mAP
/// relevance is c >= relevance_threshold, nDCG gains are the raw c values.
RetrievalReport evaluate(const SimilarityMatrix &s,
                         const RelevancyMatrix &relevancy,
                         double relevance_threshold = kAnyPositiveRelevance);

/// Truncates (never rounds) to `digits` significant decimal digits.
std::string truncate_significant(double value, int digits = 3);

/// "key=value" lines, full precision.
std::string to_text(const RetrievalReport &report);
/// "key=value" lines with percentages truncated to three significant digits.
std::string to_display_text(const RetrievalReport &report);
std::string to_json(const RetrievalReport &report);
RetrievalReport report_from_json(const std::string &json);

}  // namespace smsl
