// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include "smsl/core.hpp"
#include "smsl/matrix.hpp"
#include "smsl/mining.hpp"

namespace smsl {

// Loss functions over a similarity matrix S = V * T^T of L2-normalized
// embeddings. All five share the triple (anchor i, positive j, negative k)
// vocabulary of the mining module and are written against the generic
// ranking objective
//
//   S(v_i, t_j) - S(v_i, t_k) >= margin
//
// where the margin is constant (MI-MM), scaled by c_ij (adaptive MI-MM), or
// signed by R = c_ij - c_ik (SMS). Hinge-type losses are raw sums over
// triples; the gradient carriers are dL/dS for each retrieval direction.
//
// Subgradient convention: [x]_+ has slope 0 at x = 0 and |x| has slope 0 at
// x = 0, so a hinge exactly at its boundary is inactive.

struct LossConfig {
  double margin = 0.6;
  double tau = 0.1;
  double alpha = 2.0;
  double beta = 50.0;
  double mining_threshold = kDefaultMiningThreshold;

  friend bool operator==(const LossConfig &, const LossConfig &) = default;
};

/// Throws InvalidConfig unless margin > 0, tau >= 0, alpha > 0, beta > 0 and
/// 0 < mining_threshold <= 1.
void validate(const LossConfig &cfg);

/// A tau at or above the smallest positive relevancy lets some R = 0 and
/// R > 0 triples share a dead zone. That is allowed (larger tau is sometimes
/// wanted in practice) but worth a warning.
std::optional<std::string> tau_warning(const LossConfig &cfg,
                                       const RelevancyMatrix &relevancy);

struct LossResult {
  double value = 0.0;
  /// dL/dS for the video->text matrix (N_v x N_t).
  Matrix grad_s_v2t;
  /// dL/dS for the text->video matrix (N_t x N_v).
  Matrix grad_s_t2v;
  /// Triples summed over (pairs for ms_loss).
  std::size_t triple_count = 0;
  /// Smallest |argument| over every hinge / absolute-value kink evaluated.
  /// Infinity for smooth losses. Used to keep finite differences off kinks.
  double min_kink_distance = std::numeric_limits<double>::infinity();

  double mean_per_triple() const noexcept {
    return triple_count == 0 ? 0.0 : value / static_cast<double>(triple_count);
  }
};

/// sum over v2t triples of [gamma - S_ij + S_ik]_+ plus the same over t2v.
LossResult mi_mm_loss(const SimilarityMatrix &s_v2t,
                      const SimilarityMatrix &s_t2v,
                      const TripletSet &triplets_v2t,
                      const TripletSet &triplets_t2v, const LossConfig &cfg);

/// As mi_mm_loss with per-triple margin c_ij * gamma. The relevancy is given
/// video x text and read transposed for the t2v triples.
LossResult adaptive_mi_mm_loss(const SimilarityMatrix &s_v2t,
                               const SimilarityMatrix &s_t2v,
                               const TripletSet &triplets_v2t,
                               const TripletSet &triplets_t2v,
                               const RelevancyMatrix &relevancy,
                               const LossConfig &cfg);

/// Multi-Similarity loss for one direction, averaged over the anchors (rows)
/// of `s`, which must be oriented as `sets.direction`. Uses alpha, beta and
/// margin from cfg. Log-sum-exp is max-shifted so no overflow occurs for
/// large scales. The gradient lands in the slot of sets.direction.
LossResult ms_loss(const SimilarityMatrix &s, const PositiveSets &sets,
                   const LossConfig &cfg);

/// Limit form of ms_loss: sum over triples of [gamma - S_ij]_+ + [S_ik - gamma]_+.
LossResult ms_loss_limit(const SimilarityMatrix &s, const TripletSet &triplets,
                         const LossConfig &cfg);

/// Per-triple SMS term. With R = c_ij - c_ik:
///   R > 0: [R*gamma - S_ij + S_ik]_+
///   R < 0: [-R*gamma + S_ij - S_ik]_+
///   R = 0: [|S_ij - S_ik| - tau]_+
/// R is compared to zero exactly. Both signed branches are evaluated in the
/// same canonical order (more relevant first) so swapping j and k gives a
/// bit-identical value.
double sms_triple_loss(double r, double s_ij, double s_ik, double gamma,
                       double tau);

/// Symmetric Multi-Similarity loss over both directions.
LossResult sms_loss(const SimilarityMatrix &s_v2t, const SimilarityMatrix &s_t2v,
                    const TripletSet &triplets_v2t,
                    const TripletSet &triplets_t2v,
                    const RelevancyMatrix &relevancy, const LossConfig &cfg);

/// grad_s_v2t + grad_s_t2v^T, i.e. dL/dS for S = V * T^T.
Matrix combined_similarity_gradient(const LossResult &result);

struct EmbeddingGradients {
  Matrix video;
  Matrix text;
};

/// Chain rule through S = normalize(V) * normalize(T)^T. `v` and `t` are the
/// pre-normalization embeddings; each row gradient is projected onto the
/// tangent space of the unit sphere and divided by the row norm.
EmbeddingGradients backprop_to_embeddings(const Matrix &grad_s,
                                          const FeatureMatrix &v,
                                          const FeatureMatrix &t);

enum class LossKind { MiMm, AdaptiveMiMm, Ms, MsLimit, Sms };

std::string_view to_string(LossKind kind);
LossKind loss_kind_from_string(std::string_view name);

/// How triples are formed from a (batch) relevancy matrix.
///  Threshold: positives are {j | c_ij >= mining_threshold}.
///  Paired:    row a of the batch is paired with column a; the diagonal is
///             the positive, everything else a negative.
enum class Mining { Threshold, Paired };

std::string_view to_string(Mining mining);
Mining mining_from_string(std::string_view name);

/// A loss evaluated on S (video x text) and the matching relevancy. Mining
/// happens inside, in both directions.
using LossFunction = std::function<LossResult(
    const SimilarityMatrix &s_v2t, const RelevancyMatrix &relevancy,
    const LossConfig &cfg)>;

LossFunction make_loss_function(LossKind kind, Mining mining = Mining::Threshold,
                                TripletStrategy strategy = TripletStrategy::AllPairs);

}  // namespace smsl
