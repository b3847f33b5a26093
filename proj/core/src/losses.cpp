// SPDX-License-Identifier: Apache-2.0
#include "smsl/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "smsl/error.hpp"

namespace smsl {

void validate(const LossConfig &cfg) {
  auto fail = [](const std::string &what) {
    throw Error(ErrorCode::InvalidConfig, what);
  };
  if (!(cfg.margin > 0.0)) fail("margin must be > 0");
  if (!(cfg.tau >= 0.0)) fail("tau must be >= 0");
  if (!(cfg.alpha > 0.0)) fail("alpha must be > 0");
  if (!(cfg.beta > 0.0)) fail("beta must be > 0");
  if (!(cfg.mining_threshold > 0.0 && cfg.mining_threshold <= 1.0)) {
    fail("mining_threshold must be in (0,1]");
  }
}

std::optional<std::string> tau_warning(const LossConfig &cfg,
                                       const RelevancyMatrix &relevancy) {
  const auto min_pos = relevancy.min_positive();
  if (min_pos && cfg.tau >= *min_pos) {
    return "tau " + std::to_string(cfg.tau) +
           " is not below the smallest positive relevancy " +
           std::to_string(*min_pos);
  }
  return std::nullopt;
}

namespace {

/// One evaluated hinge: value contributed when arg > 0, and the gradient
/// coefficients for S(i, j) and S(i, k) in that case.
struct HingeTerm {
  double arg;
  double grad_j;
  double grad_k;
  double kink;
};

void check_pair_shapes(const SimilarityMatrix &s_v2t,
                       const SimilarityMatrix &s_t2v) {
  if (s_t2v.rows() != s_v2t.cols() || s_t2v.cols() != s_v2t.rows()) {
    throw Error(ErrorCode::ShapeMismatch,
                "t2v similarity must have the transposed shape of v2t");
  }
}

void check_relevancy_shape(const SimilarityMatrix &s_v2t,
                           const RelevancyMatrix &c) {
  if (c.rows() != s_v2t.rows() || c.cols() != s_v2t.cols()) {
    throw Error(ErrorCode::ShapeMismatch,
                "relevancy shape does not match the similarity matrix");
  }
}

void check_triplets(const SimilarityMatrix &s, const TripletSet &ts) {
  for (const auto &t : ts.triples) {
    if (t.anchor >= s.rows() || t.positive >= s.cols() ||
        t.negative >= s.cols()) {
      throw Error(ErrorCode::IndexOutOfRange,
                  "triple (" + std::to_string(t.anchor) + "," +
                      std::to_string(t.positive) + "," +
                      std::to_string(t.negative) + ") outside " +
                      std::to_string(s.rows()) + "x" + std::to_string(s.cols()));
    }
  }
}

template <class TermFn>
void accumulate_hinges(const SimilarityMatrix &s, const TripletSet &ts,
                       Matrix &grad, LossResult &result, TermFn term) {
  for (const auto &t : ts.triples) {
    const HingeTerm h = term(t, s(t.anchor, t.positive), s(t.anchor, t.negative));
    result.min_kink_distance = std::min(result.min_kink_distance, h.kink);
    if (h.arg > 0.0) {
      result.value += h.arg;
      grad(t.anchor, t.positive) += h.grad_j;
      grad(t.anchor, t.negative) += h.grad_k;
    }
  }
  result.triple_count += ts.size();
}

LossResult empty_result(const SimilarityMatrix &s_v2t) {
  LossResult r;
  r.grad_s_v2t = Matrix(s_v2t.rows(), s_v2t.cols());
  r.grad_s_t2v = Matrix(s_v2t.cols(), s_v2t.rows());
  return r;
}

HingeTerm margin_term(double margin, double s_ij, double s_ik) {
  const double arg = margin - s_ij + s_ik;
  return {arg, -1.0, 1.0, std::abs(arg)};
}

HingeTerm sms_term(double r, double s_ij, double s_ik, double gamma, double tau) {
  if (r > 0.0) {
    const double arg = r * gamma - s_ij + s_ik;
    return {arg, -1.0, 1.0, std::abs(arg)};
  }
  if (r < 0.0) {
    // Same expression with the roles of j and k exchanged.
    const double arg = -r * gamma - s_ik + s_ij;
    return {arg, 1.0, -1.0, std::abs(arg)};
  }
  const double diff = s_ij - s_ik;
  const double arg = std::abs(diff) - tau;
  const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
  return {arg, sign, -sign, std::min(std::abs(arg), std::abs(diff))};
}

}  // namespace

LossResult mi_mm_loss(const SimilarityMatrix &s_v2t,
                      const SimilarityMatrix &s_t2v,
                      const TripletSet &triplets_v2t,
                      const TripletSet &triplets_t2v, const LossConfig &cfg) {
  check_pair_shapes(s_v2t, s_t2v);
  check_triplets(s_v2t, triplets_v2t);
  check_triplets(s_t2v, triplets_t2v);
  LossResult result = empty_result(s_v2t);
  auto term = [&](const Triplet &, double s_ij, double s_ik) {
    return margin_term(cfg.margin, s_ij, s_ik);
  };
  accumulate_hinges(s_v2t, triplets_v2t, result.grad_s_v2t, result, term);
  accumulate_hinges(s_t2v, triplets_t2v, result.grad_s_t2v, result, term);
  return result;
}

LossResult adaptive_mi_mm_loss(const SimilarityMatrix &s_v2t,
                               const SimilarityMatrix &s_t2v,
                               const TripletSet &triplets_v2t,
                               const TripletSet &triplets_t2v,
                               const RelevancyMatrix &relevancy,
                               const LossConfig &cfg) {
  check_pair_shapes(s_v2t, s_t2v);
  check_relevancy_shape(s_v2t, relevancy);
  check_triplets(s_v2t, triplets_v2t);
  check_triplets(s_t2v, triplets_t2v);
  LossResult result = empty_result(s_v2t);
  for (const auto *ts : {&triplets_v2t, &triplets_t2v}) {
    const Direction d = ts == &triplets_v2t ? Direction::VideoToText
                                            : Direction::TextToVideo;
    const SimilarityMatrix &s = d == Direction::VideoToText ? s_v2t : s_t2v;
    Matrix &grad =
        d == Direction::VideoToText ? result.grad_s_v2t : result.grad_s_t2v;
    accumulate_hinges(s, *ts, grad, result,
                      [&](const Triplet &t, double s_ij, double s_ik) {
                        const double c_ij =
                            oriented_relevancy(relevancy, d, t.anchor, t.positive);
                        return margin_term(c_ij * cfg.margin, s_ij, s_ik);
                      });
  }
  return result;
}

LossResult ms_loss(const SimilarityMatrix &s, const PositiveSets &sets,
                   const LossConfig &cfg) {
  if (!(cfg.alpha > 0.0 && cfg.beta > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "alpha and beta must be > 0");
  }
  if (sets.anchor_count() != s.rows()) {
    throw Error(ErrorCode::ShapeMismatch,
                "positive sets cover " + std::to_string(sets.anchor_count()) +
                    " anchors, similarity has " + std::to_string(s.rows()));
  }
  LossResult result;
  Matrix grad(s.rows(), s.cols());
  const double n = static_cast<double>(s.rows());
  const double gamma = cfg.margin;

  // log(1 + sum_m exp(x_m)) with the max shifted out; also leaves the
  // normalized weights exp(x_m) / (1 + sum exp(x)) in `weights`.
  std::vector<double> weights;
  auto log1p_sum_exp = [&weights](const std::vector<double> &xs) {
    weights.assign(xs.size(), 0.0);
    if (xs.empty()) return 0.0;
    const double top = std::max(0.0, *std::max_element(xs.begin(), xs.end()));
    const double base = std::exp(-top);
    double sum = 0.0;
    for (std::size_t m = 0; m < xs.size(); ++m) {
      weights[m] = std::exp(xs[m] - top);
      sum += weights[m];
    }
    for (double &w : weights) w /= base + sum;
    return top == 0.0 ? std::log1p(sum) : top + std::log(base + sum);
  };

  std::vector<double> xs;
  for (std::size_t i = 0; i < s.rows(); ++i) {
    const auto &pos = sets.positives[i];
    const auto &neg = sets.negatives[i];
    for (std::size_t c : pos) {
      if (c >= s.cols()) throw Error(ErrorCode::IndexOutOfRange, "positive index");
    }
    for (std::size_t c : neg) {
      if (c >= s.cols()) throw Error(ErrorCode::IndexOutOfRange, "negative index");
    }

    xs.clear();
    for (std::size_t j : pos) xs.push_back(-cfg.alpha * (s(i, j) - gamma));
    const double pos_term = log1p_sum_exp(xs) / cfg.alpha;
    for (std::size_t m = 0; m < pos.size(); ++m) {
      grad(i, pos[m]) -= weights[m] / n;
    }

    xs.clear();
    for (std::size_t k : neg) xs.push_back(cfg.beta * (s(i, k) - gamma));
    const double neg_term = log1p_sum_exp(xs) / cfg.beta;
    for (std::size_t m = 0; m < neg.size(); ++m) {
      grad(i, neg[m]) += weights[m] / n;
    }

    result.value += (pos_term + neg_term) / n;
    result.triple_count += pos.size() + neg.size();
  }

  if (sets.direction == Direction::VideoToText) {
    result.grad_s_v2t = std::move(grad);
    result.grad_s_t2v = Matrix(s.cols(), s.rows());
  } else {
    result.grad_s_t2v = std::move(grad);
    result.grad_s_v2t = Matrix(s.cols(), s.rows());
  }
  return result;
}

LossResult ms_loss_limit(const SimilarityMatrix &s, const TripletSet &triplets,
                         const LossConfig &cfg) {
  check_triplets(s, triplets);
  LossResult result;
  Matrix grad(s.rows(), s.cols());
  const double gamma = cfg.margin;
  for (const auto &t : triplets.triples) {
    const double pos_arg = gamma - s(t.anchor, t.positive);
    const double neg_arg = s(t.anchor, t.negative) - gamma;
    result.min_kink_distance = std::min(
        {result.min_kink_distance, std::abs(pos_arg), std::abs(neg_arg)});
    if (pos_arg > 0.0) {
      result.value += pos_arg;
      grad(t.anchor, t.positive) -= 1.0;
    }
    if (neg_arg > 0.0) {
      result.value += neg_arg;
      grad(t.anchor, t.negative) += 1.0;
    }
  }
  result.triple_count = triplets.size();
  if (triplets.direction == Direction::VideoToText) {
    result.grad_s_v2t = std::move(grad);
    result.grad_s_t2v = Matrix(s.cols(), s.rows());
  } else {
    result.grad_s_t2v = std::move(grad);
    result.grad_s_v2t = Matrix(s.cols(), s.rows());
  }
  return result;
}

double sms_triple_loss(double r, double s_ij, double s_ik, double gamma,
                       double tau) {
  return std::max(0.0, sms_term(r, s_ij, s_ik, gamma, tau).arg);
}

LossResult sms_loss(const SimilarityMatrix &s_v2t, const SimilarityMatrix &s_t2v,
                    const TripletSet &triplets_v2t,
                    const TripletSet &triplets_t2v,
                    const RelevancyMatrix &relevancy, const LossConfig &cfg) {
  if (!(cfg.tau >= 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "tau must be >= 0");
  }
  check_pair_shapes(s_v2t, s_t2v);
  check_relevancy_shape(s_v2t, relevancy);
  check_triplets(s_v2t, triplets_v2t);
  check_triplets(s_t2v, triplets_t2v);
  LossResult result = empty_result(s_v2t);
  for (const auto *ts : {&triplets_v2t, &triplets_t2v}) {
    const Direction d = ts == &triplets_v2t ? Direction::VideoToText
                                            : Direction::TextToVideo;
    const SimilarityMatrix &s = d == Direction::VideoToText ? s_v2t : s_t2v;
    Matrix &grad =
        d == Direction::VideoToText ? result.grad_s_v2t : result.grad_s_t2v;
    accumulate_hinges(s, *ts, grad, result,
                      [&](const Triplet &t, double s_ij, double s_ik) {
                        const double r =
                            oriented_relevancy(relevancy, d, t.anchor, t.positive) -
                            oriented_relevancy(relevancy, d, t.anchor, t.negative);
                        return sms_term(r, s_ij, s_ik, cfg.margin, cfg.tau);
                      });
  }
  return result;
}

Matrix combined_similarity_gradient(const LossResult &result) {
  return result.grad_s_v2t + result.grad_s_t2v.transposed();
}

EmbeddingGradients backprop_to_embeddings(const Matrix &grad_s,
                                          const FeatureMatrix &v,
                                          const FeatureMatrix &t) {
  if (grad_s.rows() != v.rows() || grad_s.cols() != t.rows() ||
      v.dim() != t.dim()) {
    throw Error(ErrorCode::ShapeMismatch,
                "gradient must be N_v x N_t and feature dims must agree");
  }
  const FeatureMatrix v_hat = l2_normalize(v);
  const FeatureMatrix t_hat = l2_normalize(t);

  auto through_normalization = [](Matrix grad_hat, const Matrix &raw,
                                  const Matrix &unit) {
    for (std::size_t r = 0; r < grad_hat.rows(); ++r) {
      auto g = grad_hat.row(r);
      const auto u = unit.row(r);
      const auto x = raw.row(r);
      double norm_sq = 0.0;
      double radial = 0.0;
      for (std::size_t c = 0; c < g.size(); ++c) {
        norm_sq += x[c] * x[c];
        radial += g[c] * u[c];
      }
      const double norm = std::sqrt(norm_sq);
      for (std::size_t c = 0; c < g.size(); ++c) {
        g[c] = (g[c] - radial * u[c]) / norm;
      }
    }
    return grad_hat;
  };

  EmbeddingGradients out;
  out.video = through_normalization(matmul(grad_s, t_hat.matrix()), v.matrix(),
                                    v_hat.matrix());
  out.text = through_normalization(transposed_matmul(grad_s, v_hat.matrix()),
                                   t.matrix(), t_hat.matrix());
  return out;
}

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::MiMm: return "mi_mm";
    case LossKind::AdaptiveMiMm: return "adaptive_mi_mm";
    case LossKind::Ms: return "ms";
    case LossKind::MsLimit: return "ms_limit";
    case LossKind::Sms: return "sms";
  }
  return "unknown";
}

LossKind loss_kind_from_string(std::string_view name) {
  for (LossKind k : {LossKind::MiMm, LossKind::AdaptiveMiMm, LossKind::Ms,
                     LossKind::MsLimit, LossKind::Sms}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::InvalidConfig, "unknown loss '" + std::string(name) + "'");
}

std::string_view to_string(Mining mining) {
  return mining == Mining::Threshold ? "threshold" : "paired";
}

Mining mining_from_string(std::string_view name) {
  if (name == "threshold") return Mining::Threshold;
  if (name == "paired") return Mining::Paired;
  throw Error(ErrorCode::InvalidConfig, "unknown mining '" + std::string(name) + "'");
}

namespace {

LossResult merge_directions(LossResult v2t, LossResult t2v) {
  LossResult out;
  out.value = v2t.value + t2v.value;
  out.grad_s_v2t = std::move(v2t.grad_s_v2t);
  out.grad_s_t2v = std::move(t2v.grad_s_t2v);
  out.triple_count = v2t.triple_count + t2v.triple_count;
  out.min_kink_distance = std::min(v2t.min_kink_distance, t2v.min_kink_distance);
  return out;
}

}  // namespace

LossFunction make_loss_function(LossKind kind, Mining mining,
                                TripletStrategy strategy) {
  return [kind, mining, strategy](const SimilarityMatrix &s_v2t,
                                  const RelevancyMatrix &relevancy,
                                  const LossConfig &cfg) {
    check_relevancy_shape(s_v2t, relevancy);
    const SimilarityMatrix s_t2v = s_v2t.transposed();

    auto sets_for = [&](Direction d) {
      if (mining == Mining::Threshold) {
        return build_positive_sets(relevancy, cfg.mining_threshold, d);
      }
      if (s_v2t.rows() != s_v2t.cols()) {
        throw Error(ErrorCode::ShapeMismatch, "paired mining needs a square batch");
      }
      return paired_positive_sets(s_v2t.rows(), d);
    };
    const PositiveSets sets_v2t = sets_for(Direction::VideoToText);
    const PositiveSets sets_t2v = sets_for(Direction::TextToVideo);

    if (kind == LossKind::Ms) {
      return merge_directions(ms_loss(s_v2t, sets_v2t, cfg),
                              ms_loss(s_t2v, sets_t2v, cfg));
    }

    const TripletSet trip_v2t = enumerate_triplets(sets_v2t, strategy, &s_v2t);
    const TripletSet trip_t2v = enumerate_triplets(sets_t2v, strategy, &s_t2v);
    switch (kind) {
      case LossKind::MiMm:
        return mi_mm_loss(s_v2t, s_t2v, trip_v2t, trip_t2v, cfg);
      case LossKind::AdaptiveMiMm:
        return adaptive_mi_mm_loss(s_v2t, s_t2v, trip_v2t, trip_t2v, relevancy,
                                   cfg);
      case LossKind::MsLimit:
        return merge_directions(ms_loss_limit(s_v2t, trip_v2t, cfg),
                                ms_loss_limit(s_t2v, trip_t2v, cfg));
      case LossKind::Sms:
      case LossKind::Ms:
        break;
    }
    return sms_loss(s_v2t, s_t2v, trip_v2t, trip_t2v, relevancy, cfg);
  };
}

}  // namespace smsl
