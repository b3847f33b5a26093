// SPDX-License-Identifier: Apache-2.0
#include "smsl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>

#include "json.hpp"
#include "smsl/error.hpp"

namespace smsl {

double average_precision(std::span<const std::size_t> ranking,
                         std::span<const std::size_t> relevant) {
  if (relevant.empty()) {
    throw Error(ErrorCode::EmptyRelevantSet, "no relevant items");
  }
  std::vector<char> is_relevant(ranking.size(), 0);
  for (std::size_t r : relevant) {
    if (r >= ranking.size()) {
      throw Error(ErrorCode::IndexOutOfRange,
                  "relevant item " + std::to_string(r));
    }
    is_relevant[r] = 1;
  }
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t rank = 0; rank < ranking.size(); ++rank) {
    if (is_relevant[ranking[rank]]) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
    }
  }
  std::size_t distinct = 0;
  for (char f : is_relevant) distinct += f;
  return sum / static_cast<double>(distinct);
}

double ndcg(std::span<const std::size_t> ranking, std::span<const double> gains) {
  if (gains.size() != ranking.size()) {
    throw Error(ErrorCode::ShapeMismatch, "one gain per ranked item required");
  }
  for (double g : gains) {
    if (!(g >= 0.0)) throw Error(ErrorCode::RangeError, "negative gain");
  }
  std::vector<double> ideal(gains.begin(), gains.end());
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  if (ideal.empty() || ideal.front() <= 0.0) {
    throw Error(ErrorCode::AllZeroGains, "no positive gain");
  }
  double dcg = 0.0;
  double idcg = 0.0;
  for (std::size_t r = 0; r < ranking.size(); ++r) {
    const double discount = std::log2(static_cast<double>(r) + 2.0);
    dcg += gains[ranking[r]] / discount;
    idcg += ideal[r] / discount;
  }
  return dcg / idcg;
}

std::vector<std::size_t> rank_descending(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

namespace {

struct DirectionScore {
  double map = 0.0;
  double ndcg = 0.0;
  std::size_t skipped = 0;
};

DirectionScore score_direction(const Matrix &s, const Matrix &c,
                               double threshold) {
  DirectionScore out;
  double map_sum = 0.0;
  double ndcg_sum = 0.0;
  std::size_t map_count = 0;
  std::size_t ndcg_count = 0;
  std::vector<std::size_t> relevant;
  for (std::size_t i = 0; i < s.rows(); ++i) {
    const auto ranking = rank_descending(s.row(i));
    const auto gains = c.row(i);
    relevant.clear();
    bool any_gain = false;
    for (std::size_t j = 0; j < gains.size(); ++j) {
      if (gains[j] >= threshold) relevant.push_back(j);
      any_gain = any_gain || gains[j] > 0.0;
    }
    if (relevant.empty()) {
      ++out.skipped;
    } else {
      map_sum += average_precision(ranking, relevant);
      ++map_count;
    }
    if (any_gain) {
      ndcg_sum += ndcg(ranking, gains);
      ++ndcg_count;
    }
  }
  if (map_count > 0) out.map = 100.0 * map_sum / static_cast<double>(map_count);
  if (ndcg_count > 0) {
    out.ndcg = 100.0 * ndcg_sum / static_cast<double>(ndcg_count);
  }
  return out;
}

}  // namespace

RetrievalReport evaluate(const SimilarityMatrix &s,
                         const RelevancyMatrix &relevancy,
                         double relevance_threshold) {
  if (s.rows() != relevancy.rows() || s.cols() != relevancy.cols()) {
    throw Error(ErrorCode::ShapeMismatch,
                "similarity and relevancy shapes differ");
  }
  if (!(relevance_threshold > 0.0 && relevance_threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidThreshold, "relevance threshold not in (0,1]");
  }
  const DirectionScore v2t =
      score_direction(s.matrix(), relevancy.matrix(), relevance_threshold);
  const DirectionScore t2v = score_direction(
      s.matrix().transposed(), relevancy.matrix().transposed(), relevance_threshold);

  RetrievalReport r;
  r.map_v2t = v2t.map;
  r.map_t2v = t2v.map;
  r.map_avg = (v2t.map + t2v.map) / 2.0;
  r.ndcg_v2t = v2t.ndcg;
  r.ndcg_t2v = t2v.ndcg;
  r.ndcg_avg = (v2t.ndcg + t2v.ndcg) / 2.0;
  r.skipped_anchors_v2t = v2t.skipped;
  r.skipped_anchors_t2v = t2v.skipped;
  return r;
}

std::string truncate_significant(double value, int digits) {
  if (value == 0.0 || !std::isfinite(value)) {
    return value == 0.0 ? "0" : std::to_string(value);
  }
  // d.dddddddddddddde+XX, then cut the mantissa instead of rounding it.
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.14e", std::abs(value));
  const std::string text(buf);
  const auto e_pos = text.find('e');
  std::string mantissa = text.substr(0, 1) + text.substr(2, e_pos - 2);
  const int exponent = std::stoi(text.substr(e_pos + 1));
  mantissa.resize(static_cast<std::size_t>(digits));

  std::string out = value < 0.0 ? "-" : "";
  const int int_digits = exponent + 1;
  if (int_digits <= 0) {
    out += "0." + std::string(static_cast<std::size_t>(-int_digits), '0') + mantissa;
  } else if (int_digits >= digits) {
    out += mantissa + std::string(static_cast<std::size_t>(int_digits - digits), '0');
  } else {
    out += mantissa.substr(0, static_cast<std::size_t>(int_digits)) + "." +
           mantissa.substr(static_cast<std::size_t>(int_digits));
  }
  return out;
}

namespace {

template <class Fmt>
std::string key_values(const RetrievalReport &r, Fmt fmt) {
  std::ostringstream out;
  out << "map_v2t=" << fmt(r.map_v2t) << '\n'
      << "map_t2v=" << fmt(r.map_t2v) << '\n'
      << "map_avg=" << fmt(r.map_avg) << '\n'
      << "ndcg_v2t=" << fmt(r.ndcg_v2t) << '\n'
      << "ndcg_t2v=" << fmt(r.ndcg_t2v) << '\n'
      << "ndcg_avg=" << fmt(r.ndcg_avg) << '\n'
      << "skipped_anchors_v2t=" << r.skipped_anchors_v2t << '\n'
      << "skipped_anchors_t2v=" << r.skipped_anchors_t2v << '\n';
  return out.str();
}

}  // namespace

std::string to_text(const RetrievalReport &report) {
  return key_values(report, [](double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  });
}

std::string to_display_text(const RetrievalReport &report) {
  return key_values(report, [](double x) { return truncate_significant(x, 3); });
}

std::string to_json(const RetrievalReport &r) {
  nlohmann::ordered_json j;
  j["map_v2t"] = r.map_v2t;
  j["map_t2v"] = r.map_t2v;
  j["map_avg"] = r.map_avg;
  j["ndcg_v2t"] = r.ndcg_v2t;
  j["ndcg_t2v"] = r.ndcg_t2v;
  j["ndcg_avg"] = r.ndcg_avg;
  j["skipped_anchors_v2t"] = r.skipped_anchors_v2t;
  j["skipped_anchors_t2v"] = r.skipped_anchors_t2v;
  return j.dump(2);
}

RetrievalReport report_from_json(const std::string &json) {
  try {
    const auto j = nlohmann::json::parse(json);
    RetrievalReport r;
    r.map_v2t = j.at("map_v2t").get<double>();
    r.map_t2v = j.at("map_t2v").get<double>();
    r.map_avg = j.at("map_avg").get<double>();
    r.ndcg_v2t = j.at("ndcg_v2t").get<double>();
    r.ndcg_t2v = j.at("ndcg_t2v").get<double>();
    r.ndcg_avg = j.at("ndcg_avg").get<double>();
    r.skipped_anchors_v2t = j.at("skipped_anchors_v2t").get<std::size_t>();
    r.skipped_anchors_t2v = j.at("skipped_anchors_t2v").get<std::size_t>();
    return r;
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

}  // namespace smsl
