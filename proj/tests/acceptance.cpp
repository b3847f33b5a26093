// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "smsl/core.hpp"
#include "smsl/gradient_check.hpp"
#include "smsl/infer.hpp"
#include "smsl/io.hpp"
#include "smsl/losses.hpp"
#include "smsl/metrics.hpp"
#include "smsl/mining.hpp"
#include "smsl/synthetic.hpp"
#include "smsl/train.hpp"
#include "test_support.hpp"

namespace {

using namespace smsl;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char *format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, value);
  return buf;
}

TripletSet all_pairs(const RelevancyMatrix &c, double threshold, Direction d) {
  return enumerate_triplets(build_positive_sets(c, threshold, d),
                            TripletStrategy::AllPairs);
}

Outcome gradient_correctness() {
  const auto start = Clock::now();
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<std::size_t> size(2, 8);
  double worst = 0.0;
  std::size_t checked = 0;
  for (auto kind : {LossKind::MiMm, LossKind::AdaptiveMiMm, LossKind::Ms,
                    LossKind::MsLimit, LossKind::Sms}) {
    for (int rep = 0; rep < 20; ++rep) {
      const std::size_t n = size(rng), d = size(rng);
      const Mining mining = rep % 2 ? Mining::Paired : Mining::Threshold;
      auto c = testing::level_relevancy(n, n, rng, {0.0, 0.05, 0.2, 0.5, 1.0});
      auto bundle = testing::random_bundle(n, d, c, rng);
      auto report = finite_difference_check(make_loss_function(kind, mining), bundle,
                                            LossConfig{}, 1e-6);
      worst = std::max(worst, report.max_relative_error);
      checked += report.checked;
    }
  }
  const double elapsed = seconds_since(start);
  return {worst < 1e-5 && checked > 0 && elapsed < 5.0,
          "max rel err " + fmt("%.3g", worst) + ", " + std::to_string(checked) +
              " coords, " + fmt("%.2f", elapsed) + " s"};
}

Outcome hard_label_reduction() {
  std::mt19937_64 rng(1002);
  std::size_t mismatches = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 2 + rep % 7;
    auto c = testing::level_relevancy(n, n, rng, {0.0, 1.0});
    SimilarityMatrix s(testing::uniform_matrix(n, n, rng, -1.0, 1.0));
    const auto st = s.transposed();
    const auto a = all_pairs(c, 1.0, Direction::VideoToText);
    const auto b = all_pairs(c, 1.0, Direction::TextToVideo);
    LossConfig cfg;
    const double mm = mi_mm_loss(s, st, a, b, cfg).value;
    if (sms_loss(s, st, a, b, c, cfg).value != mm) ++mismatches;
    RelevancyMatrix ones(Matrix(n, n, 1.0));
    if (adaptive_mi_mm_loss(s, st, a, b, ones, cfg).value != mm) ++mismatches;
  }
  return {mismatches == 0, std::to_string(mismatches) + " inexact of 200 comparisons"};
}

Outcome swap_symmetry() {
  std::mt19937_64 rng(1003);
  std::uniform_real_distribution<double> u(0.0, 1.0), sim(-1.0, 1.0);
  std::size_t mismatches = 0, zero_r = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const double cij = std::round(u(rng) * 4) / 4, cik = std::round(u(rng) * 4) / 4;
    const double sij = sim(rng), sik = sim(rng);
    if (cij == cik) ++zero_r;
    // Swapping j and k in a 1x2 matrix, then evaluating the full loss.
    RelevancyMatrix c(Matrix{{cij, cik}});
    SimilarityMatrix s(Matrix{{sij, sik}});
    const TripletSet jk{Direction::VideoToText, {{0, 0, 1}}};
    const TripletSet kj{Direction::VideoToText, {{0, 1, 0}}};
    const TripletSet none{Direction::TextToVideo, {}};
    const double a = sms_loss(s, s.transposed(), jk, none, c, LossConfig{}).value;
    const double b = sms_loss(s, s.transposed(), kj, none, c, LossConfig{}).value;
    if (a != b) ++mismatches;
  }
  return {mismatches == 0, std::to_string(mismatches) + " of 100 differ (" +
                               std::to_string(zero_r) + " with R=0)"};
}

Outcome ms_limit() {
  std::mt19937_64 rng(1004);
  std::uniform_real_distribution<double> off(0.05, 0.5);
  std::uniform_int_distribution<int> coin(0, 1);
  LossConfig cfg;
  cfg.margin = 0.5;
  cfg.alpha = cfg.beta = 200.0;
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 2 + rep % 6;
    Matrix s(n, n);
    PositiveSets sets;
    std::vector<Triplet> triples;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = i, k = (i + 1) % n;
      for (std::size_t col = 0; col < n; ++col)
        s(i, col) = cfg.margin + (coin(rng) ? 1 : -1) * off(rng);
      sets.positives.push_back({j});
      sets.negatives.push_back({k});
      triples.push_back({i, j, k});
    }
    SimilarityMatrix sm(s);
    const double eq5 = ms_loss(sm, sets, cfg).value;
    const double eq6 =
        ms_loss_limit(sm, TripletSet{Direction::VideoToText, triples}, cfg).value;
    worst = std::max(worst, std::abs(static_cast<double>(n) * eq5 - eq6));
  }
  return {worst < 1e-3, "max |N*ms - limit| " + fmt("%.3g", worst)};
}

Outcome tau_dead_zone() {
  std::mt19937_64 rng(1005);
  std::size_t nonzero = 0, cases = 0;
  for (double tau : {0.05, 0.1, 0.12}) {
    LossConfig cfg;
    cfg.tau = tau;
    std::uniform_real_distribution<double> sim(-0.85, 0.85), gap(-tau, tau);
    for (int rep = 0; rep < 100; ++rep) {
      const double sij = sim(rng);
      // Every third case sits on the boundary |S_ij - S_ik| = tau.
      const double sik = rep % 3 == 0 ? sij + (rep % 2 ? tau : -tau) : sij + gap(rng);
      if (std::abs(sij - sik) > tau) continue;
      const double level = rep % 2 ? 0.5 : 1.0;
      RelevancyMatrix c(Matrix{{level, level}});
      SimilarityMatrix s(Matrix{{sij, sik}});
      const TripletSet v2t{Direction::VideoToText, {{0, 0, 1}}};
      const TripletSet none{Direction::TextToVideo, {}};
      const auto r = sms_loss(s, s.transposed(), v2t, none, c, cfg);
      ++cases;
      if (r.value != 0.0 || max_abs(r.grad_s_v2t) != 0.0 || max_abs(r.grad_s_t2v) != 0.0)
        ++nonzero;
    }
  }
  return {nonzero == 0 && cases > 0,
          std::to_string(nonzero) + " nonzero of " + std::to_string(cases) +
              " triples, tau in {0.05, 0.1, 0.12}"};
}

// Brute-force reference for one anchor given its full ranking.
struct AnchorScore {
  bool has_relevant = false;
  double ap = 0.0;
  bool has_gain = false;
  double ndcg = 0.0;
};

AnchorScore brute_anchor(const std::array<std::size_t, 3> &ranking,
                         const std::array<double, 3> &gains) {
  AnchorScore out;
  double hits = 0.0, precision_sum = 0.0, relevant = 0.0;
  for (double g : gains) relevant += g > 0.0 ? 1.0 : 0.0;
  for (std::size_t r = 0; r < 3; ++r) {
    if (gains[ranking[r]] > 0.0) {
      hits += 1.0;
      precision_sum += hits / static_cast<double>(r + 1);
    }
  }
  if (relevant > 0.0) {
    out.has_relevant = true;
    out.ap = precision_sum / relevant;
  }
  auto dcg = [&](const std::array<std::size_t, 3> &order) {
    double d = 0.0;
    for (std::size_t r = 0; r < 3; ++r)
      d += gains[order[r]] / std::log2(static_cast<double>(r) + 2.0);
    return d;
  };
  std::array<std::size_t, 3> perm{0, 1, 2};
  double ideal = 0.0;
  do {
    ideal = std::max(ideal, dcg(perm));
  } while (std::next_permutation(perm.begin(), perm.end()));
  if (ideal > 0.0) {
    out.has_gain = true;
    out.ndcg = dcg(ranking) / ideal;
  }
  return out;
}

Outcome metrics_oracle() {
  std::vector<std::array<std::size_t, 3>> perms;
  std::array<std::size_t, 3> p{0, 1, 2};
  do perms.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));

  const double levels[3] = {0.0, 0.5, 1.0};
  double worst = 0.0;
  std::size_t instances = 0;
  for (int code = 0; code < 19683; ++code) {
    Matrix c(3, 3);
    for (int e = 0, rest = code; e < 9; ++e, rest /= 3)
      c.data()[static_cast<std::size_t>(e)] = levels[rest % 3];
    const RelevancyMatrix rel(c);
    for (std::size_t shift = 0; shift < perms.size(); ++shift) {
      // Row i uses ranking perms[(shift + i) % 6]; the row offset keeps all
      // column scores distinct so text->video rankings are unambiguous too.
      Matrix s(3, 3);
      for (std::size_t i = 0; i < 3; ++i) {
        const auto &order = perms[(shift + i) % perms.size()];
        for (std::size_t pos = 0; pos < 3; ++pos)
          s(i, order[pos]) = 3.0 - static_cast<double>(pos) + 0.1 * static_cast<double>(i);
      }
      const RetrievalReport got = evaluate(SimilarityMatrix(s), rel);

      double expect[2][2] = {{0, 0}, {0, 0}};
      std::size_t counts[2][2] = {{0, 0}, {0, 0}};
      for (int dir = 0; dir < 2; ++dir) {
        for (std::size_t a = 0; a < 3; ++a) {
          std::array<double, 3> scores{}, gains{};
          for (std::size_t b = 0; b < 3; ++b) {
            scores[b] = dir == 0 ? s(a, b) : s(b, a);
            gains[b] = dir == 0 ? c(a, b) : c(b, a);
          }
          std::array<std::size_t, 3> ranking{0, 1, 2};
          std::sort(ranking.begin(), ranking.end(),
                    [&](std::size_t x, std::size_t y) { return scores[x] > scores[y]; });
          const AnchorScore sc = brute_anchor(ranking, gains);
          if (sc.has_relevant) {
            expect[dir][0] += sc.ap;
            ++counts[dir][0];
          }
          if (sc.has_gain) {
            expect[dir][1] += sc.ndcg;
            ++counts[dir][1];
          }
        }
      }
      auto pct = [&](int dir, int metric) {
        return counts[dir][metric] == 0
                   ? 0.0
                   : 100.0 * expect[dir][metric] / static_cast<double>(counts[dir][metric]);
      };
      const double want[6] = {pct(0, 0), pct(1, 0), (pct(0, 0) + pct(1, 0)) / 2,
                              pct(0, 1), pct(1, 1), (pct(0, 1) + pct(1, 1)) / 2};
      const double have[6] = {got.map_v2t,  got.map_t2v,  got.map_avg,
                              got.ndcg_v2t, got.ndcg_t2v, got.ndcg_avg};
      // Percentages carry a factor of 100; compare as fractions.
      for (int m = 0; m < 6; ++m) worst = std::max(worst, std::abs(want[m] - have[m]) / 100.0);
      ++instances;
    }
  }
  return {worst < 1e-9, std::to_string(instances) + " instances, max abs err " +
                            fmt("%.3g", worst)};
}

Outcome monotone_invariance() {
  std::mt19937_64 rng(1007);
  std::size_t differ = 0, cases = 0;
  const double transforms[][2] = {{2.0, 1.0}, {0.5, -3.0}, {1000.0, 7.0}, {3.0, 0.0}};
  for (int rep = 0; rep < 25; ++rep) {
    const std::size_t n = 4 + rep % 9;
    auto c = testing::level_relevancy(n, n, rng, {0.0, 0.5, 1.0});
    Matrix s = testing::uniform_matrix(n, n, rng, -1.0, 1.0);
    const auto base = evaluate(SimilarityMatrix(s), c);
    for (const auto &ab : transforms) {
      Matrix t = s;
      for (double &x : t.data()) x = ab[0] * x + ab[1];
      ++cases;
      if (!(evaluate(SimilarityMatrix(t), c) == base)) ++differ;
    }
    for (std::size_t k = 2; k <= 6; k += 2) {
      std::vector<SimilarityMatrix> copies(k, SimilarityMatrix(s));
      ++cases;
      if (!(evaluate(ensemble_similarity(copies), c) == base)) ++differ;
    }
  }
  return {differ == 0, std::to_string(differ) + " of " + std::to_string(cases) +
                           " transformed reports differ"};
}

Outcome synthetic_benchmark() {
  const auto start = Clock::now();
  const auto runs = cli::default_compare_runs();
  std::vector<std::vector<double>> scores(runs.size());
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    cli::ExperimentConfig cfg;
    cfg.data.seed = seed;
    cfg.train.seed = seed;
    cfg.train.total_epochs = 30;
    cfg.train.lr = 1e-3;
    cfg.train.lr_end = 1e-5;
    cfg.train.evaluate_each_epoch = false;
    const SyntheticDataset data = generate_synthetic(cfg.data);
    for (std::size_t r = 0; r < runs.size(); ++r)
      scores[r].push_back(train(data, cli::train_config_for(cfg, runs[r])).final_report.ndcg_avg);
  }
  std::vector<double> median;
  for (auto &v : scores) {
    std::sort(v.begin(), v.end());
    median.push_back(v[v.size() / 2]);
  }
  const double mm = median[0], adaptive = median[1], no_tau = median[2], sms = median[3];
  const double elapsed = seconds_since(start);
  const bool ordering = sms >= adaptive && adaptive >= mm;
  const bool relaxation = sms >= no_tau;
  std::string detail = "median ndcg_avg: MI-MM " + fmt("%.3f", mm) + ", Adaptive " +
                       fmt("%.3f", adaptive) + ", SMS w/o tau " + fmt("%.3f", no_tau) +
                       ", SMS " + fmt("%.3f", sms) + "; SMS>=Adaptive>=MI-MM " +
                       (ordering ? "holds" : "fails") + ", SMS(tau=0.1)>=SMS(tau=0) " +
                       (relaxation ? "holds" : "fails") + "; " + fmt("%.1f", elapsed) +
                       " s";
  return {ordering && relaxation && elapsed < 300.0, detail};
}

FeaturePair width_pooled(const RawVideoBatch &v, const Matrix &t) {
  const std::size_t w = v.width(), per_item = v.item_size() / w;
  Matrix out(v.items(), per_item);
  for (std::size_t n = 0; n < v.items(); ++n) {
    const auto item = v.item(n);
    for (std::size_t r = 0; r < per_item; ++r)
      for (std::size_t x = 0; x < (w + 1) / 2; ++x) {
        // Mirror pairs are added first, so a flip cannot even reorder rounding.
        const double a = item[r * w + x], b = item[r * w + (w - 1 - x)];
        out(n, r) += x == w - 1 - x ? a : a + b;
      }
  }
  return {out, t};
}

Outcome flip_fidelity() {
  std::mt19937_64 rng(1009);
  std::size_t failures = 0;
  SyntheticSpec spec;
  spec.n_items = 64;
  for (int rep = 0; rep < 10; ++rep) {
    spec.seed = static_cast<std::uint64_t>(rep);
    const auto data = generate_synthetic(spec);
    if (!(horizontal_flip(horizontal_flip(data.video)) == data.video)) ++failures;
    if (horizontal_flip(data.video) == data.video) ++failures;

    const std::size_t pooled_dim = data.video.item_size() / data.video.width();
    const Matrix text = testing::random_matrix(data.size(), pooled_dim, rng);
    const auto plain = width_pooled(data.video, text);
    const auto aug = flip_augmented_features(width_pooled, data.video, text);
    if (!(evaluate(feature_similarity(aug), data.relevancy) ==
          evaluate(feature_similarity(plain), data.relevancy)))
      ++failures;
  }
  RawVideoBatch pair({1, 1, 1, 1, 2}, {0.25, 1.5});
  VideoTextModel mean = [](const RawVideoBatch &b, const Matrix &t) {
    return FeaturePair{Matrix{{(b.data()[0] + b.data()[1]) / 2}}, t};
  };
  if (flip_augmented_features(mean, pair, Matrix{{1.0}}).video != Matrix{{1.75}}) ++failures;
  return {failures == 0, std::to_string(failures) + " failures over 10 datasets and the mean-encoder example"};
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path root = testing::scratch_dir("acceptance-determinism");
  cli::ExperimentConfig cfg;
  cfg.data.n_items = 64;
  cfg.data.seed = 21;
  cfg.train.seed = 22;
  cfg.train.embed_dim = 32;
  cfg.train.total_epochs = 5;
  cfg.train.batch_size = 16;
  cfg.train.lr = 1e-3;
  cfg.train.lr_end = 1e-5;
  cfg.dataset_dir = (root / "data").string();
  std::ostringstream sink;
  cli::cmd_gen_data(cfg, sink);
  cfg.out = (root / "a").string();
  cli::cmd_train(cfg, sink);
  cfg.out = (root / "b").string();
  cli::cmd_train(cfg, sink);
  bool same = true;
  for (const char *f : {"checkpoint.bin", "checkpoint.json"})
    same = same && read_text_file(root / "a" / f) == read_text_file(root / "b" / f);
  fs::remove_all(root);
  return {same, same ? "checkpoint.bin and sidecar byte-identical" : "checkpoints differ"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient correctness", gradient_correctness},
      {"hard-label reduction identity", hard_label_reduction},
      {"SMS j<->k symmetry", swap_symmetry},
      {"MS limit", ms_limit},
      {"tau dead zone", tau_dead_zone},
      {"metrics oracle", metrics_oracle},
      {"monotone invariance", monotone_invariance},
      {"directional synthetic benchmark", synthetic_benchmark},
      {"flip involution and augmentation fidelity", flip_fidelity},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s [%zu] %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
