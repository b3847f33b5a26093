// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "smsl/error.hpp"
#include "smsl/infer.hpp"
#include "smsl/metrics.hpp"
#include "smsl/synthetic.hpp"
#include "smsl/train.hpp"
#include "test_support.hpp"

namespace smsl {
namespace {

using testing::throws_code;

RawVideoBatch random_video(RawVideoBatch::Shape shape, std::mt19937_64 &rng) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  std::normal_distribution<double> normal;
  std::vector<double> data(n);
  for (double &x : data) x = normal(rng);
  return RawVideoBatch(shape, std::move(data));
}

// Features are per-row sums over the width axis, which a flip cannot change.
FeaturePair width_pooled(const RawVideoBatch &v, const Matrix &t) {
  const std::size_t w = v.width();
  const std::size_t rows_per_item = v.item_size() / w;
  Matrix out(v.items(), rows_per_item);
  for (std::size_t n = 0; n < v.items(); ++n) {
    auto item = v.item(n);
    for (std::size_t r = 0; r < rows_per_item; ++r)
      for (std::size_t x = 0; x < (w + 1) / 2; ++x) {
        // Mirror pairs are added first, so a flip cannot even reorder rounding.
        const double a = item[r * w + x], b = item[r * w + (w - 1 - x)];
        out(n, r) += x == w - 1 - x ? a : a + b;
      }
  }
  return {out, t};
}

TEST(Flip, ReversesWidthOnly) {
  RawVideoBatch v({1, 1, 1, 2, 3}, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(horizontal_flip(v), RawVideoBatch({1, 1, 1, 2, 3}, {3, 2, 1, 6, 5, 4}));
}

TEST(Flip, WidthOneIsIdentity) {
  std::mt19937_64 rng(139);
  auto v = random_video({3, 2, 1, 4, 1}, rng);
  EXPECT_EQ(horizontal_flip(v), v);
}

TEST(Flip, Involution) {
  std::mt19937_64 rng(149);
  for (int rep = 0; rep < 20; ++rep) {
    auto v = random_video({2, 2, 3, 2, 5}, rng);
    EXPECT_EQ(horizontal_flip(horizontal_flip(v)), v);
  }
}

TEST(RawVideo, Validation) {
  EXPECT_TRUE(throws_code([] { RawVideoBatch({1, 1, 1, 1, 0}, {}); },
                          ErrorCode::ShapeMismatch));
  EXPECT_TRUE(throws_code([] { RawVideoBatch({1, 1, 1, 1, 2}, {1.0}); },
                          ErrorCode::ShapeMismatch));
  EXPECT_TRUE(throws_code([] { RawVideoBatch({1, 1, 1, 1, 1}, {std::nan("")}); },
                          ErrorCode::NonFinite));
}

TEST(FlipAugment, MeanOverWidth) {
  RawVideoBatch v({1, 1, 1, 1, 2}, {3.0, 5.0});
  VideoTextModel mean = [](const RawVideoBatch &b, const Matrix &t) {
    return FeaturePair{Matrix{{(b.data()[0] + b.data()[1]) / 2}}, t};
  };
  auto f = flip_augmented_features(mean, v, Matrix{{1.0}});
  EXPECT_EQ(f.video, (Matrix{{8.0}}));
  EXPECT_EQ(f.text, (Matrix{{2.0}}));
}

TEST(FlipAugment, InvariantEncoderDoubles) {
  std::mt19937_64 rng(151);
  auto v = random_video({4, 1, 1, 3, 4}, rng);
  Matrix t = testing::random_matrix(4, 3, rng);
  auto plain = width_pooled(v, t);
  auto aug = flip_augmented_features(width_pooled, v, t);
  EXPECT_EQ(aug.video, 2.0 * plain.video);
  EXPECT_EQ(aug.text, 2.0 * plain.text);

  RelevancyMatrix c = testing::level_relevancy(4, 4, rng, {0.0, 0.5, 1.0});
  EXPECT_EQ(evaluate(feature_similarity(aug), c), evaluate(feature_similarity(plain), c));
}

TEST(FlipAugment, WidthOneMatchesInvariantCase) {
  std::mt19937_64 rng(157);
  auto v = random_video({3, 1, 1, 2, 1}, rng);
  Matrix t = testing::random_matrix(3, 2, rng);
  VideoTextModel flat = [](const RawVideoBatch &b, const Matrix &text) {
    return FeaturePair{b.as_matrix(), text};
  };
  auto aug = flip_augmented_features(flat, v, t);
  EXPECT_EQ(aug.video, 2.0 * v.as_matrix());
}

TEST(FlipAugment, AsymmetricEncoderChangesFeatures) {
  SyntheticSpec spec;
  spec.n_items = 8;
  auto data = generate_synthetic(spec);
  auto params = init_encoder(data.video.item_size(), data.text.cols(), 8, 2);
  auto plain = dataset_similarity(params, data, false);
  auto flipped = dataset_similarity(params, data, true);
  EXPECT_NE(plain.matrix(), flipped.matrix());
}

TEST(Ensemble, Single) {
  SimilarityMatrix s(Matrix{{0.1, 0.2}, {0.3, 0.4}});
  std::vector<SimilarityMatrix> one{s};
  EXPECT_EQ(ensemble_similarity(one).matrix(), s.matrix());
}

TEST(Ensemble, HandSum) {
  std::vector<SimilarityMatrix> two{SimilarityMatrix(Matrix{{1.0, 2.0}, {3.0, 4.0}}),
                                    SimilarityMatrix(Matrix{{0.5, -1.0}, {0.0, 2.0}})};
  EXPECT_EQ(ensemble_similarity(two).matrix(), (Matrix{{1.5, 1.0}, {3.0, 6.0}}));
}

TEST(Ensemble, CopiesKeepReport) {
  std::mt19937_64 rng(163);
  auto c = testing::level_relevancy(6, 6, rng, {0.0, 0.5, 1.0});
  SimilarityMatrix s(testing::uniform_matrix(6, 6, rng, -1.0, 1.0));
  for (std::size_t k = 1; k <= 6; ++k) {
    std::vector<SimilarityMatrix> copies(k, s);
    EXPECT_EQ(evaluate(ensemble_similarity(copies), c), evaluate(s, c));
  }
}

TEST(Ensemble, OrderIndependent) {
  std::mt19937_64 rng(167);
  std::vector<SimilarityMatrix> ms;
  for (int i = 0; i < 5; ++i)
    ms.emplace_back(testing::uniform_matrix(4, 5, rng, -1.0, 1.0));
  const Matrix base = ensemble_similarity(ms).matrix();
  std::vector<std::size_t> order(ms.size());
  std::iota(order.begin(), order.end(), 0);
  for (int rep = 0; rep < 10; ++rep) {
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<SimilarityMatrix> shuffled;
    for (auto i : order) shuffled.push_back(ms[i]);
    const Matrix other = ensemble_similarity(shuffled).matrix();
    for (std::size_t i = 0; i < base.size(); ++i)
      EXPECT_NEAR(other.values()[i], base.values()[i], 1e-12);
  }
}

TEST(Ensemble, Errors) {
  std::vector<SimilarityMatrix> none;
  EXPECT_TRUE(throws_code([&] { ensemble_similarity(none); }, ErrorCode::EmptyEnsemble));
  std::vector<SimilarityMatrix> mixed{SimilarityMatrix(Matrix(2, 2)),
                                      SimilarityMatrix(Matrix(2, 3))};
  EXPECT_TRUE(throws_code([&] { ensemble_similarity(mixed); }, ErrorCode::ShapeMismatch));
}

}  // namespace
}  // namespace smsl
