// SPDX-License-Identifier: Apache-2.0
#include <random>

#include <benchmark/benchmark.h>

#include "smsl/core.hpp"
#include "smsl/losses.hpp"
#include "smsl/metrics.hpp"
#include "smsl/synthetic.hpp"

namespace {

using namespace smsl;

FeatureMatrix random_features(std::size_t rows, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix m(rows, dim);
  for (double &x : m.data()) x = normal(rng);
  return l2_normalize(FeatureMatrix(m));
}

RelevancyMatrix batch_relevancy(std::size_t n) {
  SyntheticSpec spec;
  spec.n_items = n;
  return generate_synthetic(spec).relevancy;
}

void BM_CosineSimilarity(benchmark::State &state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto v = random_features(n, 256, 1), t = random_features(n, 256, 2);
  for (auto _ : state) benchmark::DoNotOptimize(cosine_similarity(v, t));
}
BENCHMARK(BM_CosineSimilarity)->Arg(64)->Arg(256);

void BM_Loss(benchmark::State &state) {
  const auto kind = static_cast<LossKind>(state.range(0));
  const auto mining = static_cast<Mining>(state.range(1));
  const std::size_t n = 256;
  const auto s = cosine_similarity(random_features(n, 64, 3), random_features(n, 64, 4));
  const auto c = batch_relevancy(n);
  const auto loss = make_loss_function(kind, mining);
  const LossConfig cfg;
  state.SetLabel(std::string(to_string(kind)) + "/" + std::string(to_string(mining)));
  for (auto _ : state) benchmark::DoNotOptimize(loss(s, c, cfg));
}
BENCHMARK(BM_Loss)
    ->ArgsProduct({{static_cast<long>(LossKind::MiMm), static_cast<long>(LossKind::AdaptiveMiMm),
                    static_cast<long>(LossKind::Ms), static_cast<long>(LossKind::MsLimit),
                    static_cast<long>(LossKind::Sms)},
                   {static_cast<long>(Mining::Threshold), static_cast<long>(Mining::Paired)}})
    ->Unit(benchmark::kMillisecond);

void BM_Evaluate(benchmark::State &state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto s = cosine_similarity(random_features(n, 64, 5), random_features(n, 64, 6));
  const auto c = batch_relevancy(n);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(s, c));
}
BENCHMARK(BM_Evaluate)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
