// SPDX-License-Identifier: Apache-2.0
#include "smsl/synthetic.hpp"

#include <cstdio>
#include <random>
#include <string>

#include "smsl/error.hpp"

namespace smsl {

void validate(const SyntheticSpec &spec) {
  auto fail = [](const std::string &what) {
    throw Error(ErrorCode::InvalidConfig, what);
  };
  if (spec.n_items < 2) fail("n_items must be >= 2");
  if (spec.n_verb_classes < 2) fail("n_verb_classes must be >= 2");
  if (spec.n_noun_classes < 2) fail("n_noun_classes must be >= 2");
  if (spec.raw_dim == 0) fail("raw_dim must be >= 1");
  if (spec.video_frames == 0 || spec.video_channels == 0 ||
      spec.video_height == 0 || spec.video_width == 0) {
    fail("video dimensions must be >= 1");
  }
  if (!(spec.noise_sigma >= 0.0)) fail("noise_sigma must be >= 0");
}

DatasetBundle SyntheticDataset::bundle() const {
  DatasetBundle b{FeatureMatrix(video.as_matrix()), FeatureMatrix(text), relevancy,
                  ids, ids};
  b.validate();
  return b;
}

namespace {

Matrix gaussian(std::size_t rows, std::size_t cols, std::mt19937_64 &rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (double &x : m.data()) x = normal(rng);
  return m;
}

}  // namespace

SyntheticDataset generate_synthetic(const SyntheticSpec &spec) {
  validate(spec);
  std::mt19937_64 rng(spec.seed);
  const std::size_t video_dim = spec.video_frames * spec.video_channels *
                                spec.video_height * spec.video_width;

  const Matrix verb_video = gaussian(spec.n_verb_classes, video_dim, rng);
  const Matrix noun_video = gaussian(spec.n_noun_classes, video_dim, rng);
  const Matrix verb_text = gaussian(spec.n_verb_classes, spec.raw_dim, rng);
  const Matrix noun_text = gaussian(spec.n_noun_classes, spec.raw_dim, rng);

  SyntheticDataset data;
  std::uniform_int_distribution<int> pick_verb(
      0, static_cast<int>(spec.n_verb_classes) - 1);
  std::uniform_int_distribution<int> pick_noun(
      0, static_cast<int>(spec.n_noun_classes) - 1);
  for (std::size_t n = 0; n < spec.n_items; ++n) {
    data.verbs.push_back(pick_verb(rng));
    data.nouns.push_back(pick_noun(rng));
    char id[32];
    std::snprintf(id, sizeof id, "item-%05zu", n);
    data.ids.emplace_back(id);
  }

  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> video(spec.n_items * video_dim);
  Matrix text(spec.n_items, spec.raw_dim);
  for (std::size_t n = 0; n < spec.n_items; ++n) {
    const auto verb = static_cast<std::size_t>(data.verbs[n]);
    const auto noun = static_cast<std::size_t>(data.nouns[n]);
    for (std::size_t d = 0; d < video_dim; ++d) {
      video[n * video_dim + d] = verb_video(verb, d) + noun_video(noun, d) +
                                 spec.noise_sigma * noise(rng);
    }
    for (std::size_t d = 0; d < spec.raw_dim; ++d) {
      text(n, d) = verb_text(verb, d) + noun_text(noun, d) +
                   spec.noise_sigma * noise(rng);
    }
  }
  data.video = RawVideoBatch({spec.n_items, spec.video_frames,
                              spec.video_channels, spec.video_height,
                              spec.video_width},
                             std::move(video));
  data.text = std::move(text);

  std::vector<LabelSet> verbs;
  std::vector<LabelSet> nouns;
  for (std::size_t n = 0; n < spec.n_items; ++n) {
    verbs.push_back({data.verbs[n]});
    nouns.push_back({data.nouns[n]});
  }
  data.relevancy = relevancy_from_labels(verbs, nouns, verbs, nouns);
  return data;
}

}  // namespace smsl
