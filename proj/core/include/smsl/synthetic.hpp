// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "smsl/core.hpp"
#include "smsl/infer.hpp"
#include "smsl/matrix.hpp"

namespace smsl {

struct SyntheticSpec {
  std::size_t n_items = 256;
  std::size_t n_verb_classes = 8;
  std::size_t n_noun_classes = 12;
  /// Text input dimensionality.
  std::size_t raw_dim = 32;
  /// Video frames x channels x height x width.
  std::size_t video_frames = 2;
  std::size_t video_channels = 1;
  std::size_t video_height = 2;
  std::size_t video_width = 8;
  double noise_sigma = 0.5;
  std::uint64_t seed = 0;

  friend bool operator==(const SyntheticSpec &, const SyntheticSpec &) = default;
};

/// Throws InvalidConfig unless n_items >= 2, class counts >= 2 and all
/// dimensions are positive.
void validate(const SyntheticSpec &spec);

/// Raw encoder inputs plus the label-derived relevancy.
struct SyntheticDataset {
  RawVideoBatch video;
  Matrix text;
  RelevancyMatrix relevancy;
  std::vector<int> verbs;
  std::vector<int> nouns;
  std::vector<std::string> ids;

  std::size_t size() const noexcept { return verbs.size(); }

  /// Raw inputs as a DatasetBundle (unnormalized features).
  DatasetBundle bundle() const;
};

/// Every item draws a (verb, noun) class pair. Video and text inputs are the
/// sum of a verb prototype and a noun prototype (separate prototypes per
/// modality) plus N(0, noise_sigma^2) noise. Prototype entries are drawn
/// independently, so video prototypes are not mirror symmetric in width.
/// Relevancy comes from relevancy_from_labels on singleton label sets, hence
/// entries in {0, 0.5, 1}. Deterministic in spec.seed.
SyntheticDataset generate_synthetic(const SyntheticSpec &spec);

}  // namespace smsl
