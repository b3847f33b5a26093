// SPDX-License-Identifier: Apache-2.0
#include "smsl/gradient_check.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "smsl/error.hpp"

namespace smsl {

namespace {

constexpr double kRelativeFloor = 1e-3;

LossResult evaluate_at(const LossFunction &loss, const Matrix &video,
                       const Matrix &text, const RelevancyMatrix &relevancy,
                       const LossConfig &cfg) {
  const FeatureMatrix v = l2_normalize(FeatureMatrix(video));
  const FeatureMatrix t = l2_normalize(FeatureMatrix(text));
  return loss(cosine_similarity(v, t), relevancy, cfg);
}

}  // namespace

GradientCheckReport finite_difference_check(const LossFunction &loss,
                                            const DatasetBundle &bundle,
                                            const LossConfig &cfg, double step) {
  if (!(step >= 1e-8 && step <= 1e-4)) {
    throw Error(ErrorCode::InvalidConfig,
                "finite-difference step " + std::to_string(step) +
                    " outside [1e-8, 1e-4]");
  }
  bundle.validate();

  Matrix video = bundle.video_features.matrix();
  Matrix text = bundle.text_features.matrix();
  const LossResult base = evaluate_at(loss, video, text, bundle.relevancy, cfg);
  const EmbeddingGradients analytic =
      backprop_to_embeddings(combined_similarity_gradient(base),
                             bundle.video_features, bundle.text_features);

  const double kink_guard = 10.0 * step;
  GradientCheckReport report;
  auto sweep = [&](Matrix &coords, const Matrix &grad) {
    for (std::size_t idx = 0; idx < coords.size(); ++idx) {
      double &x = coords.data()[idx];
      const double saved = x;
      x = saved + step;
      const LossResult plus = evaluate_at(loss, video, text, bundle.relevancy, cfg);
      x = saved - step;
      const LossResult minus = evaluate_at(loss, video, text, bundle.relevancy, cfg);
      x = saved;

      const double kink = std::min({base.min_kink_distance,
                                    plus.min_kink_distance,
                                    minus.min_kink_distance});
      if (kink < kink_guard) {
        ++report.skipped;
        continue;
      }
      const double numeric = (plus.value - minus.value) / (2.0 * step);
      const double exact = grad.data()[idx];
      const double denom =
          std::max({std::abs(numeric), std::abs(exact), kRelativeFloor});
      report.max_relative_error =
          std::max(report.max_relative_error, std::abs(numeric - exact) / denom);
      ++report.checked;
    }
  };
  sweep(video, analytic.video);
  sweep(text, analytic.text);
  return report;
}

}  // namespace smsl
