#pragma once

#include <cmath>
#include <stdexcept>

#include "revgame/decision.hpp"

namespace revgame {

// Score thresholds separating Accept / Revision / Reject, plus the half-width
// of the uniform reviewer-bias interval. Treat as immutable once built.
struct QualityModel {
  double accept_threshold = 0.66;
  double revision_threshold = 0.33;
  double bias_halfwidth = 0.05;

  QualityModel() = default;
  QualityModel(double th_a, double th_r, double half_width)
      : accept_threshold(th_a), revision_threshold(th_r), bias_halfwidth(half_width) {
    validate();
  }

  void validate() const {
    if (!std::isfinite(accept_threshold) || !std::isfinite(revision_threshold) ||
        !std::isfinite(bias_halfwidth))
      throw std::invalid_argument("quality model fields must be finite");
    if (!(accept_threshold > revision_threshold))
      throw std::invalid_argument("acceptance threshold must exceed revision threshold");
    if (bias_halfwidth < 0.0)
      throw std::invalid_argument("bias_halfwidth must be nonnegative");
  }

  bool operator==(const QualityModel&) const = default;
};

// Maps an estimated score to a verdict. Boundary assignment: scores equal to a
// threshold fall into the lower (harsher) band.
inline Decision decide(double score, const QualityModel& m) {
  if (!std::isfinite(score))
    throw std::invalid_argument("quality score must be finite");
  if (score > m.accept_threshold) return Decision::Accept;
  if (score > m.revision_threshold) return Decision::Revision;
  return Decision::Reject;
}

}  // namespace revgame
