#pragma once

#include <cmath>
#include <stdexcept>

#include "revgame/decision.hpp"

namespace revgame {

// Unit-scale per-epoch reward under the current voucher system: full value
// only when both reviewers agree on Accept or Reject, otherwise the
// time-discounted value.
inline double reward_current(Decision d1, Decision d2, double time_discount) {
  if (!std::isfinite(time_discount) || time_discount < 0.0 || time_discount >= 1.0)
    throw std::invalid_argument("time discount must satisfy 0 <= d_t < 1");
  const bool full = d1 == d2 && (d1 == Decision::Accept || d1 == Decision::Reject);
  return full ? 1.0 : 1.0 - time_discount;
}

// Unit-scale per-epoch reward under the proposed system: 1.0 for exact
// agreement, 0.5 when the decisions are one category apart, 0.2 otherwise.
inline double reward_proposed(Decision d1, Decision d2) {
  const int gap = std::abs(ordinal(d1) - ordinal(d2));
  if (gap == 0) return 1.0;
  if (gap == 1) return 0.5;
  return 0.2;
}

}  // namespace revgame
