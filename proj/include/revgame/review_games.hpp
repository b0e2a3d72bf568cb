#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "revgame/bimatrix.hpp"
#include "revgame/decision.hpp"

namespace revgame {

namespace detail {
inline std::vector<std::string> decision_labels() {
  std::vector<std::string> out;
  for (Decision d : all_decisions()) out.emplace_back(to_string(d));
  return out;
}
}  // namespace detail

// Voucher game under the current reward system: agreeing on Accept or Reject
// pays the full reward immediately; every other outcome pays the full reward
// minus the time discount.
inline Bimatrix build_current_matrix(double full_reward, double time_discount) {
  if (!std::isfinite(full_reward) || full_reward <= 0.0)
    throw std::invalid_argument("full reward must be positive");
  if (!std::isfinite(time_discount) || time_discount < 0.0 || time_discount >= full_reward)
    throw std::invalid_argument("time discount must satisfy 0 <= d_t < full reward");

  std::vector<double> p(9, full_reward - time_discount);
  p[0 * 3 + 0] = full_reward;  // (Accept, Accept)
  p[2 * 3 + 2] = full_reward;  // (Reject, Reject)
  return Bimatrix(detail::decision_labels(), detail::decision_labels(), p, p);
}

// Voucher game under the proposed reward system: both reviewers always earn
// the same amount; exact agreement pays 2x the scale, adjacent decisions pay
// 1x, opposite decisions pay 0.5x.
inline Bimatrix build_proposed_matrix(double scale) {
  if (!std::isfinite(scale) || scale <= 0.0)
    throw std::invalid_argument("scale must be positive");

  std::vector<double> p(9, 0.0);
  for (Decision a : all_decisions())
    for (Decision b : all_decisions()) {
      int gap = ordinal(a) > ordinal(b) ? ordinal(a) - ordinal(b) : ordinal(b) - ordinal(a);
      double value = gap == 0 ? 2.0 * scale : gap == 1 ? scale : 0.5 * scale;
      p[ordinal(a) * 3 + ordinal(b)] = value;
    }
  return Bimatrix(detail::decision_labels(), detail::decision_labels(), p, p);
}

}  // namespace revgame
