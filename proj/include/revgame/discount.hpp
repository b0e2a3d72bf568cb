#pragma once

#include <cmath>
#include <stdexcept>

namespace revgame {

// Value lost by receiving the reviewer voucher late after a Revision round.
// Two readings are supported: a fixed amount, and per-day compounding
// (1 + daily_rate)^revision_days.
struct DiscountSpec {
  enum class Mode { Fixed, Compounded };

  Mode mode = Mode::Fixed;
  double fixed_value = 0.0;
  double daily_rate = 0.0;
  int revision_days = 0;

  static DiscountSpec fixed(double value) {
    if (!std::isfinite(value) || value < 0.0)
      throw std::invalid_argument("fixed discount must be finite and nonnegative");
    DiscountSpec s;
    s.mode = Mode::Fixed;
    s.fixed_value = value;
    return s;
  }

  static DiscountSpec compounded(double daily_rate, int revision_days) {
    if (!std::isfinite(daily_rate) || daily_rate < 0.0)
      throw std::invalid_argument("daily rate must be finite and nonnegative");
    if (revision_days < 0)
      throw std::invalid_argument("revision day count must be nonnegative");
    DiscountSpec s;
    s.mode = Mode::Compounded;
    s.daily_rate = daily_rate;
    s.revision_days = revision_days;
    return s;
  }

  bool operator==(const DiscountSpec&) const = default;
};

inline double compute_discount(const DiscountSpec& spec) {
  if (spec.mode == DiscountSpec::Mode::Fixed) return spec.fixed_value;
  return std::pow(1.0 + spec.daily_rate, spec.revision_days);
}

}  // namespace revgame
