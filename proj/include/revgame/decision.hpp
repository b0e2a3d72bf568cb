#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>

namespace revgame {

// Reviewer verdict, ordinal-encoded. Higher ordinal = harsher decision.
enum class Decision : int { Accept = 0, Revision = 1, Reject = 2 };

inline constexpr int kDecisionCount = 3;

inline constexpr std::array<Decision, 3> all_decisions() {
  return {Decision::Accept, Decision::Revision, Decision::Reject};
}

constexpr int ordinal(Decision d) { return static_cast<int>(d); }

inline Decision decision_from_ordinal(int i) {
  if (i < 0 || i >= kDecisionCount)
    throw std::out_of_range("decision ordinal out of range: " + std::to_string(i));
  return static_cast<Decision>(i);
}

constexpr std::string_view to_string(Decision d) {
  switch (d) {
    case Decision::Accept: return "Accept";
    case Decision::Revision: return "Revision";
    case Decision::Reject: return "Reject";
  }
  return "?";
}

// Short token used in CSV columns.
constexpr std::string_view token(Decision d) {
  switch (d) {
    case Decision::Accept: return "A";
    case Decision::Revision: return "Rev";
    case Decision::Reject: return "Rej";
  }
  return "?";
}

// Accepts either the full name or the CSV token.
inline Decision parse_decision(std::string_view s) {
  for (Decision d : all_decisions())
    if (s == to_string(d) || s == token(d)) return d;
  throw std::invalid_argument("unknown decision: \"" + std::string(s) + "\"");
}

}  // namespace revgame
