#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "revgame/bimatrix.hpp"

namespace revgame {

inline constexpr double kEquilibriumTolerance = 1e-9;

// Support enumeration is exponential in the strategy counts; anything larger
// than this per side is rejected.
inline constexpr std::size_t kMaxSupportEnumSize = 4;

struct StrategyProfile {
  std::size_t row = 0;
  std::size_t col = 0;
  auto operator<=>(const StrategyProfile&) const = default;
};

struct MixedProfile {
  std::vector<double> row_dist;
  std::vector<double> col_dist;
};

enum class NashMode { Strict, Weak };

struct Dominance {
  std::size_t index = 0;
  bool strict = false;
  bool operator==(const Dominance&) const = default;
};

struct EquilibriumReport {
  std::vector<StrategyProfile> strict_pure;
  std::vector<StrategyProfile> weak_pure;
  std::vector<MixedProfile> mixed;
  std::vector<StrategyProfile> pareto;
  std::optional<Dominance> dominant_row;  // player 1
  std::optional<Dominance> dominant_col;  // player 2
  std::optional<StrategyProfile> dominant_pair;
  bool mixed_enumerated = false;
};

namespace detail {

inline void check_player(int player) {
  if (player != 1 && player != 2)
    throw std::invalid_argument("player must be 1 or 2");
}

// Unique solution of an m x n linear system given as an augmented matrix
// (n coefficients + rhs per row). Gaussian elimination with partial pivoting.
// Returns nullopt when the system is inconsistent or underdetermined.
inline std::optional<std::vector<double>> solve_unique(
    std::vector<std::vector<double>> aug, std::size_t unknowns, double pivot_eps) {
  const std::size_t m = aug.size();
  std::vector<std::size_t> pivot_row_of(unknowns, SIZE_MAX);
  std::size_t rank = 0;

  for (std::size_t col = 0; col < unknowns && rank < m; ++col) {
    std::size_t best = SIZE_MAX;
    double best_abs = pivot_eps;
    for (std::size_t r = rank; r < m; ++r) {
      double a = std::fabs(aug[r][col]);
      if (a > best_abs) {
        best_abs = a;
        best = r;
      }
    }
    if (best == SIZE_MAX) continue;  // no pivot in this column
    std::swap(aug[rank], aug[best]);
    for (std::size_t r = 0; r < m; ++r) {
      if (r == rank) continue;
      double f = aug[r][col] / aug[rank][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c <= unknowns; ++c) aug[r][c] -= f * aug[rank][c];
    }
    pivot_row_of[col] = rank;
    ++rank;
  }

  // Inconsistent if any zero row has a nonzero right-hand side.
  for (std::size_t r = rank; r < m; ++r)
    if (std::fabs(aug[r][unknowns]) > pivot_eps) return std::nullopt;
  // Underdetermined if some unknown has no pivot.
  for (std::size_t c = 0; c < unknowns; ++c)
    if (pivot_row_of[c] == SIZE_MAX) return std::nullopt;

  std::vector<double> x(unknowns, 0.0);
  for (std::size_t c = 0; c < unknowns; ++c) {
    const std::size_t r = pivot_row_of[c];
    x[c] = aug[r][unknowns] / aug[r][c];
  }
  return x;
}

inline std::vector<std::size_t> mask_to_indices(unsigned mask, std::size_t n) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i)
    if (mask & (1u << i)) out.push_back(i);
  return out;
}

}  // namespace detail

// Argmax set of `player`'s payoff against a fixed opponent choice. For
// player 1 the opponent choice is a column index; for player 2 a row index.
inline std::vector<std::size_t> best_responses(const Bimatrix& game, int player,
                                               std::size_t opponent_choice,
                                               double tol = kEquilibriumTolerance) {
  detail::check_player(player);
  const std::size_t own_count = player == 1 ? game.rows() : game.cols();
  const std::size_t opp_count = player == 1 ? game.cols() : game.rows();
  if (opponent_choice >= opp_count)
    throw std::out_of_range("opponent choice out of range");

  auto value = [&](std::size_t k) {
    return player == 1 ? game.payoff1(k, opponent_choice)
                       : game.payoff2(opponent_choice, k);
  };
  double best = value(0);
  for (std::size_t k = 1; k < own_count; ++k) best = std::max(best, value(k));
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < own_count; ++k)
    if (value(k) >= best - tol) out.push_back(k);
  return out;
}

// Pure Nash profiles. Weak: no unilateral deviation strictly gains. Strict:
// every unilateral deviation strictly loses.
inline std::vector<StrategyProfile> pure_nash(const Bimatrix& game, NashMode mode,
                                              double tol = kEquilibriumTolerance) {
  std::vector<StrategyProfile> out;
  for (std::size_t i = 0; i < game.rows(); ++i)
    for (std::size_t j = 0; j < game.cols(); ++j) {
      bool ok = true;
      for (std::size_t k = 0; ok && k < game.rows(); ++k) {
        if (k == i) continue;
        if (mode == NashMode::Weak
                ? game.payoff1(k, j) > game.payoff1(i, j) + tol
                : !(game.payoff1(k, j) < game.payoff1(i, j) - tol))
          ok = false;
      }
      for (std::size_t l = 0; ok && l < game.cols(); ++l) {
        if (l == j) continue;
        if (mode == NashMode::Weak
                ? game.payoff2(i, l) > game.payoff2(i, j) + tol
                : !(game.payoff2(i, l) < game.payoff2(i, j) - tol))
          ok = false;
      }
      if (ok) out.push_back({i, j});
    }
  return out;
}

// Lowest-index strategy that is a weak best response to every opponent
// strategy, if one exists. The flag reports strict dominance.
inline std::optional<Dominance> dominant_strategy(const Bimatrix& game, int player,
                                                  double tol = kEquilibriumTolerance) {
  detail::check_player(player);
  const std::size_t own_count = player == 1 ? game.rows() : game.cols();
  const std::size_t opp_count = player == 1 ? game.cols() : game.rows();
  auto value = [&](std::size_t own, std::size_t opp) {
    return player == 1 ? game.payoff1(own, opp) : game.payoff2(opp, own);
  };

  for (std::size_t cand = 0; cand < own_count; ++cand) {
    bool weak = true, strict = own_count > 1;
    for (std::size_t opp = 0; weak && opp < opp_count; ++opp)
      for (std::size_t alt = 0; alt < own_count; ++alt) {
        if (alt == cand) continue;
        if (value(cand, opp) < value(alt, opp) - tol) {
          weak = false;
          break;
        }
        if (!(value(cand, opp) > value(alt, opp) + tol)) strict = false;
      }
    if (weak) return Dominance{cand, strict};
  }
  return std::nullopt;
}

// When both players have dominant strategies, that pair is a Nash profile.
inline std::optional<StrategyProfile> dominant_pair_is_nash(
    const Bimatrix& game, double tol = kEquilibriumTolerance) {
  auto d1 = dominant_strategy(game, 1, tol);
  auto d2 = dominant_strategy(game, 2, tol);
  if (!d1 || !d2) return std::nullopt;
  StrategyProfile profile{d1->index, d2->index};
  auto weak = pure_nash(game, NashMode::Weak, tol);
  if (std::find(weak.begin(), weak.end(), profile) == weak.end())
    throw std::logic_error("dominant pair missing from weak Nash set");
  return profile;
}

// Profiles not weakly dominated (with a strict gain for someone) by any other
// profile.
inline std::vector<StrategyProfile> pareto_efficient(
    const Bimatrix& game, double tol = kEquilibriumTolerance) {
  std::vector<StrategyProfile> out;
  for (std::size_t i = 0; i < game.rows(); ++i)
    for (std::size_t j = 0; j < game.cols(); ++j) {
      bool dominated = false;
      for (std::size_t k = 0; !dominated && k < game.rows(); ++k)
        for (std::size_t l = 0; l < game.cols(); ++l) {
          if (k == i && l == j) continue;
          bool ge1 = game.payoff1(k, l) >= game.payoff1(i, j) - tol;
          bool ge2 = game.payoff2(k, l) >= game.payoff2(i, j) - tol;
          bool gt = game.payoff1(k, l) > game.payoff1(i, j) + tol ||
                    game.payoff2(k, l) > game.payoff2(i, j) + tol;
          if (ge1 && ge2 && gt) {
            dominated = true;
            break;
          }
        }
      if (!dominated) out.push_back({i, j});
    }
  return out;
}

// Mixed equilibria by support enumeration. For every pair of supports the
// opponent-indifference system is solved; candidate distributions with
// negative weights, or where an off-support strategy strictly profits, are
// discarded. Supports whose indifference system has no unique solution are
// skipped. Duplicate solutions arising from different supports are merged.
inline std::vector<MixedProfile> mixed_nash_support_enum(
    const Bimatrix& game, double tol = kEquilibriumTolerance) {
  const std::size_t m = game.rows(), n = game.cols();
  if (m > kMaxSupportEnumSize || n > kMaxSupportEnumSize)
    throw std::invalid_argument("support enumeration is limited to games up to 4x4");

  const double pivot_eps = std::max(tol, 1e-12);
  std::vector<MixedProfile> found;

  auto nearly_equal = [&](const std::vector<double>& a, const std::vector<double>& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
      if (std::fabs(a[i] - b[i]) > std::max(tol, 1e-9) * 10.0) return false;
    return true;
  };

  // Solves the indifference system of `active` (the player who must be
  // indifferent across `support`) for the opponent's distribution over
  // `opp_support`. Returns the full-length opponent distribution plus the
  // active player's equilibrium value.
  auto solve_opponent_dist =
      [&](int active, const std::vector<std::size_t>& support,
          const std::vector<std::size_t>& opp_support)
      -> std::optional<std::pair<std::vector<double>, double>> {
    const std::size_t k = opp_support.size();
    std::vector<std::vector<double>> aug;
    aug.reserve(support.size() + 1);
    for (std::size_t s : support) {
      std::vector<double> row(k + 2, 0.0);
      for (std::size_t t = 0; t < k; ++t)
        row[t] = active == 1 ? game.payoff1(s, opp_support[t])
                             : game.payoff2(opp_support[t], s);
      row[k] = -1.0;  // minus the equilibrium value
      row[k + 1] = 0.0;
      aug.push_back(std::move(row));
    }
    std::vector<double> norm(k + 2, 0.0);
    for (std::size_t t = 0; t < k; ++t) norm[t] = 1.0;
    norm[k + 1] = 1.0;
    aug.push_back(std::move(norm));

    auto sol = detail::solve_unique(std::move(aug), k + 1, pivot_eps);
    if (!sol) return std::nullopt;

    const std::size_t opp_count = active == 1 ? n : m;
    std::vector<double> dist(opp_count, 0.0);
    double sum = 0.0;
    for (std::size_t t = 0; t < k; ++t) {
      double p = (*sol)[t];
      if (p < -tol * 10.0) return std::nullopt;
      p = std::max(p, 0.0);
      dist[opp_support[t]] = p;
      sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-6) return std::nullopt;
    for (double& p : dist) p /= sum;
    return std::make_pair(std::move(dist), (*sol)[k]);
  };

  for (unsigned rmask = 1; rmask < (1u << m); ++rmask) {
    auto rows = detail::mask_to_indices(rmask, m);
    for (unsigned cmask = 1; cmask < (1u << n); ++cmask) {
      auto cols = detail::mask_to_indices(cmask, n);

      auto col_dist = solve_opponent_dist(1, rows, cols);
      if (!col_dist) continue;
      auto row_dist = solve_opponent_dist(2, cols, rows);
      if (!row_dist) continue;

      const auto& y = col_dist->first;
      const auto& x = row_dist->first;
      const double v1 = col_dist->second;
      const double v2 = row_dist->second;

      // Off-support strategies must not strictly profit.
      bool valid = true;
      for (std::size_t i = 0; valid && i < m; ++i) {
        if (rmask & (1u << i)) continue;
        double u = 0.0;
        for (std::size_t j = 0; j < n; ++j) u += game.payoff1(i, j) * y[j];
        if (u > v1 + tol * 10.0) valid = false;
      }
      for (std::size_t j = 0; valid && j < n; ++j) {
        if (cmask & (1u << j)) continue;
        double u = 0.0;
        for (std::size_t i = 0; i < m; ++i) u += game.payoff2(i, j) * x[i];
        if (u > v2 + tol * 10.0) valid = false;
      }
      if (!valid) continue;

      bool duplicate = false;
      for (const auto& p : found)
        if (nearly_equal(p.row_dist, x) && nearly_equal(p.col_dist, y)) {
          duplicate = true;
          break;
        }
      if (!duplicate) found.push_back(MixedProfile{x, y});
    }
  }
  return found;
}

inline EquilibriumReport analyze_game(const Bimatrix& game, bool include_mixed,
                                      double tol = kEquilibriumTolerance) {
  EquilibriumReport report;
  report.strict_pure = pure_nash(game, NashMode::Strict, tol);
  report.weak_pure = pure_nash(game, NashMode::Weak, tol);
  report.pareto = pareto_efficient(game, tol);
  report.dominant_row = dominant_strategy(game, 1, tol);
  report.dominant_col = dominant_strategy(game, 2, tol);
  report.dominant_pair = dominant_pair_is_nash(game, tol);
  if (include_mixed) {
    report.mixed = mixed_nash_support_enum(game, tol);
    report.mixed_enumerated = true;
  }
  return report;
}

}  // namespace revgame
