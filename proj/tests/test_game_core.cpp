#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "revgame/bimatrix.hpp"
#include "revgame/decision.hpp"
#include "revgame/discount.hpp"
#include "revgame/quality.hpp"
#include "revgame/random.hpp"
#include "revgame/review_games.hpp"

using namespace revgame;

TEST_CASE("decision ordinal encoding round-trips") {
  for (Decision d : all_decisions()) {
    CHECK(decision_from_ordinal(ordinal(d)) == d);
    CHECK(parse_decision(to_string(d)) == d);
    CHECK(parse_decision(token(d)) == d);
  }
  CHECK(ordinal(Decision::Accept) == 0);
  CHECK(ordinal(Decision::Revision) == 1);
  CHECK(ordinal(Decision::Reject) == 2);
  CHECK_THROWS_AS(decision_from_ordinal(3), std::out_of_range);
  CHECK_THROWS_AS(decision_from_ordinal(-1), std::out_of_range);
  CHECK_THROWS_AS(parse_decision("Maybe"), std::invalid_argument);
}

TEST_CASE("quality model validates thresholds") {
  CHECK_NOTHROW(QualityModel(0.66, 0.33, 0.05));
  CHECK_THROWS_AS(QualityModel(0.3, 0.33, 0.05), std::invalid_argument);
  CHECK_THROWS_AS(QualityModel(0.33, 0.33, 0.05), std::invalid_argument);
  CHECK_THROWS_AS(QualityModel(0.66, 0.33, -0.01), std::invalid_argument);
  CHECK_THROWS_AS(QualityModel(std::nan(""), 0.33, 0.05), std::invalid_argument);
}

TEST_CASE("decide maps scores to verdicts") {
  const QualityModel m(0.66, 0.33, 0.05);
  CHECK(decide(0.8, m) == Decision::Accept);
  CHECK(decide(0.5, m) == Decision::Revision);
  CHECK(decide(0.0, m) == Decision::Reject);
  // Boundary scores fall into the harsher band.
  CHECK(decide(0.66, m) == Decision::Revision);
  CHECK(decide(0.33, m) == Decision::Reject);
  CHECK_THROWS_AS(decide(std::numeric_limits<double>::infinity(), m), std::invalid_argument);
  CHECK_THROWS_AS(decide(std::nan(""), m), std::invalid_argument);
}

TEST_CASE("decide is monotone in the score") {
  const QualityModel m(0.66, 0.33, 0.05);
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    double a = uniform_range(rng, -0.5, 1.5);
    double b = uniform_range(rng, -0.5, 1.5);
    if (a > b) std::swap(a, b);
    CHECK(ordinal(decide(a, m)) >= ordinal(decide(b, m)));
  }
}

TEST_CASE("discount modes") {
  CHECK(compute_discount(DiscountSpec::fixed(0.2)) == 0.2);
  CHECK(compute_discount(DiscountSpec::compounded(0.0, 30)) == 1.0);

  // Direct evaluation of the power expression is the oracle.
  const double expect = std::pow(1.001, 30);
  CHECK(compute_discount(DiscountSpec::compounded(0.001, 30)) == expect);
  CHECK(expect == Catch::Approx(1.030439).epsilon(1e-6));

  CHECK_THROWS_AS(DiscountSpec::fixed(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(DiscountSpec::compounded(-0.1, 3), std::invalid_argument);
  CHECK_THROWS_AS(DiscountSpec::compounded(0.1, -3), std::invalid_argument);
}

TEST_CASE("compounded discount is nondecreasing in rate and days") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    double r1 = uniform_range(rng, 0.0, 0.02);
    double r2 = uniform_range(rng, 0.0, 0.02);
    if (r1 > r2) std::swap(r1, r2);
    int n1 = static_cast<int>(rng() % 200);
    int n2 = static_cast<int>(rng() % 200);
    if (n1 > n2) std::swap(n1, n2);
    CHECK(compute_discount(DiscountSpec::compounded(r1, n1)) <=
          compute_discount(DiscountSpec::compounded(r2, n1)));
    CHECK(compute_discount(DiscountSpec::compounded(r1, n1)) <=
          compute_discount(DiscountSpec::compounded(r1, n2)));
  }
}

TEST_CASE("current-system payoff matrix") {
  const Bimatrix m = build_current_matrix(100.0, 20.0);
  REQUIRE(m.rows() == 3);
  REQUIRE(m.cols() == 3);
  CHECK(m.row_labels()[0] == "Accept");
  CHECK(m.col_labels()[2] == "Reject");

  CHECK(m.payoff1(0, 0) == 100.0);
  CHECK(m.payoff2(0, 0) == 100.0);
  CHECK(m.payoff1(2, 2) == 100.0);
  CHECK(m.payoff1(1, 1) == 80.0);
  CHECK(m.payoff2(1, 1) == 80.0);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      const bool full = (i == 0 && j == 0) || (i == 2 && j == 2);
      CHECK(m.payoff1(i, j) == (full ? 100.0 : 80.0));
      CHECK(m.payoff1(i, j) == m.payoff2(i, j));
    }

  CHECK_THROWS_AS(build_current_matrix(100.0, 100.0), std::invalid_argument);
  CHECK_THROWS_AS(build_current_matrix(100.0, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_current_matrix(0.0, 0.0), std::invalid_argument);
}

TEST_CASE("zero discount collapses the current matrix") {
  const Bimatrix m = build_current_matrix(1.0, 0.0);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(m.payoff1(i, j) == 1.0);
      CHECK(m.payoff2(i, j) == 1.0);
    }
}

TEST_CASE("current matrix has exactly two full-reward cells for any valid discount") {
  for (double d : {1e-9, 0.5, 1.0, 20.0, 50.0, 99.0, 99.999}) {
    const Bimatrix m = build_current_matrix(100.0, d);
    int full_cells = 0;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        if (m.payoff1(i, j) == 100.0)
          ++full_cells;
        else
          CHECK(m.payoff1(i, j) == 100.0 - d);
      }
    CHECK(full_cells == 2);
  }
}

TEST_CASE("proposed payoff matrix") {
  const Bimatrix m = build_proposed_matrix(100.0);
  CHECK(m.payoff1(0, 0) == 200.0);
  CHECK(m.payoff2(0, 0) == 200.0);
  CHECK(m.payoff1(1, 1) == 200.0);
  CHECK(m.payoff1(2, 2) == 200.0);
  CHECK(m.payoff1(0, 1) == 100.0);
  CHECK(m.payoff1(1, 2) == 100.0);
  CHECK(m.payoff1(0, 2) == 50.0);
  CHECK(m.payoff1(2, 0) == 50.0);
  CHECK_THROWS_AS(build_proposed_matrix(0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_proposed_matrix(-1.0), std::invalid_argument);
}

TEST_CASE("proposed matrix is a symmetric common-payoff game") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    const double scale = uniform_range(rng, 0.01, 500.0);
    const Bimatrix m = build_proposed_matrix(scale);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        CHECK(m.payoff1(i, j) == m.payoff2(i, j));
        CHECK(m.payoff1(i, j) == m.payoff1(j, i));
      }
  }
}

TEST_CASE("bimatrix construction validates shape and entries") {
  CHECK_THROWS_AS(Bimatrix({"a"}, {"x", "y"}, {1.0}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(Bimatrix({"a"}, {"x"}, {std::nan("")}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(Bimatrix({"a b"}, {"x"}, {1.0}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(Bimatrix({""}, {"x"}, {1.0}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(Bimatrix({}, {}, {}, {}), std::invalid_argument);

  const Bimatrix m({"Heads", "Tails"}, {"Heads", "Tails"}, {1, -1, -1, 1}, {-1, 1, 1, -1});
  CHECK(m.payoff(1, 0, 1) == -1.0);
  CHECK(m.payoff(2, 0, 1) == 1.0);
  CHECK_THROWS_AS(m.payoff(3, 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(m.payoff1(2, 0), std::out_of_range);
}

TEST_CASE("bimatrix text format round-trips") {
  const Bimatrix m({"Stag", "Hare"}, {"Stag", "Hare"}, {2, 0, 1.25, -1e-3},
                   {2, 1, 0, 1e300});
  std::stringstream s;
  write_bimatrix(s, m);
  const Bimatrix back = read_bimatrix(s);
  CHECK(back == m);

  // Writing is byte-stable.
  std::stringstream s2;
  write_bimatrix(s2, m);
  CHECK(s.str() == s2.str());
}

TEST_CASE("bimatrix reader accepts comments and reports malformed input") {
  std::istringstream ok(
      "# coordination game\n"
      "2 2\n\n"
      "L R   # rows\n"
      "L R\n"
      "1,1 0,0\n"
      "0,0 1,1\n");
  const Bimatrix m = read_bimatrix(ok);
  CHECK(m.rows() == 2);
  CHECK(m.payoff1(0, 0) == 1.0);

  auto expect_error = [](const std::string& content, const std::string& needle) {
    std::istringstream in(content);
    try {
      read_bimatrix(in);
      FAIL("expected parse error for: " << content);
    } catch (const std::invalid_argument& e) {
      CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring(needle));
    }
  };
  expect_error("", "size header");
  expect_error("2\nL R\nL R\n1,1 0,0\n0,0 1,1\n", "m n");
  expect_error("2 2\nL\nL R\n1,1 0,0\n0,0 1,1\n", "row labels");
  expect_error("2 2\nL R\nL R\n1,1\n0,0 1,1\n", "expected 2 cells");
  expect_error("2 2\nL R\nL R\n1,1 0;0\n0,0 1,1\n", "p1,p2");
  expect_error("2 2\nL R\nL R\n1,1 0,zz\n0,0 1,1\n", "payoff");
  expect_error("0 2\nL R\nL R\n", "positive");
}
