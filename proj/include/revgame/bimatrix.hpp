#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "revgame/text.hpp"

namespace revgame {

// Two-player finite game: one payoff table per player over the same
// row x column strategy grid. Immutable after construction.
//
// Text format (read/written below):
//   line 1: "m n"
//   line 2: m row labels (whitespace-separated tokens)
//   line 3: n column labels
//   next m lines: n cells each, cell = "<payoff1>,<payoff2>"
// '#' starts a comment; blank and comment lines are skipped anywhere.
class Bimatrix {
 public:
  Bimatrix(std::vector<std::string> row_labels, std::vector<std::string> col_labels,
           std::vector<double> payoff1, std::vector<double> payoff2)
      : row_labels_(std::move(row_labels)),
        col_labels_(std::move(col_labels)),
        p1_(std::move(payoff1)),
        p2_(std::move(payoff2)) {
    rows_ = row_labels_.size();
    cols_ = col_labels_.size();
    if (rows_ == 0 || cols_ == 0)
      throw std::invalid_argument("bimatrix must have at least one row and column");
    if (p1_.size() != rows_ * cols_ || p2_.size() != rows_ * cols_)
      throw std::invalid_argument("payoff tables must both be rows x cols");
    for (const auto* labels : {&row_labels_, &col_labels_})
      for (const auto& l : *labels) {
        if (l.empty()) throw std::invalid_argument("strategy labels must be nonempty");
        if (l.find_first_of(" \t\r\n") != std::string::npos)
          throw std::invalid_argument("strategy labels must not contain whitespace");
      }
    for (const auto* table : {&p1_, &p2_})
      for (double v : *table)
        if (!std::isfinite(v))
          throw std::invalid_argument("payoff entries must be finite");
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const std::vector<std::string>& row_labels() const { return row_labels_; }
  const std::vector<std::string>& col_labels() const { return col_labels_; }

  double payoff1(std::size_t row, std::size_t col) const { return p1_[index(row, col)]; }
  double payoff2(std::size_t row, std::size_t col) const { return p2_[index(row, col)]; }

  // player is 1-based.
  double payoff(int player, std::size_t row, std::size_t col) const {
    if (player == 1) return payoff1(row, col);
    if (player == 2) return payoff2(row, col);
    throw std::invalid_argument("player must be 1 or 2");
  }

  bool operator==(const Bimatrix&) const = default;

 private:
  std::size_t index(std::size_t row, std::size_t col) const {
    if (row >= rows_ || col >= cols_)
      throw std::out_of_range("bimatrix cell index out of range");
    return row * cols_ + col;
  }

  std::vector<std::string> row_labels_, col_labels_;
  std::vector<double> p1_, p2_;
  std::size_t rows_ = 0, cols_ = 0;
};

namespace detail {

// Returns the next line that holds content, with comments stripped.
inline bool next_content_line(std::istream& in, std::string& line, int& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (!text::trim(line).empty()) return true;
  }
  return false;
}

[[noreturn]] inline void matrix_error(int line_no, const std::string& msg) {
  throw std::invalid_argument("matrix line " + std::to_string(line_no) + ": " + msg);
}

inline std::vector<std::string> tokens_of(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream iss{std::string(s)};
  std::string tok;
  while (iss >> tok) out.push_back(tok);
  return out;
}

}  // namespace detail

inline Bimatrix read_bimatrix(std::istream& in) {
  std::string line;
  int line_no = 0;

  if (!detail::next_content_line(in, line, line_no))
    detail::matrix_error(line_no, "missing size header");
  auto header = detail::tokens_of(line);
  if (header.size() != 2) detail::matrix_error(line_no, "size header must be \"m n\"");
  long m = 0, n = 0;
  try {
    m = text::parse_long(header[0], "row count");
    n = text::parse_long(header[1], "column count");
  } catch (const std::invalid_argument& e) {
    detail::matrix_error(line_no, e.what());
  }
  if (m <= 0 || n <= 0) detail::matrix_error(line_no, "matrix dimensions must be positive");

  if (!detail::next_content_line(in, line, line_no))
    detail::matrix_error(line_no, "missing row labels");
  auto row_labels = detail::tokens_of(line);
  if (row_labels.size() != static_cast<std::size_t>(m))
    detail::matrix_error(line_no, "expected " + std::to_string(m) + " row labels");

  if (!detail::next_content_line(in, line, line_no))
    detail::matrix_error(line_no, "missing column labels");
  auto col_labels = detail::tokens_of(line);
  if (col_labels.size() != static_cast<std::size_t>(n))
    detail::matrix_error(line_no, "expected " + std::to_string(n) + " column labels");

  std::vector<double> p1, p2;
  p1.reserve(m * n);
  p2.reserve(m * n);
  for (long r = 0; r < m; ++r) {
    if (!detail::next_content_line(in, line, line_no))
      detail::matrix_error(line_no, "missing payoff row " + std::to_string(r + 1));
    auto cells = detail::tokens_of(line);
    if (cells.size() != static_cast<std::size_t>(n))
      detail::matrix_error(line_no, "expected " + std::to_string(n) + " cells");
    for (const auto& cell : cells) {
      auto parts = text::split(cell, ',');
      if (parts.size() != 2)
        detail::matrix_error(line_no, "cell must be \"p1,p2\": \"" + cell + "\"");
      try {
        p1.push_back(text::parse_double(parts[0], "payoff"));
        p2.push_back(text::parse_double(parts[1], "payoff"));
      } catch (const std::invalid_argument& e) {
        detail::matrix_error(line_no, e.what());
      }
    }
  }

  try {
    return Bimatrix(std::move(row_labels), std::move(col_labels), std::move(p1),
                    std::move(p2));
  } catch (const std::invalid_argument& e) {
    detail::matrix_error(line_no, e.what());
  }
}

inline Bimatrix read_bimatrix_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open matrix file: " + path.string());
  return read_bimatrix(in);
}

inline void write_bimatrix(std::ostream& out, const Bimatrix& game) {
  out << game.rows() << ' ' << game.cols() << '\n';
  for (std::size_t i = 0; i < game.rows(); ++i)
    out << game.row_labels()[i] << (i + 1 < game.rows() ? ' ' : '\n');
  for (std::size_t j = 0; j < game.cols(); ++j)
    out << game.col_labels()[j] << (j + 1 < game.cols() ? ' ' : '\n');
  for (std::size_t i = 0; i < game.rows(); ++i) {
    for (std::size_t j = 0; j < game.cols(); ++j) {
      out << text::format_double(game.payoff1(i, j)) << ','
          << text::format_double(game.payoff2(i, j));
      out << (j + 1 < game.cols() ? ' ' : '\n');
    }
  }
}

inline void write_bimatrix_file(const std::filesystem::path& path, const Bimatrix& game) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write matrix file: " + path.string());
  write_bimatrix(out, game);
}

}  // namespace revgame
