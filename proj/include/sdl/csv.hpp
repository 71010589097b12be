// sdl/csv.hpp

#pragma once

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sdl/dense_matrix.hpp"

namespace sdl {

// Formats a double with 17 significant digits, enough to round-trip any IEEE
// binary64 value exactly.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

// Writes a matrix as plain comma-separated rows with '\n' line endings and no
// header. Used for all numeric artifacts the CLI emits.
inline void save_matrix_csv(const std::string &path, const DenseMatrix &m) {
  for (std::size_t k = 0; k < m.size(); ++k)
    if (!std::isfinite(m.data()[k]))
      throw std::invalid_argument("save_matrix_csv: non-finite entry for " +
                                  path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("save_matrix_csv: cannot open " + path);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("save_matrix_csv: write failed for " + path);
}

namespace detail {

inline bool parse_double_token(const std::string &token, double *value) {
  errno = 0;
  const char *begin = token.c_str();
  char *end = nullptr;
  *value = std::strtod(begin, &end);
  if (end == begin || errno == ERANGE) return false;
  while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
  return *end == '\0';
}

}  // namespace detail

// Reads a headerless numeric CSV. Ragged rows, empty cells, unparseable or
// non-finite entries are rejected, matching what save_matrix_csv produces.
inline DenseMatrix load_matrix_csv(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("load_matrix_csv: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string token;
    while (std::getline(ss, token, ',')) {
      double v;
      if (!detail::parse_double_token(token, &v))
        throw std::invalid_argument("load_matrix_csv: bad cell '" + token +
                                    "' in " + path);
      if (!std::isfinite(v))
        throw std::invalid_argument("load_matrix_csv: non-finite entry in " +
                                    path);
      row.push_back(v);
    }
    if (line.empty() || line.back() == ',')
      throw std::invalid_argument("load_matrix_csv: empty trailing cell in " +
                                  path);
    rows.push_back(std::move(row));
  }
  if (rows.empty())
    throw std::invalid_argument("load_matrix_csv: no rows in " + path);
  const std::size_t cols = rows.front().size();
  for (const auto &row : rows)
    if (row.size() != cols)
      throw std::invalid_argument("load_matrix_csv: ragged rows in " + path);
  DenseMatrix m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
  return m;
}

// Labels travel as a single-column CSV of small non-negative integers.
inline void save_labels_csv(const std::string &path,
                            const std::vector<int> &labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("save_labels_csv: cannot open " + path);
  for (int y : labels) out << y << '\n';
  if (!out) throw std::runtime_error("save_labels_csv: write failed for " + path);
}

inline std::vector<int> load_labels_csv(const std::string &path) {
  const DenseMatrix m = load_matrix_csv(path);
  if (m.cols() != 1)
    throw std::invalid_argument("load_labels_csv: expected one column in " +
                                path);
  std::vector<int> labels(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double v = m(i, 0);
    if (v != std::floor(v) || v < 0.0 || v > 1e9)
      throw std::invalid_argument("load_labels_csv: bad label in " + path);
    labels[i] = static_cast<int>(v);
  }
  return labels;
}

}  // namespace sdl
