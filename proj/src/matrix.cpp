#include "silo/matrix.hpp"

#include <cstdint>
#include <stdexcept>

namespace silo {
namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

// The (i, k, j) loop body shared by the parallel and serial matmul variants.
inline void matmul_row(const Matrix& a, const Matrix& b, Matrix& c,
                       std::size_t i) {
  double* crow = c.row(i);
  const double* arow = a.row(i);
  for (std::size_t k = 0; k < a.cols; ++k) {
    const double aik = arow[k];
    const double* brow = b.row(k);
    for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
  }
}

inline void at_b_row(const Matrix& a, const Matrix& b, Matrix& c,
                     std::size_t i) {
  double* crow = c.row(i);
  for (std::size_t r = 0; r < a.rows; ++r) {
    const double ari = a(r, i);
    const double* brow = b.row(r);
    for (std::size_t j = 0; j < b.cols; ++j) crow[j] += ari * brow[j];
  }
}

inline void a_bt_row(const Matrix& a, const Matrix& b, Matrix& c,
                     std::size_t i) {
  double* crow = c.row(i);
  const double* arow = a.row(i);
  for (std::size_t j = 0; j < b.rows; ++j) {
    const double* brow = b.row(j);
    double s = 0.0;
    for (std::size_t k = 0; k < a.cols; ++k) s += arow[k] * brow[k];
    crow[j] = s;
  }
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
  require(a.cols == b.rows, "matmul: inner dimensions differ");
  Matrix c(a.rows, b.cols);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(a.rows); ++i) {
    matmul_row(a, b, c, static_cast<std::size_t>(i));
  }
  return c;
}

Matrix matmul_serial(const Matrix& a, const Matrix& b) {
  require(a.cols == b.rows, "matmul: inner dimensions differ");
  Matrix c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) matmul_row(a, b, c, i);
  return c;
}

Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
  require(a.rows == b.rows, "matmul_at_b: row counts differ");
  Matrix c(a.cols, b.cols);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(a.cols); ++i) {
    at_b_row(a, b, c, static_cast<std::size_t>(i));
  }
  return c;
}

Matrix matmul_at_b_serial(const Matrix& a, const Matrix& b) {
  require(a.rows == b.rows, "matmul_at_b: row counts differ");
  Matrix c(a.cols, b.cols);
  for (std::size_t i = 0; i < a.cols; ++i) at_b_row(a, b, c, i);
  return c;
}

Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
  require(a.cols == b.cols, "matmul_a_bt: inner dimensions differ");
  Matrix c(a.rows, b.rows);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(a.rows); ++i) {
    a_bt_row(a, b, c, static_cast<std::size_t>(i));
  }
  return c;
}

Matrix matmul_a_bt_serial(const Matrix& a, const Matrix& b) {
  require(a.cols == b.cols, "matmul_a_bt: inner dimensions differ");
  Matrix c(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i) a_bt_row(a, b, c, i);
  return c;
}

void add_row_vector(Matrix& m, const std::vector<double>& v) {
  require(v.size() == m.cols, "add_row_vector: length mismatch");
  for (std::size_t i = 0; i < m.rows; ++i) {
    double* row = m.row(i);
    for (std::size_t j = 0; j < m.cols; ++j) row[j] += v[j];
  }
}

Matrix gaussian_matrix(Rng& rng, std::size_t rows, std::size_t cols,
                       double sigma) {
  Matrix m(rows, cols);
  for (auto& x : m.data) x = rng.gaussian() * sigma;
  return m;
}

}  // namespace silo
