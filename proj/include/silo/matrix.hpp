#pragma once

#include <cstddef>
#include <vector>

#include "silo/rng.hpp"

namespace silo {

// Dense row-major matrix of doubles. Plain storage; all arithmetic lives in
// free functions so the parallel and serial kernels stay interchangeable.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) {
    return data[r * cols + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data[r * cols + c];
  }
  double* row(std::size_t r) { return data.data() + r * cols; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }

  std::size_t size() const { return data.size(); }

  bool same_shape(const Matrix& o) const {
    return rows == o.rows && cols == o.cols;
  }
};

// C = A * B. OpenMP over rows of A; the serial twin runs the identical
// per-element accumulation order (k ascending), so results are bitwise equal
// at any thread count.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_serial(const Matrix& a, const Matrix& b);

// C = A^T * B (A: n x r, B: n x c, C: r x c).
Matrix matmul_at_b(const Matrix& a, const Matrix& b);
Matrix matmul_at_b_serial(const Matrix& a, const Matrix& b);

// C = A * B^T (A: r x k, B: c x k, C: r x c).
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);
Matrix matmul_a_bt_serial(const Matrix& a, const Matrix& b);

// m(r, c) += v[c] for every row.
void add_row_vector(Matrix& m, const std::vector<double>& v);

// i.i.d. N(0, sigma^2) entries, filled row-major from rng.
Matrix gaussian_matrix(Rng& rng, std::size_t rows, std::size_t cols,
                       double sigma);

}  // namespace silo
