// Copyright 2026 The nullspace-unlearn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef UNSC_LINALG_HPP_
#define UNSC_LINALG_HPP_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace unsc {

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  // Row-wise literal, e.g. Matrix{{1, 2}, {3, 4}}.
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix column(std::span<const double> v);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::vector<double> col(std::size_t c) const;
  void set_col(std::size_t c, std::span<const double> v);

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  Matrix transpose() const;
  // Columns [begin, end).
  Matrix col_range(std::size_t begin, std::size_t end) const;

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);

// a * b
Matrix matmul(const Matrix& a, const Matrix& b);
// a^T * b without forming a^T.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
// a * b^T without forming b^T.
Matrix matmul_nt(const Matrix& a, const Matrix& b);

// Horizontal concatenation; all blocks share the row count.
Matrix hconcat(std::span<const Matrix> blocks);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);
double frobenius_norm(const Matrix& m);
double frobenius_norm_sq(const Matrix& m);
double max_abs_diff(const Matrix& a, const Matrix& b);

// Throws NumericError naming the first (row, col) holding NaN or Inf.
void require_finite(const Matrix& m, const char* what);
bool all_finite(const Matrix& m);

struct SvdResult {
  Matrix u;               // m x r, orthonormal columns
  std::vector<double> s;  // r values, non-negative, non-increasing
  Matrix vt;              // r x n, orthonormal rows
};

// Thin SVD, r = min(m, n), by one-sided (Hestenes) Jacobi rotations.
// Sweeps pairs in fixed cyclic order, so results are bit-reproducible.
// Left singular vectors for zero singular values are completed to an
// orthonormal set by Gram-Schmidt against the canonical basis. Sign
// convention: the largest-magnitude entry of each column of u is positive
// (lowest index wins ties); rows of vt flip along with it.
SvdResult svd(const Matrix& m);

// Smallest k with sum_{i<k} s_i^2 >= epsilon * sum_i s_i^2. Sums run in
// index order, so epsilon = 1 returns the index of the last nonzero value.
std::size_t rank_cutoff(std::span<const double> s, double epsilon);

// Largest |B^T B - I| entry.
double orthonormality_defect(const Matrix& basis);

// P = I - B B^T for a basis B with orthonormal columns (n x k), exactly zero
// when k == n. Throws
// ValidationError if B^T B deviates from I by more than 1e-8.
Matrix null_projector(const Matrix& basis);

// grad * p. Projects every row of a (fan_out x fan_in) gradient onto the
// subspace p projects to.
Matrix apply_projection(const Matrix& grad, const Matrix& p);

}  // namespace unsc

#endif  // UNSC_LINALG_HPP_
