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

#include "unsc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "unsc/errors.hpp"

namespace unsc {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ValidationError("Matrix: " + std::to_string(data_.size()) +
                          " entries for shape " + std::to_string(rows_) + "x" +
                          std::to_string(cols_));
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ValidationError("Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::column(std::span<const double> v) {
  return Matrix(v.size(), 1, std::vector<double>(v.begin(), v.end()));
}

std::vector<double> Matrix::col(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

void Matrix::set_col(std::size_t c, std::span<const double> v) {
  for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = v[r];
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Matrix Matrix::col_range(std::size_t begin, std::size_t end) const {
  Matrix out(rows_, end - begin);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = begin; c < end; ++c) out(r, c - begin) = (*this)(r, c);
  return out;
}

Matrix& Matrix::operator+=(const Matrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw ValidationError("Matrix +=: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw ValidationError("Matrix -=: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& x : data_) x *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw ValidationError("matmul: " + shape(a) + " * " + shape(b));
  Matrix c(a.rows(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* ci = c.row(i).data();
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* bk = b.row(k).data();
      for (std::size_t j = 0; j < n; ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows())
    throw ValidationError("matmul_tn: " + shape(a) + "^T * " + shape(b));
  Matrix c(a.cols(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double* ak = a.row(k).data();
    const double* bk = b.row(k).data();
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = ak[i];
      if (aki == 0.0) continue;
      double* ci = c.row(i).data();
      for (std::size_t j = 0; j < n; ++j) ci[j] += aki * bk[j];
    }
  }
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols())
    throw ValidationError("matmul_nt: " + shape(a) + " * " + shape(b) + "^T");
  Matrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ai = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) c(i, j) = dot(ai, b.row(j));
  }
  return c;
}

Matrix hconcat(std::span<const Matrix> blocks) {
  if (blocks.empty()) return {};
  const std::size_t rows = blocks.front().rows();
  std::size_t cols = 0;
  for (const auto& b : blocks) {
    if (b.rows() != rows) throw ValidationError("hconcat: row count mismatch");
    cols += b.cols();
  }
  Matrix out(rows, cols);
  std::size_t offset = 0;
  for (const auto& b : blocks) {
    for (std::size_t r = 0; r < rows; ++r)
      std::copy(b.row(r).begin(), b.row(r).end(), out.row(r).begin() + offset);
    offset += b.cols();
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double frobenius_norm_sq(const Matrix& m) { return dot(m.data(), m.data()); }

double frobenius_norm(const Matrix& m) { return std::sqrt(frobenius_norm_sq(m)); }

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ValidationError("max_abs_diff: shape mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    d = std::max(d, std::abs(a.data()[i] - b.data()[i]));
  return d;
}

bool all_finite(const Matrix& m) {
  return std::all_of(m.data().begin(), m.data().end(),
                     [](double x) { return std::isfinite(x); });
}

void require_finite(const Matrix& m, const char* what) {
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!std::isfinite(m.data()[i])) {
      std::ostringstream os;
      os << what << ": non-finite entry " << m.data()[i] << " at (" << i / m.cols()
         << ", " << i % m.cols() << ")";
      throw NumericError(os.str());
    }
  }
}

namespace {

constexpr double kJacobiTol = 1e-15;
constexpr int kMaxSweeps = 80;

// Hestenes one-sided Jacobi on a tall matrix held as n columns of length m.
// On return cols[j] = sigma_j u_j and v holds the accumulated rotations.
void hestenes(std::vector<std::vector<double>>& cols, std::vector<std::vector<double>>& v) {
  const std::size_t n = cols.size();
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        auto& ap = cols[p];
        auto& aq = cols[q];
        const double alpha = dot(ap, ap);
        const double beta = dot(aq, aq);
        const double gamma = dot(ap, aq);
        if (gamma == 0.0 || std::abs(gamma) <= kJacobiTol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < ap.size(); ++i) {
          const double x = ap[i];
          const double y = aq[i];
          ap[i] = c * x - s * y;
          aq[i] = s * x + c * y;
        }
        auto& vp = v[p];
        auto& vq = v[q];
        for (std::size_t i = 0; i < vp.size(); ++i) {
          const double x = vp[i];
          const double y = vq[i];
          vp[i] = c * x - s * y;
          vq[i] = s * x + c * y;
        }
      }
    }
    if (!rotated) return;
  }
}

// SVD of a matrix with rows >= cols.
SvdResult svd_tall(const Matrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  std::vector<std::vector<double>> cols(n, std::vector<double>(m));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) cols[j][i] = a(i, j);
  std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) v[j][j] = 1.0;

  hestenes(cols, v);

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) sigma[j] = norm2(cols[j]);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  SvdResult out{Matrix(m, n), std::vector<double>(n), Matrix(n, n)};
  std::vector<std::vector<double>> u;
  u.reserve(n);
  std::vector<bool> needs_completion(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    out.s[k] = sigma[j];
    std::vector<double> uk(m, 0.0);
    if (sigma[j] > 0.0) {
      for (std::size_t i = 0; i < m; ++i) uk[i] = cols[j][i] / sigma[j];
    } else {
      needs_completion[k] = true;
    }
    u.push_back(std::move(uk));
    for (std::size_t i = 0; i < n; ++i) out.vt(k, i) = v[j][i];
  }

  // Complete left vectors of zero singular values against e_0, e_1, ...
  std::size_t next_e = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (!needs_completion[k]) continue;
    while (next_e < m) {
      std::vector<double> cand(m, 0.0);
      cand[next_e++] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t o = 0; o < n; ++o) {
          if (o == k || (needs_completion[o] && o > k)) continue;
          const double proj = dot(cand, u[o]);
          for (std::size_t i = 0; i < m; ++i) cand[i] -= proj * u[o][i];
        }
      }
      const double nrm = norm2(cand);
      if (nrm > 0.5) {
        for (double& x : cand) x /= nrm;
        u[k] = std::move(cand);
        break;
      }
    }
  }

  for (std::size_t k = 0; k < n; ++k) out.u.set_col(k, u[k]);
  return out;
}

void normalize_signs(SvdResult& r) {
  for (std::size_t k = 0; k < r.u.cols(); ++k) {
    std::size_t best = 0;
    double best_abs = -1.0;
    for (std::size_t i = 0; i < r.u.rows(); ++i) {
      const double a = std::abs(r.u(i, k));
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    if (r.u(best, k) < 0.0) {
      for (std::size_t i = 0; i < r.u.rows(); ++i) r.u(i, k) = -r.u(i, k);
      for (std::size_t j = 0; j < r.vt.cols(); ++j) r.vt(k, j) = -r.vt(k, j);
    }
  }
}

}  // namespace

SvdResult svd(const Matrix& m) {
  if (m.empty()) throw ValidationError("svd: empty matrix");
  require_finite(m, "svd");
  SvdResult r;
  if (m.rows() >= m.cols()) {
    r = svd_tall(m);
  } else {
    SvdResult t = svd_tall(m.transpose());
    r.u = t.vt.transpose();
    r.s = std::move(t.s);
    r.vt = t.u.transpose();
  }
  normalize_signs(r);
  return r;
}

std::size_t rank_cutoff(std::span<const double> s, double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw ValidationError("rank_cutoff: epsilon " + std::to_string(epsilon) +
                          " outside (0, 1]");
  if (s.empty()) throw ValidationError("rank_cutoff: empty singular values");
  double total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(s[i] >= 0.0) || !std::isfinite(s[i]))
      throw ValidationError("rank_cutoff: invalid singular value at " + std::to_string(i));
    if (i > 0 && s[i] > s[i - 1])
      throw ValidationError("rank_cutoff: singular values not non-increasing at " +
                            std::to_string(i));
    total += s[i] * s[i];
  }
  if (total == 0.0) throw ValidationError("rank_cutoff: all singular values are zero");
  const double target = epsilon * total;
  double cum = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    cum += s[k] * s[k];
    if (cum >= target) return k + 1;
  }
  return s.size();
}

double orthonormality_defect(const Matrix& basis) {
  const Matrix g = matmul_tn(basis, basis);
  double d = 0.0;
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j)
      d = std::max(d, std::abs(g(i, j) - (i == j ? 1.0 : 0.0)));
  return d;
}

Matrix null_projector(const Matrix& basis) {
  require_finite(basis, "null_projector");
  const double defect = orthonormality_defect(basis);
  if (defect > 1e-8) {
    std::ostringstream os;
    os << "null_projector: basis not orthonormal, max |B^T B - I| = " << defect;
    throw ValidationError(os.str());
  }
  const std::size_t n = basis.rows();
  Matrix p(n, n);
  // A basis of the whole space leaves no complement; skip the rounding noise.
  if (basis.cols() >= n) return p;
  for (std::size_t i = 0; i < n; ++i) {
    auto bi = basis.row(i);
    for (std::size_t j = i; j < n; ++j) {
      const double v = (i == j ? 1.0 : 0.0) - dot(bi, basis.row(j));
      p(i, j) = v;
      p(j, i) = v;
    }
  }
  return p;
}

Matrix apply_projection(const Matrix& grad, const Matrix& p) {
  if (p.rows() != p.cols() || grad.cols() != p.rows())
    throw ValidationError("apply_projection: gradient " + shape(grad) + " vs projector " +
                          shape(p));
  return matmul(grad, p);
}

}  // namespace unsc
