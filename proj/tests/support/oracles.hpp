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


// Independent reference implementations used by the tests. None of these call
// into the library's decompositions.

#ifndef UNSC_TESTS_ORACLES_HPP_
#define UNSC_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "unsc/linalg.hpp"
#include "unsc/rng.hpp"

namespace unsc::oracle {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                            double scale = 1.0) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (auto& v : m.data()) v = scale * rng.normal();
  return m;
}

inline Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      long double acc = 0.0L;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += static_cast<long double>(a(i, k)) * b(k, j);
      c(i, j) = static_cast<double>(acc);
    }
  return c;
}

inline Matrix naive_transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

// Classical two-sided Jacobi on a symmetric matrix. Eigenvalues descending.
inline std::vector<double> symmetric_eigenvalues(Matrix a) {
  const std::size_t n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1.0 / std::sqrt(t * t + 1), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.rbegin(), ev.rend());
  return ev;
}

// Modified Gram-Schmidt over the columns; a column counts when its residual
// norm exceeds tol times its original norm.
inline std::size_t gram_schmidt_rank(const Matrix& m, double tol) {
  std::vector<std::vector<double>> q;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    std::vector<double> v = m.col(j);
    double n0 = 0.0;
    for (double x : v) n0 += x * x;
    n0 = std::sqrt(n0);
    if (n0 == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& u : q) {
        double d = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) d += u[i] * v[i];
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= d * u[i];
      }
    double n1 = 0.0;
    for (double x : v) n1 += x * x;
    n1 = std::sqrt(n1);
    if (n1 > tol * n0) {
      for (double& x : v) x /= n1;
      q.push_back(std::move(v));
    }
  }
  return q.size();
}

// Residual of the least-squares fit of v by the columns of a, relative to |v|.
// Solves the normal equations with Gaussian elimination (partial pivoting) on
// a column basis reduced by Gram-Schmidt first, so rank-deficient a is fine.
inline double span_residual(const Matrix& a, const std::vector<double>& v) {
  std::vector<std::vector<double>> q;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    std::vector<double> c = a.col(j);
    double n0 = 0.0;
    for (double x : c) n0 += x * x;
    n0 = std::sqrt(n0);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& u : q) {
        double d = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) d += u[i] * c[i];
        for (std::size_t i = 0; i < c.size(); ++i) c[i] -= d * u[i];
      }
    double n1 = 0.0;
    for (double x : c) n1 += x * x;
    n1 = std::sqrt(n1);
    if (n0 > 0.0 && n1 > 1e-12 * n0) {
      for (double& x : c) x /= n1;
      q.push_back(std::move(c));
    }
  }
  std::vector<double> r = v;
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& u : q) {
      double d = 0.0;
      for (std::size_t i = 0; i < r.size(); ++i) d += u[i] * r[i];
      for (std::size_t i = 0; i < r.size(); ++i) r[i] -= d * u[i];
    }
  double nr = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    nr += r[i] * r[i];
    nv += v[i] * v[i];
  }
  return nv == 0.0 ? 0.0 : std::sqrt(nr / nv);
}

// Direct nested-loop convolution. maps: (C*H*W) x B channel-major; weights:
// out_channels x (C*k*k + 1), last column bias. Output (OC*OH*OW) x B before
// activation.
inline Matrix naive_conv(const Matrix& maps, const Matrix& weights, std::size_t channels,
                         std::size_t height, std::size_t width, std::size_t kernel,
                         std::size_t stride) {
  const std::size_t oc = weights.rows();
  const std::size_t oh = (height - kernel) / stride + 1, ow = (width - kernel) / stride + 1;
  Matrix out(oc * oh * ow, maps.cols());
  for (std::size_t b = 0; b < maps.cols(); ++b)
    for (std::size_t o = 0; o < oc; ++o)
      for (std::size_t y = 0; y < oh; ++y)
        for (std::size_t x = 0; x < ow; ++x) {
          double acc = weights(o, channels * kernel * kernel);
          for (std::size_t c = 0; c < channels; ++c)
            for (std::size_t ky = 0; ky < kernel; ++ky)
              for (std::size_t kx = 0; kx < kernel; ++kx)
                acc += weights(o, (c * kernel + ky) * kernel + kx) *
                       maps((c * height + y * stride + ky) * width + x * stride + kx, b);
          out((o * oh + y) * ow + x, b) = acc;
        }
  return out;
}

struct SweepResult {
  double threshold;
  double balanced_accuracy;
};

// Tries every candidate threshold (each observed value and +inf) and scores
// it by counting; the largest threshold wins ties.
inline SweepResult brute_force_threshold(const std::vector<double>& members,
                                         const std::vector<double>& nonmembers) {
  std::vector<double> cands = members;
  cands.insert(cands.end(), nonmembers.begin(), nonmembers.end());
  cands.push_back(std::numeric_limits<double>::infinity());
  SweepResult best{0.0, -1.0};
  std::size_t best_score = 0;
  for (double t : cands) {
    std::size_t tp = 0, tn = 0;
    for (double c : members) tp += c >= t;
    for (double c : nonmembers) tn += c < t;
    // Integer form of the balanced accuracy, so equal scores compare equal.
    const std::size_t score = tp * nonmembers.size() + tn * members.size();
    if (best.balanced_accuracy < 0 || score > best_score ||
        (score == best_score && t > best.threshold)) {
      best_score = score;
      best = {t, 0.5 * (static_cast<double>(tp) / members.size() +
                        static_cast<double>(tn) / nonmembers.size())};
    }
  }
  return best;
}

// Perceptron run to convergence; true when it separates the two classes.
inline bool perceptron_separable(const Matrix& x, const std::vector<int>& y, int max_epochs) {
  std::vector<double> w(x.cols() + 1, 0.0);
  for (int e = 0; e < max_epochs; ++e) {
    bool clean = true;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const double t = y[i] == 1 ? 1.0 : -1.0;
      double s = w.back();
      for (std::size_t j = 0; j < x.cols(); ++j) s += w[j] * x(i, j);
      if (t * s <= 0.0) {
        clean = false;
        for (std::size_t j = 0; j < x.cols(); ++j) w[j] += t * x(i, j);
        w.back() += t;
      }
    }
    if (clean) return true;
  }
  return false;
}

}  // namespace unsc::oracle

#endif  // UNSC_TESTS_ORACLES_HPP_
