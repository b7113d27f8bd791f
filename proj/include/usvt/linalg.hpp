// Copyright 2026 The usvt Authors.
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

// Dense linear-algebra kernels: SVD, matrix norms, numerical rank.
//
// The SVD is Eigen's divide-and-conquer bidiagonal solver (BDCSVD), which
// falls back to one-sided Jacobi for small blocks. Both are deterministic for
// a fixed input and build; no routine here uses threads.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "usvt/error.hpp"

namespace usvt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Relative tolerance used by numerical_rank when the caller has no opinion.
inline constexpr double kDefaultRankTolerance = 1e-10;

struct SvdFactorization {
  Vector singular_values;  // descending, nonnegative, min(rows, cols) of them
  Matrix left;             // rows x k, orthonormal columns
  Matrix right;            // cols x k, orthonormal columns

  Eigen::Index rank_capacity() const { return singular_values.size(); }

  Matrix reconstruct() const {
    return left * singular_values.asDiagonal() * right.transpose();
  }
};

namespace detail {

inline void require_finite(const Matrix& a, const char* where) {
  if (a.rows() == 0 || a.cols() == 0) {
    throw ValidationError(std::string(where) + ": matrix must have positive dimensions");
  }
  if (!a.allFinite()) {
    throw ValidationError(std::string(where) + ": matrix has non-finite entries");
  }
}

template <typename Solver>
void require_converged(const Solver& solver, const char* where) {
  if (solver.info() != Eigen::Success) {
    throw NumericalError(std::string(where) + ": decomposition did not converge");
  }
}

}  // namespace detail

inline SvdFactorization svd(const Matrix& a) {
  detail::require_finite(a, "svd");
  Eigen::BDCSVD<Matrix> solver(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  detail::require_converged(solver, "svd");
  return SvdFactorization{solver.singularValues(), solver.matrixU(), solver.matrixV()};
}

// Singular values only, descending. Cheaper than svd() when vectors are not
// needed.
inline Vector singular_values(const Matrix& a) {
  detail::require_finite(a, "singular_values");
  Eigen::BDCSVD<Matrix> solver(a);
  detail::require_converged(solver, "singular_values");
  return solver.singularValues();
}

inline double nuclear_norm(const Matrix& a) { return singular_values(a).sum(); }

inline double spectral_norm(const Matrix& a) { return singular_values(a)(0); }

inline double frobenius_norm(const Matrix& a) {
  detail::require_finite(a, "frobenius_norm");
  return a.norm();
}

// Count of singular values strictly greater than tol * s_1; 0 for the zero
// matrix.
inline Eigen::Index numerical_rank(const Matrix& a, double tol = kDefaultRankTolerance) {
  if (!(tol >= 0.0)) throw ValidationError("numerical_rank: tolerance must be >= 0");
  const Vector s = singular_values(a);
  if (s(0) == 0.0) return 0;
  const double cut = tol * s(0);
  return static_cast<Eigen::Index>((s.array() > cut).count());
}

// Eigenvalues of a symmetric matrix, ascending. Only the lower triangle is
// read.
inline Vector symmetric_eigenvalues(const Matrix& a) {
  detail::require_finite(a, "symmetric_eigenvalues");
  if (a.rows() != a.cols()) throw ValidationError("symmetric_eigenvalues: matrix must be square");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a, Eigen::EigenvaluesOnly);
  detail::require_converged(solver, "symmetric_eigenvalues");
  return solver.eigenvalues();
}

inline bool is_symmetric(const Matrix& a) {
  if (a.rows() != a.cols()) return false;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = j + 1; i < a.rows(); ++i) {
      if (a(i, j) != a(j, i)) return false;
    }
  }
  return true;
}

inline bool is_symmetric(const Mask& a) {
  if (a.rows() != a.cols()) return false;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = j + 1; i < a.rows(); ++i) {
      if (a(i, j) != a(j, i)) return false;
    }
  }
  return true;
}

}  // namespace usvt
