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

// Universal singular value thresholding.
//
// Given a partially observed data matrix X whose entries are independent,
// bounded, and centred on an unknown parameter matrix M, usvt_estimate()
// returns an estimate of M:
//
//   1. zero-fill unobserved entries to get Y (after mapping the value
//      interval [a, b] onto [-1, 1] and orienting Y so rows <= cols),
//   2. compute the SVD  Y = sum_i s_i u_i v_i^T,
//   3. p_hat = observed fraction (on and above the diagonal for the
//      symmetric and skew-symmetric models),
//   4. keep S = { i : s_i >= (2 + eta) sqrt(n p_hat) }, or the sharper
//      (2 + eta) sqrt(n q_hat) when a variance bound sigma^2 is known,
//   5. W = (1 / p_hat) sum_{i in S} s_i u_i v_i^T,
//   6. clip W entrywise to [-1, 1], then undo the interval map and the
//      orientation.
//
// The threshold needs no rank or structure information, which is what lets
// the same routine serve low-rank, blockmodel, distance, latent-space, PSD,
// graphon, and tournament matrices.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "usvt/error.hpp"
#include "usvt/linalg.hpp"

namespace usvt {

enum class SymmetryMode { kAsymmetric, kSymmetric, kSkewSymmetric };

inline std::string_view to_string(SymmetryMode mode) {
  switch (mode) {
    case SymmetryMode::kAsymmetric: return "asym";
    case SymmetryMode::kSymmetric: return "sym";
    case SymmetryMode::kSkewSymmetric: return "skew";
  }
  return "asym";
}

inline SymmetryMode parse_symmetry_mode(std::string_view name) {
  if (name == "asym" || name == "asymmetric") return SymmetryMode::kAsymmetric;
  if (name == "sym" || name == "symmetric") return SymmetryMode::kSymmetric;
  if (name == "skew" || name == "skew-symmetric") return SymmetryMode::kSkewSymmetric;
  throw ValidationError("unknown symmetry mode '" + std::string(name) + "'");
}

// Closed value range [lo, hi] known a priori for the entries of M and X.
struct Interval {
  double lo = -1.0;
  double hi = 1.0;

  double midpoint() const { return 0.5 * (lo + hi); }
  double half_width() const { return 0.5 * (hi - lo); }
  bool contains(double x) const { return x >= lo && x <= hi; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

// Data matrix with its observation mask. In the symmetric modes the mask
// must be symmetric; in Symmetric mode observed values must be too. In
// SkewSymmetric mode only X - M is skew, so X itself carries no sign
// constraint (tournament win fractions satisfy x_ji = 1 - x_ij).
struct MaskedMatrix {
  Matrix values;
  Mask mask;
  SymmetryMode mode = SymmetryMode::kAsymmetric;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }

  static MaskedMatrix fully_observed(Matrix values, SymmetryMode mode = SymmetryMode::kAsymmetric) {
    Mask mask = Mask::Constant(values.rows(), values.cols(), true);
    return MaskedMatrix{std::move(values), std::move(mask), mode};
  }

  MaskedMatrix transpose() const {
    return MaskedMatrix{values.transpose(), mask.transpose(), mode};
  }

  void validate() const {
    if (values.rows() == 0 || values.cols() == 0) {
      throw ValidationError("masked matrix must have positive dimensions");
    }
    if (mask.rows() != values.rows() || mask.cols() != values.cols()) {
      throw ValidationError("mask shape does not match value shape");
    }
    if (mode == SymmetryMode::kAsymmetric) return;
    if (values.rows() != values.cols()) {
      throw ValidationError(std::string(to_string(mode)) + " mode requires a square matrix");
    }
    if (!is_symmetric(mask)) {
      throw ValidationError(std::string(to_string(mode)) + " mode requires a symmetric mask");
    }
    if (mode == SymmetryMode::kSymmetric) {
      for (Eigen::Index j = 0; j < values.cols(); ++j) {
        for (Eigen::Index i = j + 1; i < values.rows(); ++i) {
          if (mask(i, j) && values(i, j) != values(j, i)) {
            throw ValidationError("sym mode requires symmetric observed values; (" +
                                  std::to_string(i) + "," + std::to_string(j) + ") differs");
          }
        }
      }
    }
  }
};

struct EstimatorConfig {
  // Threshold slack; no default, the caller must choose it up front.
  double eta = 0.0;
  // Known bound on Var(x_ij), on the normalized [-1, 1] scale.
  std::optional<double> sigma_sq;
  // Value range of M and X; [-1, 1] when absent.
  std::optional<Interval> interval;
  SymmetryMode mode = SymmetryMode::kAsymmetric;
  // eta = 0 is outside the proven regime; only for exploratory runs.
  bool allow_zero_eta = false;

  Interval effective_interval() const { return interval.value_or(Interval{}); }

  void validate() const {
    const bool eta_ok = allow_zero_eta ? (eta >= 0.0 && eta < 1.0) : (eta > 0.0 && eta < 1.0);
    if (!eta_ok) {
      throw ValidationError("eta must lie in (0, 1)" +
                            std::string(allow_zero_eta ? " or equal 0" : ""));
    }
    if (sigma_sq && !(*sigma_sq > 0.0 && *sigma_sq <= 1.0)) {
      throw ValidationError("sigma_sq must lie in (0, 1]");
    }
    if (interval) {
      if (!std::isfinite(interval->lo) || !std::isfinite(interval->hi) ||
          !(interval->lo < interval->hi)) {
        throw ValidationError("interval must satisfy a < b with finite endpoints");
      }
    }
  }
};

struct EstimateReport {
  Matrix estimate;
  double p_hat = 0.0;
  std::optional<double> q_hat;
  double threshold = 0.0;
  // 0-based positions in the descending singular values of Y.
  std::vector<Eigen::Index> retained_indices;
  Eigen::Index retained_rank = 0;
  // Size of the long side of Y, the n in the threshold.
  Eigen::Index n = 0;
  bool transposed = false;
  // No entry was observed; estimate is the interval midpoint everywhere.
  bool no_data = false;
  // Singular values of the normalized, oriented Y.
  Vector singular_values;
};

inline double variance_adjusted_fraction(double p_hat, double sigma_sq) {
  return p_hat * sigma_sq + p_hat * (1.0 - p_hat) * (1.0 - sigma_sq);
}

inline double threshold_value(Eigen::Index n, double p_hat, double eta,
                              std::optional<double> sigma_sq = std::nullopt) {
  const double frac = sigma_sq ? variance_adjusted_fraction(p_hat, *sigma_sq) : p_hat;
  return (2.0 + eta) * std::sqrt(static_cast<double>(n) * frac);
}

inline Matrix clip_to_interval(const Matrix& a, double lo, double hi) {
  if (!(lo < hi)) throw ValidationError("clip_to_interval: need lo < hi");
  return a.cwiseMax(lo).cwiseMin(hi);
}

namespace detail {

struct PreparedData {
  Matrix y;  // normalized, zero-filled, oriented rows <= cols
  double p_hat = 0.0;
  bool transposed = false;
};

inline double observed_fraction(const Mask& mask, SymmetryMode mode) {
  if (mode == SymmetryMode::kAsymmetric) {
    return static_cast<double>(mask.count()) / static_cast<double>(mask.size());
  }
  const Eigen::Index n = mask.rows();
  Eigen::Index observed = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) observed += mask(i, j) ? 1 : 0;
  }
  return static_cast<double>(observed) / (0.5 * static_cast<double>(n) * static_cast<double>(n + 1));
}

inline PreparedData prepare(const MaskedMatrix& data, const EstimatorConfig& config) {
  config.validate();
  data.validate();
  if (data.mode != config.mode) {
    throw ValidationError("data mode '" + std::string(to_string(data.mode)) +
                          "' does not match estimator mode '" +
                          std::string(to_string(config.mode)) + "'");
  }
  const Interval iv = config.effective_interval();
  const double centre = iv.midpoint();
  const double scale = iv.half_width();

  Matrix y = Matrix::Zero(data.rows(), data.cols());
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
      if (!data.mask(i, j)) continue;
      const double x = data.values(i, j);
      if (!std::isfinite(x) || !iv.contains(x)) {
        throw ValidationError("observed value at (" + std::to_string(i) + "," + std::to_string(j) +
                              ") lies outside the declared interval [" + std::to_string(iv.lo) +
                              ", " + std::to_string(iv.hi) + "]");
      }
      y(i, j) = (x - centre) / scale;
    }
  }

  PreparedData out;
  out.p_hat = observed_fraction(data.mask, data.mode);
  out.transposed = y.rows() > y.cols();
  out.y = out.transposed ? Matrix(y.transpose()) : std::move(y);
  return out;
}

inline Matrix restore(Matrix normalized, const Interval& iv, bool transposed) {
  normalized = (normalized.array() * iv.half_width() + iv.midpoint()).matrix();
  // Exact clamp so that roundoff in the back-map cannot leave the interval.
  normalized = normalized.cwiseMax(iv.lo).cwiseMin(iv.hi);
  if (transposed) return normalized.transpose();
  return normalized;
}

}  // namespace detail

inline EstimateReport usvt_estimate(const MaskedMatrix& data, const EstimatorConfig& config) {
  detail::PreparedData prepared = detail::prepare(data, config);
  const Interval iv = config.effective_interval();

  EstimateReport report;
  report.p_hat = prepared.p_hat;
  report.transposed = prepared.transposed;
  report.n = prepared.y.cols();

  if (prepared.p_hat == 0.0) {
    report.no_data = true;
    report.threshold = 0.0;
    report.estimate = Matrix::Constant(data.rows(), data.cols(), iv.midpoint());
    return report;
  }

  if (config.sigma_sq) report.q_hat = variance_adjusted_fraction(prepared.p_hat, *config.sigma_sq);
  report.threshold = threshold_value(report.n, prepared.p_hat, config.eta, config.sigma_sq);

  const SvdFactorization f = svd(prepared.y);
  report.singular_values = f.singular_values;
  for (Eigen::Index i = 0; i < f.singular_values.size(); ++i) {
    if (f.singular_values(i) >= report.threshold) report.retained_indices.push_back(i);
  }
  report.retained_rank = static_cast<Eigen::Index>(report.retained_indices.size());

  // Singular values are sorted, so S is a leading block.
  const Eigen::Index r = report.retained_rank;
  Matrix w = Matrix::Zero(prepared.y.rows(), prepared.y.cols());
  if (r > 0) {
    w.noalias() = f.left.leftCols(r) *
                  (f.singular_values.head(r) / prepared.p_hat).asDiagonal() *
                  f.right.leftCols(r).transpose();
  }
  w = w.cwiseMax(-1.0).cwiseMin(1.0);
  report.estimate = detail::restore(std::move(w), iv, prepared.transposed);
  return report;
}

// The raw-data baseline: Y / p_hat clipped to the interval, so unobserved
// entries sit at the midpoint when p_hat = 1 and observed ones are X itself.
inline Matrix trivial_estimate(const MaskedMatrix& data, const EstimatorConfig& config) {
  detail::PreparedData prepared = detail::prepare(data, config);
  const Interval iv = config.effective_interval();
  if (prepared.p_hat == 0.0) return Matrix::Constant(data.rows(), data.cols(), iv.midpoint());
  Matrix w = (prepared.y / prepared.p_hat).cwiseMax(-1.0).cwiseMin(1.0);
  return detail::restore(std::move(w), iv, prepared.transposed);
}

// Constant of the deterministic perturbation bound
//   ||B_hat - B||_F <= K(delta) (||A - B|| ||B||_*)^{1/2}.
inline double key_lemma_constant(double delta) {
  if (!(delta > 0.0)) throw ValidationError("key_lemma_constant: delta must be positive");
  return (4.0 + 2.0 * delta) * std::sqrt(2.0 / delta) + std::sqrt(2.0 + delta);
}

// B_hat = sum over sigma_i(A) > (1 + delta) ||A - B|| of sigma_i x_i y_i^T,
// the truncation of A that the bound above controls.
inline Matrix key_lemma_estimate(const Matrix& a, const Matrix& b, double delta) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ValidationError("key_lemma_estimate: A and B must have the same shape");
  }
  if (!(delta > 0.0)) throw ValidationError("key_lemma_estimate: delta must be positive");
  const double cut = (1.0 + delta) * spectral_norm(a - b);
  const SvdFactorization f = svd(a);
  Eigen::Index r = 0;
  while (r < f.singular_values.size() && f.singular_values(r) > cut) ++r;
  if (r == 0) return Matrix::Zero(a.rows(), a.cols());
  return f.left.leftCols(r) * f.singular_values.head(r).asDiagonal() *
         f.right.leftCols(r).transpose();
}

}  // namespace usvt
