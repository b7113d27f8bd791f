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

// Error metrics, constant-free rate brackets, parametric-bootstrap MSE,
// random-matrix concentration trials, and log-log rate fits.
//
// Brackets drop the unspecified constants of the corresponding rate
// theorems. Compare them with measured MSE through slopes, never through
// absolute ratios.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "usvt/error.hpp"
#include "usvt/estimator.hpp"
#include "usvt/generators.hpp"
#include "usvt/linalg.hpp"
#include "usvt/rng.hpp"

namespace usvt {

// Mean squared error per entry.
inline double mse(const Matrix& estimate, const Matrix& truth) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
    throw ValidationError("mse: shapes differ");
  }
  if (estimate.size() == 0) throw ValidationError("mse: empty matrices");
  return (estimate - truth).squaredNorm() / static_cast<double>(estimate.size());
}

// ---------------------------------------------------------------------------
// Brackets

struct BoundBracket {
  double term_nuclear = 0.0;     // ||M||_* / (m sqrt(n p))
  double term_nuclear_sq = 0.0;  // ||M||_*^2 / (m n)
  double term_one = 1.0;
  double bracket = 0.0;          // min of the three
  // n p < 20: the additive exp(-c n p) term may not be negligible.
  bool exponential_term_flag = false;
  // Known-variance variant: ||M||_* sqrt(q) / (m sqrt(n) p) replaces the
  // first term, q = p sigma^2 + p (1 - p)(1 - sigma^2).
  std::optional<double> term_nuclear_variance;
  std::optional<double> bracket_variance;
};

// From a precomputed nuclear norm of an m x n matrix (oriented internally so
// m <= n). The underlying guarantee assumes p >= n^{-1 + epsilon}.
inline BoundBracket mainest_bracket_from_norm(double nuclear, Eigen::Index rows, Eigen::Index cols,
                                              double p, std::optional<double> sigma_sq = std::nullopt) {
  if (!(p > 0.0 && p <= 1.0)) throw ValidationError("mainest_bracket: p must lie in (0, 1]");
  if (!(nuclear >= 0.0)) throw ValidationError("mainest_bracket: nuclear norm must be >= 0");
  if (sigma_sq && !(*sigma_sq > 0.0 && *sigma_sq <= 1.0)) {
    throw ValidationError("mainest_bracket: sigma_sq must lie in (0, 1]");
  }
  const double m = static_cast<double>(std::min(rows, cols));
  const double n = static_cast<double>(std::max(rows, cols));
  BoundBracket b;
  b.term_nuclear = nuclear / (m * std::sqrt(n * p));
  b.term_nuclear_sq = nuclear * nuclear / (m * n);
  b.bracket = std::min({b.term_nuclear, b.term_nuclear_sq, b.term_one});
  b.exponential_term_flag = n * p < 20.0;
  if (sigma_sq) {
    const double q = variance_adjusted_fraction(p, *sigma_sq);
    b.term_nuclear_variance = nuclear * std::sqrt(q) / (m * std::sqrt(n) * p);
    b.bracket_variance = std::min({*b.term_nuclear_variance, b.term_nuclear_sq, b.term_one});
  }
  return b;
}

inline BoundBracket mainest_bracket(const Matrix& m, double p, std::optional<double> sigma_sq = std::nullopt) {
  return mainest_bracket_from_norm(nuclear_norm(m), m.rows(), m.cols(), p, sigma_sq);
}

// Covering number N(delta) of the metric space by delta-balls.
using CoveringNumber = std::function<double(double)>;

// inf over delta of min{(delta + sqrt(N(delta/4)/n)) / sqrt(p), 1}, taken
// over 50 log-spaced delta in [1/n, 1].
inline double distance_bracket(Eigen::Index n, double p, const CoveringNumber& covering) {
  if (n < 1) throw ValidationError("distance_bracket: need n >= 1");
  if (!(p > 0.0 && p <= 1.0)) throw ValidationError("distance_bracket: p must lie in (0, 1]");
  constexpr int kGrid = 50;
  const double nd = static_cast<double>(n);
  const double log_lo = -std::log(nd);
  double best = 1.0;
  double previous_cover = std::numeric_limits<double>::infinity();
  for (int k = 0; k < kGrid; ++k) {
    const double delta = std::exp(log_lo * (1.0 - static_cast<double>(k) / (kGrid - 1)));
    const double cover = covering(delta / 4.0);
    if (!(cover >= 0.0) || cover > previous_cover) {
      throw ValidationError("distance_bracket: covering number must be nonnegative and nonincreasing");
    }
    previous_cover = cover;
    best = std::min(best, (delta + std::sqrt(cover / nd)) / std::sqrt(p));
  }
  return best;
}

// n^{-1/(dim+2)} / sqrt(p), Lipschitz latent-space rate.
inline double lipschitz_latent_bracket(Eigen::Index n, double p, Eigen::Index dim) {
  if (n < 1 || dim < 1 || !(p > 0.0 && p <= 1.0)) throw ValidationError("lipschitz_latent_bracket: bad arguments");
  return std::pow(static_cast<double>(n), -1.0 / static_cast<double>(dim + 2)) / std::sqrt(p);
}

// n^{-1/4} / sqrt(p), nonparametric Bradley-Terry rate.
inline double bradley_bracket(Eigen::Index n, double p) {
  if (n < 1 || !(p > 0.0 && p <= 1.0)) throw ValidationError("bradley_bracket: bad arguments");
  return std::pow(static_cast<double>(n), -0.25) / std::sqrt(p);
}

// 1 / sqrt(n p), PSD rate.
inline double psd_bracket(Eigen::Index n, double p) {
  if (n < 1 || !(p > 0.0 && p <= 1.0)) throw ValidationError("psd_bracket: bad arguments");
  return 1.0 / std::sqrt(static_cast<double>(n) * p);
}

// min{sqrt(r / (m p)), 1}, rank-r rate.
inline double lowrank_bracket(Eigen::Index m, Eigen::Index r, double p) {
  if (m < 1 || r < 0 || !(p > 0.0 && p <= 1.0)) throw ValidationError("lowrank_bracket: bad arguments");
  return std::min(std::sqrt(static_cast<double>(r) / (static_cast<double>(m) * p)), 1.0);
}

// sqrt(k / n), blockmodel rate.
inline double blockmodel_bracket(Eigen::Index n, Eigen::Index k) {
  if (n < 1 || k < 1) throw ValidationError("blockmodel_bracket: bad arguments");
  return std::sqrt(static_cast<double>(k) / static_cast<double>(n));
}

// (1 - p)^{floor(m / r)}, rank-r lower bound.
inline double lowrank_lower(Eigen::Index m, Eigen::Index r, double p) {
  if (m < 1 || r < 1 || r > m || !(p >= 0.0 && p <= 1.0)) throw ValidationError("lowrank_lower: bad arguments");
  return std::pow(1.0 - p, static_cast<double>(m / r));
}

// min{delta / (m sqrt(n p)), delta^2 / (m n), 1}, minimax lower rate over
// ||M||_* <= delta.
inline double minimax_bracket(double delta, Eigen::Index m, Eigen::Index n, double p) {
  return mainest_bracket_from_norm(delta, m, n, p).bracket;
}

// ---------------------------------------------------------------------------
// Parametric bootstrap

enum class ResampleModel {
  kBernoulliRound,  // x_ij in {a, b} with mean m_hat_ij
  kExactMean,       // x_ij = m_hat_ij
};

// Draws a data set with mean `truth` inside `iv` and observation rate p.
// Skew mode mirrors each upper draw as a + b - x and observes the diagonal,
// matching tournament data.
inline MaskedMatrix resample_data(const Matrix& truth, double p, SymmetryMode mode, const Interval& iv,
                                  ResampleModel model, Seed seed) {
  const Eigen::Index rows = truth.rows();
  const Eigen::Index cols = truth.cols();
  if (!(truth.array() >= iv.lo).all() || !(truth.array() <= iv.hi).all()) {
    throw ValidationError("resample_data: truth lies outside the interval");
  }
  MaskedMatrix data{truth, bernoulli_mask(rows, cols, p, mode, derive_seed(seed, {0})), mode};
  if (model == ResampleModel::kBernoulliRound) {
    const double width = iv.hi - iv.lo;
    Rng rng(derive_seed(seed, {1}));
    auto draw = [&](double mean) {
      return rng.bernoulli((mean - iv.lo) / width) ? iv.hi : iv.lo;
    };
    if (mode == SymmetryMode::kAsymmetric) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) data.values(i, j) = draw(truth(i, j));
      }
    } else {
      for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < j; ++i) {
          const double v = draw(truth(i, j));
          data.values(i, j) = v;
          data.values(j, i) = mode == SymmetryMode::kSymmetric ? v : iv.lo + iv.hi - v;
        }
        data.values(j, j) = mode == SymmetryMode::kSymmetric ? draw(truth(j, j)) : truth(j, j);
      }
    }
  }
  if (mode == SymmetryMode::kSkewSymmetric) {
    for (Eigen::Index i = 0; i < rows; ++i) data.mask(i, i) = true;
  }
  return data;
}

// Parametric-bootstrap MSE: treat `estimate` as the truth, draw K synthetic
// data sets, re-estimate, and average ||M_hat^(i) - M_hat||_F^2 / (m n).
//
// This is a diagnostic, not a guarantee. No data-only procedure can tell in
// general whether a nontrivial estimator's MSE is small; the bootstrap value
// is trustworthy only when the estimate is already known (from assumptions
// on ||M||_*) to be accurate.
inline double bootstrap_mse(const Matrix& estimate, double p, SymmetryMode mode,
                            const EstimatorConfig& config, int resamples, Seed seed,
                            ResampleModel model) {
  if (resamples < 1) throw ValidationError("bootstrap_mse: need at least one resample");
  if (config.mode != mode) throw ValidationError("bootstrap_mse: mode does not match config");
  const Interval iv = config.effective_interval();
  double total = 0.0;
  for (int k = 0; k < resamples; ++k) {
    const MaskedMatrix data =
        resample_data(estimate, p, mode, iv, model, derive_seed(seed, {static_cast<std::uint64_t>(k)}));
    total += mse(usvt_estimate(data, config).estimate, estimate);
  }
  return total / resamples;
}

// ---------------------------------------------------------------------------
// Spectral-norm concentration

enum class EntryLaw {
  kUniform,           // Uniform[-1, 1], variance 1/3
  kRademacher,        // +-1, variance 1
  kSparseRademacher,  // +-1 with probability q, else 0; variance q
};

struct EntryDistribution {
  EntryLaw law = EntryLaw::kUniform;
  double density = 1.0;  // q for kSparseRademacher

  double variance() const {
    switch (law) {
      case EntryLaw::kUniform: return 1.0 / 3.0;
      case EntryLaw::kRademacher: return 1.0;
      case EntryLaw::kSparseRademacher: return density;
    }
    return 1.0;
  }

  double draw(Rng& rng) const {
    switch (law) {
      case EntryLaw::kUniform: return rng.uniform(-1.0, 1.0);
      case EntryLaw::kRademacher: return rng.rademacher();
      case EntryLaw::kSparseRademacher: return rng.bernoulli(density) ? rng.rademacher() : 0.0;
    }
    return 0.0;
  }
};

struct ConcentrationResult {
  double fraction = 0.0;  // share of trials with ||A|| <= bound
  int successes = 0;
  int trials = 0;
  double bound = 0.0;     // (2 + eta) sigma sqrt(n)
  double max_norm = 0.0;
};

inline Matrix random_noise_matrix(Eigen::Index n, const EntryDistribution& dist, SymmetryMode mode,
                                  Rng& rng) {
  Matrix a(n, n);
  if (mode == SymmetryMode::kAsymmetric) {
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) a(i, j) = dist.draw(rng);
    }
    return a;
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      if (mode == SymmetryMode::kSkewSymmetric && i == j) {
        a(i, i) = 0.0;
        continue;
      }
      const double v = dist.draw(rng);
      a(i, j) = v;
      a(j, i) = mode == SymmetryMode::kSymmetric ? v : -v;
    }
  }
  return a;
}

// Fraction of n x n random matrices (independent entries on and above the
// diagonal in the symmetric modes) whose spectral norm stays below
// (2 + eta) sigma sqrt(n). Requires sigma^2 >= n^{-0.9}.
inline ConcentrationResult spectral_concentration_trial(Eigen::Index n, const EntryDistribution& dist,
                                                        SymmetryMode mode, double eta, int trials,
                                                        Seed seed) {
  if (n < 1 || trials < 1) throw ValidationError("spectral_concentration_trial: need n, trials >= 1");
  if (!(eta >= 0.0 && eta < 1.0)) throw ValidationError("spectral_concentration_trial: eta must lie in [0, 1)");
  const double sigma_sq = dist.variance();
  if (!(sigma_sq > 0.0 && sigma_sq <= 1.0)) {
    throw ValidationError("spectral_concentration_trial: variance must lie in (0, 1]");
  }
  if (sigma_sq < std::pow(static_cast<double>(n), -0.9)) {
    throw ValidationError("spectral_concentration_trial: sigma^2 below n^{-0.9}");
  }
  ConcentrationResult out;
  out.trials = trials;
  out.bound = (2.0 + eta) * std::sqrt(sigma_sq * static_cast<double>(n));
  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(t)}));
    const Matrix a = random_noise_matrix(n, dist, mode, rng);
    double norm;
    if (mode == SymmetryMode::kSymmetric) {
      const Vector ev = symmetric_eigenvalues(a);
      norm = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
    } else {
      norm = spectral_norm(a);
    }
    out.max_norm = std::max(out.max_norm, norm);
    if (norm <= out.bound) ++out.successes;
  }
  out.fraction = static_cast<double>(out.successes) / trials;
  return out;
}

// ---------------------------------------------------------------------------
// Rate fits

struct RateFit {
  std::vector<double> ns;
  std::vector<double> mses;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

// Least squares of log(mse) on log(n).
inline RateFit rate_fit(std::span<const double> ns, std::span<const double> mses) {
  if (ns.size() != mses.size()) throw ValidationError("rate_fit: grid and values differ in length");
  if (ns.size() < 3) throw ValidationError("rate_fit: need at least 3 grid points");
  const std::size_t k = ns.size();
  std::vector<double> x(k), y(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (!(ns[i] > 0.0) || !(mses[i] > 0.0)) throw ValidationError("rate_fit: values must be positive");
    x[i] = std::log(ns[i]);
    y[i] = std::log(mses[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(k);
  my /= static_cast<double>(k);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw ValidationError("rate_fit: grid sizes must not all coincide");
  RateFit fit;
  fit.ns.assign(ns.begin(), ns.end());
  fit.mses.assign(mses.begin(), mses.end());
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (syy == 0.0) {
    fit.r_squared = 1.0;
  } else {
    double ss_res = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double r = y[i] - (fit.intercept + fit.slope * x[i]);
      ss_res += r * r;
    }
    fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  }
  return fit;
}

}  // namespace usvt
