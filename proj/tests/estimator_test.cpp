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

#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"
#include "usvt/error.hpp"
#include "usvt/estimator.hpp"
#include "usvt/evaluation.hpp"
#include "usvt/generators.hpp"

namespace usvt {
namespace {

using testing::random_matrix;

EstimatorConfig config_with(double eta, SymmetryMode mode = SymmetryMode::kAsymmetric) {
  EstimatorConfig c;
  c.eta = eta;
  c.mode = mode;
  return c;
}

// 200 x 200 rank-2 matrix 90 u v^T + 60 w z^T with orthonormal pairs of
// +-1/sqrt(200) vectors, so the singular values are exactly 90 and 60.
Matrix rank_two_fixture() {
  const Eigen::Index n = 200;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  Vector u = Vector::Constant(n, scale), v = Vector::Constant(n, scale), w(n), z(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    w(i) = (i % 2 == 0 ? 1.0 : -1.0) * scale;
    z(i) = ((i / 2) % 2 == 0 ? 1.0 : -1.0) * scale;
  }
  return 90.0 * u * v.transpose() + 60.0 * w * z.transpose();
}

MaskedMatrix random_masked(Eigen::Index rows, Eigen::Index cols, double p, std::uint64_t seed) {
  MaskedMatrix d{random_matrix(rows, cols, seed), bernoulli_mask(rows, cols, p, SymmetryMode::kAsymmetric, Seed{seed + 7}),
                 SymmetryMode::kAsymmetric};
  return d;
}

TEST(ThresholdValue, Arithmetic) {
  EXPECT_NEAR(threshold_value(100, 1.0, 0.01), 20.1, 1e-12);
  EXPECT_NEAR(variance_adjusted_fraction(0.5, 0.0), 0.25, 1e-15);
  EXPECT_NEAR(threshold_value(100, 0.5, 0.01, 0.0), 10.05, 1e-12);
  for (double p : {0.05, 0.3, 0.77, 1.0}) {
    EXPECT_DOUBLE_EQ(variance_adjusted_fraction(p, 1.0), p);
    EXPECT_NEAR(threshold_value(321, p, 0.2, 1.0), threshold_value(321, p, 0.2), 1e-12);
  }
}

TEST(ClipToInterval, Cases) {
  Matrix a(1, 3);
  a << -0.5, 0.0, 0.9;
  EXPECT_EQ(clip_to_interval(a, -1.0, 1.0), a);
  Matrix b(1, 1);
  b << 3.0;
  EXPECT_EQ(clip_to_interval(b, -1.0, 1.0)(0, 0), 1.0);
  b << -7.0;
  EXPECT_EQ(clip_to_interval(b, 0.0, 1.0)(0, 0), 0.0);
  EXPECT_THROW(clip_to_interval(b, 1.0, 1.0), ValidationError);
}

TEST(KeyLemmaConstant, Values) {
  EXPECT_NEAR(key_lemma_constant(2.0), 10.0, 1e-12);
  EXPECT_NEAR(key_lemma_constant(0.5), 10.0 + std::sqrt(2.5), 1e-12);
  EXPECT_NEAR(key_lemma_constant(0.5), 11.5811, 1e-4);
  EXPECT_THROW(key_lemma_constant(0.0), ValidationError);
}

TEST(KeyLemmaConstant, Asymptote) {
  // K(d) / (2 sqrt(2d) + sqrt(d)) -> 1, and K grows for large d.
  double previous_gap = INFINITY;
  double previous_k = key_lemma_constant(4.0);
  for (double d = 8.0; d <= 1e8; d *= 2.0) {
    const double k = key_lemma_constant(d);
    const double gap = std::abs(k / ((2.0 * std::sqrt(2.0) + 1.0) * std::sqrt(d)) - 1.0);
    EXPECT_LT(gap, previous_gap);
    EXPECT_GT(k, previous_k);
    previous_gap = gap;
    previous_k = k;
  }
  EXPECT_LT(previous_gap, 1e-3);
}

TEST(KeyLemmaEstimate, ZeroPerturbation) {
  const Matrix a = testing::random_product(8, 11, 3, 21);
  EXPECT_LE((key_lemma_estimate(a, a, 1.0) - a).norm(), 1e-12 * a.norm());
}

TEST(KeyLemmaEstimate, ZeroTarget) {
  const Matrix a = random_matrix(6, 9, 22);
  EXPECT_EQ(key_lemma_estimate(a, Matrix::Zero(6, 9), 1.0), Matrix::Zero(6, 9));
}

TEST(KeyLemmaEstimate, InequalityAgainstOracle) {
  for (int c = 0; c < 50; ++c) {
    const Matrix b = testing::random_product(15, 20, 1 + c % 4, 1000 + 2 * c);
    const Matrix a = b + random_matrix(15, 20, 3000 + c, 0.05);
    const double delta = c % 3 == 0 ? 0.5 : (c % 3 == 1 ? 1.0 : 2.0);
    // Oracle: Jacobi SVD of A truncated independently.
    Eigen::JacobiSVD<Matrix> jac(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::JacobiSVD<Matrix> jac_diff(a - b);
    const double gap = jac_diff.singularValues()(0);
    Matrix oracle = Matrix::Zero(15, 20);
    for (Eigen::Index i = 0; i < jac.singularValues().size(); ++i) {
      if (jac.singularValues()(i) > (1 + delta) * gap) {
        oracle += jac.singularValues()(i) * jac.matrixU().col(i) * jac.matrixV().col(i).transpose();
      }
    }
    const Matrix bhat = key_lemma_estimate(a, b, delta);
    EXPECT_LE((bhat - oracle).norm(), 1e-9 * a.norm());
    const double nuc = testing::oracle_singular_values(b).sum();
    const double rhs = key_lemma_constant(delta) * std::sqrt(gap * nuc);
    EXPECT_LE((bhat - b).norm(), rhs * (1 + 1e-8) + 1e-8);
  }
}

TEST(Usvt, ZeroMatrix) {
  const auto r = usvt_estimate(MaskedMatrix::fully_observed(Matrix::Zero(10, 10)), config_with(0.01));
  EXPECT_EQ(r.estimate, Matrix::Zero(10, 10));
  EXPECT_TRUE(r.retained_indices.empty());
  EXPECT_EQ(r.retained_rank, 0);
  EXPECT_NEAR(r.threshold, 2.01 * std::sqrt(10.0), 1e-12);
}

TEST(Usvt, AllOnes) {
  const Matrix ones = Matrix::Ones(100, 100);
  const auto r = usvt_estimate(MaskedMatrix::fully_observed(ones), config_with(0.01));
  EXPECT_NEAR(r.threshold, 20.1, 1e-12);
  EXPECT_NEAR(r.singular_values(0), 100.0, 1e-10);
  ASSERT_EQ(r.retained_indices.size(), 1u);
  EXPECT_EQ(r.retained_indices[0], 0);
  EXPECT_LE((r.estimate - ones).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(mse(r.estimate, ones), 1e-24);
}

TEST(Usvt, NoObservations) {
  MaskedMatrix d{random_matrix(7, 5, 1), Mask::Constant(7, 5, false), SymmetryMode::kAsymmetric};
  const auto r = usvt_estimate(d, config_with(0.01));
  EXPECT_TRUE(r.no_data);
  EXPECT_EQ(r.p_hat, 0.0);
  EXPECT_EQ(r.threshold, 0.0);
  EXPECT_TRUE(r.retained_indices.empty());
  EXPECT_EQ(r.estimate, Matrix::Zero(7, 5));

  EstimatorConfig c = config_with(0.01);
  c.interval = Interval{2.0, 4.0};
  EXPECT_EQ(usvt_estimate(d, c).estimate, Matrix::Constant(7, 5, 3.0));
}

TEST(Usvt, ExactRecoveryRankTwo) {
  const Matrix m = rank_two_fixture();
  ASSERT_LE(m.cwiseAbs().maxCoeff(), 1.0);
  // Oracle SVD confirms the construction.
  Eigen::JacobiSVD<Matrix> oracle(m);
  EXPECT_NEAR(oracle.singularValues()(0), 90.0, 1e-9);
  EXPECT_NEAR(oracle.singularValues()(1), 60.0, 1e-9);
  EXPECT_LE(oracle.singularValues()(2), 1e-9);
  const double threshold = 2.01 * std::sqrt(200.0);
  EXPECT_GT(60.0, threshold);

  const auto r = usvt_estimate(MaskedMatrix::fully_observed(m), config_with(0.01));
  EXPECT_EQ(r.retained_rank, 2);
  EXPECT_LE((r.estimate - m).squaredNorm() / (200.0 * 200.0), 1e-6);
  EXPECT_LE((r.estimate - m).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Usvt, ObservedOutsideIntervalRejected) {
  Matrix v = Matrix::Zero(4, 4);
  v(2, 1) = 1.5;
  EXPECT_THROW(usvt_estimate(MaskedMatrix::fully_observed(v), config_with(0.01)), ValidationError);
  // The same value is ignored when unobserved.
  MaskedMatrix d = MaskedMatrix::fully_observed(v);
  d.mask(2, 1) = false;
  EXPECT_NO_THROW(usvt_estimate(d, config_with(0.01)));
}

TEST(Usvt, ConfigValidation) {
  const auto d = MaskedMatrix::fully_observed(Matrix::Zero(3, 3));
  EXPECT_THROW(usvt_estimate(d, config_with(0.0)), ValidationError);
  EXPECT_THROW(usvt_estimate(d, config_with(1.0)), ValidationError);
  EstimatorConfig zero = config_with(0.0);
  zero.allow_zero_eta = true;
  EXPECT_NO_THROW(usvt_estimate(d, zero));
  EstimatorConfig bad_sigma = config_with(0.1);
  bad_sigma.sigma_sq = 0.0;
  EXPECT_THROW(usvt_estimate(d, bad_sigma), ValidationError);
  EstimatorConfig bad_iv = config_with(0.1);
  bad_iv.interval = Interval{1.0, 1.0};
  EXPECT_THROW(usvt_estimate(d, bad_iv), ValidationError);
}

TEST(Usvt, ModeValidation) {
  EXPECT_THROW(usvt_estimate(MaskedMatrix::fully_observed(Matrix::Zero(3, 4), SymmetryMode::kSymmetric),
                             config_with(0.1, SymmetryMode::kSymmetric)),
               ValidationError);
  // Mode of data and config must agree.
  EXPECT_THROW(usvt_estimate(MaskedMatrix::fully_observed(Matrix::Zero(3, 3), SymmetryMode::kSymmetric),
                             config_with(0.1)),
               ValidationError);
  MaskedMatrix asym_mask = MaskedMatrix::fully_observed(Matrix::Zero(3, 3), SymmetryMode::kSymmetric);
  asym_mask.mask(0, 2) = false;
  EXPECT_THROW(usvt_estimate(asym_mask, config_with(0.1, SymmetryMode::kSymmetric)), ValidationError);
  MaskedMatrix asym_values = MaskedMatrix::fully_observed(Matrix::Zero(3, 3), SymmetryMode::kSymmetric);
  asym_values.values(0, 1) = 0.5;
  EXPECT_THROW(usvt_estimate(asym_values, config_with(0.1, SymmetryMode::kSymmetric)), ValidationError);
  // Skew mode accepts win fractions, which are not skew themselves.
  Matrix wins(2, 2);
  wins << 0.0, 0.75, 0.25, 0.0;
  EstimatorConfig skew = config_with(0.1, SymmetryMode::kSkewSymmetric);
  skew.interval = Interval{0.0, 1.0};
  EXPECT_NO_THROW(usvt_estimate(MaskedMatrix::fully_observed(wins, SymmetryMode::kSkewSymmetric), skew));
}

TEST(Usvt, SymmetricObservedFractionCountsDiagonal) {
  MaskedMatrix d{Matrix::Zero(3, 3), Mask::Constant(3, 3, false), SymmetryMode::kSymmetric};
  for (int i = 0; i < 3; ++i) d.mask(i, i) = true;
  const auto r = usvt_estimate(d, config_with(0.1, SymmetryMode::kSymmetric));
  EXPECT_DOUBLE_EQ(r.p_hat, 0.5);
  d.mask(0, 1) = d.mask(1, 0) = true;
  EXPECT_DOUBLE_EQ(usvt_estimate(d, config_with(0.1, SymmetryMode::kSymmetric)).p_hat, 4.0 / 6.0);
}

TEST(Usvt, VarianceAwareThreshold) {
  const auto d = random_masked(30, 40, 0.6, 5);
  EstimatorConfig c = config_with(0.05);
  c.sigma_sq = 0.3;
  const auto r = usvt_estimate(d, c);
  ASSERT_TRUE(r.q_hat.has_value());
  EXPECT_NEAR(*r.q_hat, r.p_hat * 0.3 + r.p_hat * (1 - r.p_hat) * 0.7, 1e-15);
  EXPECT_NEAR(r.threshold, 2.05 * std::sqrt(40.0 * *r.q_hat), 1e-12);
}

TEST(Usvt, TallInputIsTransposed) {
  const auto d = random_masked(30, 10, 0.8, 6);
  const auto r = usvt_estimate(d, config_with(0.01));
  EXPECT_TRUE(r.transposed);
  EXPECT_EQ(r.n, 30);
  EXPECT_EQ(r.estimate.rows(), 30);
  EXPECT_EQ(r.estimate.cols(), 10);
}

TEST(Usvt, TrivialEstimatorAtFullObservation) {
  const Matrix x = random_matrix(6, 8, 9);
  EXPECT_LE((trivial_estimate(MaskedMatrix::fully_observed(x), config_with(0.1)) - x).cwiseAbs().maxCoeff(),
            1e-15);
}

// Properties -----------------------------------------------------------------

TEST(UsvtProperty, Boundedness) {
  Rng shapes(Seed{77});
  for (int c = 0; c < 60; ++c) {
    const Eigen::Index rows = 1 + static_cast<Eigen::Index>(shapes.below(40));
    const Eigen::Index cols = 1 + static_cast<Eigen::Index>(shapes.below(40));
    const double p = shapes.uniform(0.05, 1.0);
    const double lo = shapes.uniform(-5.0, 5.0);
    const double hi = lo + shapes.uniform(0.01, 3.0);
    MaskedMatrix d = random_masked(rows, cols, p, 4000 + c);
    d.values = ((d.values.array() + 1.0) * 0.5 * (hi - lo) + lo).matrix().cwiseMax(lo).cwiseMin(hi);
    EstimatorConfig cfg = config_with(shapes.uniform(0.001, 0.9));
    cfg.interval = Interval{lo, hi};
    const auto r = usvt_estimate(d, cfg);
    EXPECT_GE(r.estimate.minCoeff(), lo);
    EXPECT_LE(r.estimate.maxCoeff(), hi);
    EXPECT_EQ(r.retained_rank, static_cast<Eigen::Index>(r.retained_indices.size()));
  }
}

TEST(UsvtProperty, ThresholdMonotoneInEta) {
  for (int c = 0; c < 20; ++c) {
    const Matrix low = testing::random_product(50, 60, 3, 5000 + 2 * c);
    MaskedMatrix d = random_masked(50, 60, 0.7, 6000 + c);
    d.values = (0.2 * low / low.cwiseAbs().maxCoeff() + 0.8 * d.values).cwiseMax(-1.0).cwiseMin(1.0);
    Eigen::Index previous = std::numeric_limits<Eigen::Index>::max();
    for (double eta : {0.001, 0.01, 0.1, 0.3, 0.6, 0.99}) {
      const auto r = usvt_estimate(d, config_with(eta));
      EXPECT_LE(r.retained_rank, previous);
      previous = r.retained_rank;
    }
  }
}

TEST(UsvtProperty, TransposeEquivariance) {
  for (int c = 0; c < 20; ++c) {
    const auto d = random_masked(15 + c, 25, 0.5, 7000 + c);
    const auto a = usvt_estimate(d, config_with(0.01)).estimate;
    const auto b = usvt_estimate(d.transpose(), config_with(0.01)).estimate;
    EXPECT_LE((a.transpose() - b).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(UsvtProperty, IntervalEquivariance) {
  for (int c = 0; c < 20; ++c) {
    const Matrix base = 0.3 * testing::random_product(30, 30, 2, 8000 + 2 * c);
    MaskedMatrix d{base.cwiseMax(-1.0).cwiseMin(1.0), bernoulli_mask(30, 30, 0.8, SymmetryMode::kAsymmetric, Seed{9000u + c}),
                   SymmetryMode::kAsymmetric};
    const auto reference = usvt_estimate(d, config_with(0.01)).estimate;
    const double alpha = 0.1 + 0.37 * c, beta = -3.0 + 0.5 * c;
    MaskedMatrix shifted = d;
    shifted.values = (alpha * d.values.array() + beta).matrix();
    EstimatorConfig cfg = config_with(0.01);
    cfg.interval = Interval{beta - alpha, beta + alpha};
    const auto mapped = usvt_estimate(shifted, cfg).estimate;
    EXPECT_LE((mapped - (alpha * reference.array() + beta).matrix()).cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, alpha));
  }
}

TEST(UsvtProperty, SymmetricOutput) {
  for (int c = 0; c < 20; ++c) {
    const auto sample = gen_blockmodel(60, Matrix::Constant(3, 3, 0.2) + 0.5 * Matrix::Identity(3, 3), std::nullopt,
                                       Seed{10000u + c});
    MaskedMatrix d{sample.adjacency, bernoulli_mask(60, 60, 0.6, SymmetryMode::kSymmetric, Seed{11000u + c}),
                   SymmetryMode::kSymmetric};
    EstimatorConfig cfg = config_with(0.01, SymmetryMode::kSymmetric);
    cfg.interval = Interval{0.0, 1.0};
    const auto r = usvt_estimate(d, cfg).estimate;
    EXPECT_LE((r - r.transpose()).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(UsvtProperty, FullRetentionIdentity) {
  // Every nonzero singular value clears the threshold, so the retained
  // projection reproduces Y and the estimate is the clipped data.
  for (int c = 0; c < 10; ++c) {
    Rng rng(Seed{12000u + c});
    const Eigen::Index n = 100 + 10 * c;
    Vector u(n), v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      u(i) = rng.uniform(0.5, 1.0);
      v(i) = rng.uniform(0.5, 1.0);
    }
    const Matrix x = u * v.transpose();
    const auto r = usvt_estimate(MaskedMatrix::fully_observed(x), config_with(0.01));
    ASSERT_GE(r.singular_values(0), r.threshold);
    EXPECT_LE((r.estimate - clip_to_interval(x, -1.0, 1.0)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

}  // namespace
}  // namespace usvt
