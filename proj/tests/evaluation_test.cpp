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
#include <vector>

#include "test_util.hpp"
#include "usvt/error.hpp"
#include "usvt/evaluation.hpp"
#include "usvt/generators.hpp"

namespace usvt {
namespace {

using testing::random_matrix;

double unit_interval_cover(double delta) { return std::ceil(1.0 / delta); }

TEST(Mse, Cases) {
  const Matrix a = random_matrix(7, 9, 1), b = random_matrix(7, 9, 2);
  EXPECT_EQ(mse(a, a), 0.0);
  EXPECT_DOUBLE_EQ(mse(Matrix::Ones(3, 4), Matrix::Zero(3, 4)), 1.0);
  EXPECT_NEAR(mse(a, b), std::pow(frobenius_norm(a - b), 2) / 63.0, 1e-12);
  EXPECT_DOUBLE_EQ(mse(a, b), mse(b, a));
  EXPECT_NEAR(mse(3.0 * a, 3.0 * b), 9.0 * mse(a, b), 1e-12);
  EXPECT_THROW(mse(a, Matrix::Zero(9, 7)), ValidationError);
}

TEST(MainestBracket, ZeroMatrix) {
  const auto b = mainest_bracket(Matrix::Zero(5, 8), 0.5);
  EXPECT_EQ(b.bracket, 0.0);
  EXPECT_EQ(b.term_one, 1.0);
}

TEST(MainestBracket, MaximalNuclearNorm) {
  // Orthogonal +-1 rows: singular values sqrt(n), nuclear norm m sqrt(n).
  Matrix h(2, 4);
  h << 1, 1, 1, 1, 1, -1, 1, -1;
  // m sqrt(n) / (m sqrt(n p)) = 1 / sqrt(p), and the clamp takes over.
  const auto b = mainest_bracket(h, 1.0);
  EXPECT_NEAR(b.term_nuclear, 1.0, 1e-12);
  EXPECT_NEAR(b.term_nuclear_sq, 2.0, 1e-12);
  EXPECT_NEAR(b.bracket, 1.0, 1e-12);
  EXPECT_NEAR(mainest_bracket(h, 0.25).term_nuclear, 2.0, 1e-12);
  EXPECT_EQ(mainest_bracket(h, 0.25).bracket, 1.0);
  // Orientation does not matter.
  EXPECT_NEAR(mainest_bracket(h.transpose(), 1.0).term_nuclear, b.term_nuclear, 1e-12);
}

TEST(MainestBracket, LowRankRate) {
  for (int c = 0; c < 20; ++c) {
    const Eigen::Index r = 1 + c % 4;
    const Matrix m = gen_low_rank(60, 90, r, Seed{100u + c});
    for (double p : {0.1, 0.5, 1.0}) {
      EXPECT_LE(mainest_bracket(m, p).bracket, std::sqrt(static_cast<double>(r) / (60.0 * p)) * (1 + 1e-8));
    }
  }
}

TEST(MainestBracket, MonotoneInPAndNorm) {
  const Matrix m = gen_low_rank(40, 50, 3, Seed{5});
  double previous = INFINITY;
  for (double p : {0.01, 0.05, 0.1, 0.3, 0.6, 1.0}) {
    const auto b = mainest_bracket(m, p);
    EXPECT_LE(b.bracket, previous);
    EXPECT_LE(b.bracket, 1.0);
    previous = b.bracket;
  }
  double last = -1.0;
  for (double nuc : {0.0, 1.0, 5.0, 20.0, 100.0, 1e4}) {
    const double b = mainest_bracket_from_norm(nuc, 40, 50, 0.2).bracket;
    EXPECT_GE(b, last);
    last = b;
  }
  EXPECT_EQ(last, 1.0);
  EXPECT_TRUE(mainest_bracket_from_norm(1.0, 10, 30, 0.5).exponential_term_flag);
  EXPECT_FALSE(mainest_bracket_from_norm(1.0, 10, 300, 0.5).exponential_term_flag);
}

TEST(MainestBracket, BlockmodelRate) {
  for (Eigen::Index k : {1, 2, 4, 8}) {
    Matrix probs = Matrix::Constant(k, k, 0.15) + 0.6 * Matrix::Identity(k, k);
    const auto s = gen_blockmodel(200, probs, std::nullopt, Seed{static_cast<std::uint64_t>(k)});
    EXPECT_LE(mainest_bracket(s.m, 1.0).bracket, blockmodel_bracket(200, k) * (1 + 1e-8));
  }
}

TEST(MainestBracket, VarianceVariantNeverLarger) {
  const Matrix m = gen_low_rank(30, 70, 2, Seed{8});
  for (double sigma : {0.01, 0.2, 0.7, 1.0}) {
    for (double p : {0.05, 0.4, 1.0}) {
      const auto b = mainest_bracket(m, p, sigma);
      ASSERT_TRUE(b.bracket_variance.has_value());
      EXPECT_LE(*b.bracket_variance, b.bracket * (1 + 1e-12));
    }
  }
}

TEST(DistanceBracket, UnitInterval) {
  // Oracle: minimum of delta + sqrt(ceil(4/delta)/n) on a 2e6-point grid,
  // computed offline: 0.0300000 at n = 1e6 and 0.139248 at n = 1e4.
  const double fine = 0.030000046051807904;
  const double b6 = distance_bracket(1000000, 1.0, unit_interval_cover);
  EXPECT_GE(b6, fine * (1 - 1e-12));
  EXPECT_LE(b6, fine * 1.1);
  EXPECT_GT(b6, 0.01);
  EXPECT_LT(b6, 0.05);
  const double b4 = distance_bracket(10000, 1.0, unit_interval_cover);
  EXPECT_GE(b4, 0.13924786211753276 * (1 - 1e-12));
  EXPECT_LE(b4, 0.13924786211753276 * 1.1);
  const double slope = std::log(b6 / b4) / std::log(100.0);
  EXPECT_NEAR(slope, -1.0 / 3.0, 0.05);
  // Same exponent as the Lipschitz latent bracket in one dimension.
  const double latent_slope =
      std::log(lipschitz_latent_bracket(1000000, 1.0, 1) / lipschitz_latent_bracket(10000, 1.0, 1)) / std::log(100.0);
  EXPECT_NEAR(latent_slope, -1.0 / 3.0, 1e-12);
  EXPECT_NEAR(slope, latent_slope, 0.05);
}

TEST(DistanceBracket, SingleBallAndClamp) {
  const auto one = [](double) { return 1.0; };
  for (Eigen::Index n : {100, 10000, 1000000}) {
    const double nd = static_cast<double>(n);
    // The grid starts at delta = 1/n.
    EXPECT_NEAR(distance_bracket(n, 1.0, one), 1.0 / nd + 1.0 / std::sqrt(nd), 1e-12);
    EXPECT_NEAR(distance_bracket(n, 0.25, one), 2.0 * (1.0 / nd + 1.0 / std::sqrt(nd)), 1e-12);
  }
  EXPECT_EQ(distance_bracket(1000, 1e-6, unit_interval_cover), 1.0);
  EXPECT_THROW(distance_bracket(100, 1.0, [](double d) { return d; }), ValidationError);
}

TEST(RateBrackets, Arithmetic) {
  EXPECT_NEAR(lipschitz_latent_bracket(1000, 1.0, 1), 0.1, 1e-12);
  EXPECT_NEAR(lipschitz_latent_bracket(1000, 0.01, 1), 1.0, 1e-12);
  EXPECT_NEAR(bradley_bracket(10000, 1.0), 0.1, 1e-12);
  EXPECT_NEAR(bradley_bracket(16, 1.0), 0.5, 1e-12);
  EXPECT_NEAR(bradley_bracket(16, 0.25), 1.0, 1e-12);
  EXPECT_NEAR(psd_bracket(100, 1.0), 0.1, 1e-12);
  EXPECT_NEAR(psd_bracket(100, 0.01), 1.0, 1e-12);
  EXPECT_NEAR(lowrank_bracket(100, 4, 1.0), 0.2, 1e-12);
  EXPECT_EQ(lowrank_bracket(10, 10, 0.1), 1.0);
  EXPECT_NEAR(blockmodel_bracket(400, 4), 0.1, 1e-12);
  EXPECT_NEAR(minimax_bracket(2.0, 10, 100, 1.0), std::min(2.0 / 100.0, 4.0 / 1000.0), 1e-15);
}

TEST(RateBrackets, ExponentsMatchFits) {
  std::vector<double> ns{100, 400, 1600, 6400}, bt, psd, lat;
  for (double n : ns) {
    bt.push_back(bradley_bracket(static_cast<Eigen::Index>(n), 1.0));
    psd.push_back(psd_bracket(static_cast<Eigen::Index>(n), 1.0));
    lat.push_back(lipschitz_latent_bracket(static_cast<Eigen::Index>(n), 1.0, 2));
  }
  EXPECT_NEAR(rate_fit(ns, bt).slope, -0.25, 1e-12);
  EXPECT_NEAR(rate_fit(ns, psd).slope, -0.5, 1e-12);
  EXPECT_NEAR(rate_fit(ns, lat).slope, -0.25, 1e-12);
}

TEST(LowrankLower, Cases) {
  EXPECT_EQ(lowrank_lower(50, 5, 1.0), 0.0);
  EXPECT_NEAR(lowrank_lower(7, 7, 0.3), 0.7, 1e-15);
  double previous = 2.0;
  for (Eigen::Index m = 3; m <= 300; m += 3) {
    const double v = lowrank_lower(m, 3, 0.1);
    EXPECT_LT(v, previous);
    previous = v;
  }
}

TEST(Bootstrap, ZeroEstimateExactMean) {
  EstimatorConfig cfg;
  cfg.eta = 0.01;
  EXPECT_EQ(bootstrap_mse(Matrix::Zero(20, 30), 0.6, SymmetryMode::kAsymmetric, cfg, 5, Seed{1},
                          ResampleModel::kExactMean),
            0.0);
}

TEST(Bootstrap, SingleResampleIsOneDiscrepancy) {
  EstimatorConfig cfg;
  cfg.eta = 0.05;
  cfg.interval = Interval{0.0, 1.0};
  const Matrix est = (gen_low_rank(25, 25, 2, Seed{3}).array() * 0.5 + 0.5).matrix();
  const Seed seed{17};
  const MaskedMatrix data = resample_data(est, 0.7, SymmetryMode::kAsymmetric, Interval{0.0, 1.0},
                                          ResampleModel::kBernoulliRound, derive_seed(seed, {0}));
  const double expected = mse(usvt_estimate(data, cfg).estimate, est);
  EXPECT_DOUBLE_EQ(bootstrap_mse(est, 0.7, SymmetryMode::kAsymmetric, cfg, 1, seed, ResampleModel::kBernoulliRound),
                   expected);
  EXPECT_THROW(bootstrap_mse(est, 0.7, SymmetryMode::kAsymmetric, cfg, 0, seed, ResampleModel::kBernoulliRound),
               ValidationError);
}

TEST(Bootstrap, SkewResampleMirrors) {
  Matrix truth = Matrix::Constant(6, 6, 0.5);
  truth.diagonal().setZero();
  const auto d = resample_data(truth, 0.5, SymmetryMode::kSkewSymmetric, Interval{0.0, 1.0},
                               ResampleModel::kBernoulliRound, Seed{4});
  EXPECT_NO_THROW(d.validate());
  for (Eigen::Index i = 0; i < 6; ++i) {
    EXPECT_TRUE(d.mask(i, i));
    for (Eigen::Index j = 0; j < 6; ++j) {
      if (i != j && d.mask(i, j)) {
        EXPECT_EQ(d.values(i, j) + d.values(j, i), 1.0);
      }
    }
  }
}

TEST(Bootstrap, TracksTrueMseOnBlockmodel) {
  Matrix probs = Matrix::Constant(4, 4, 0.2) + 0.5 * Matrix::Identity(4, 4);
  EstimatorConfig cfg;
  cfg.eta = 0.01;
  cfg.mode = SymmetryMode::kSymmetric;
  cfg.interval = Interval{0.0, 1.0};
  double truth_total = 0.0, boot_total = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const auto s = gen_blockmodel(500, probs, std::nullopt, Seed{500u + rep});
    const MaskedMatrix data = MaskedMatrix::fully_observed(s.adjacency, SymmetryMode::kSymmetric);
    const Matrix est = usvt_estimate(data, cfg).estimate;
    truth_total += mse(est, s.m);
    boot_total += bootstrap_mse(est, 1.0, SymmetryMode::kSymmetric, cfg, 1, Seed{700u + rep},
                                ResampleModel::kBernoulliRound);
  }
  const double ratio = boot_total / truth_total;
  EXPECT_GE(ratio, 1.0 / 3.0);
  EXPECT_LE(ratio, 3.0);
}

TEST(Concentration, DegenerateSizeOne) {
  // A 1 x 1 Rademacher matrix has norm 1 <= (2 + eta) * 1.
  const auto r = spectral_concentration_trial(1, EntryDistribution{EntryLaw::kRademacher}, SymmetryMode::kSymmetric,
                                              0.1, 20, Seed{1});
  EXPECT_EQ(r.fraction, 1.0);
  EXPECT_EQ(r.max_norm, 1.0);
  // Uniform entries have sigma^2 = 1/3 < 1^{-0.9}: outside the regime.
  EXPECT_THROW(spectral_concentration_trial(1, EntryDistribution{EntryLaw::kUniform}, SymmetryMode::kSymmetric, 0.1,
                                            20, Seed{1}),
               ValidationError);
  EXPECT_THROW(spectral_concentration_trial(400, EntryDistribution{EntryLaw::kSparseRademacher, 0.001},
                                            SymmetryMode::kSymmetric, 0.1, 5, Seed{1}),
               ValidationError);
}

TEST(Concentration, SemicircleEdge) {
  for (EntryLaw law : {EntryLaw::kUniform, EntryLaw::kRademacher}) {
    const EntryDistribution dist{law};
    const auto r = spectral_concentration_trial(400, dist, SymmetryMode::kSymmetric, 0.1, 20, Seed{2});
    EXPECT_GE(r.fraction, 0.95);
    // Semicircle oracle: the norm sits near 2 sigma sqrt(n).
    EXPECT_NEAR(r.max_norm / (2.0 * std::sqrt(dist.variance() * 400.0)), 1.0, 0.05);
  }
}

TEST(Concentration, NoiseMatrixStructure) {
  Rng rng(Seed{3});
  const Matrix sym = random_noise_matrix(10, EntryDistribution{EntryLaw::kUniform}, SymmetryMode::kSymmetric, rng);
  EXPECT_TRUE(is_symmetric(sym));
  const Matrix skew =
      random_noise_matrix(10, EntryDistribution{EntryLaw::kRademacher}, SymmetryMode::kSkewSymmetric, rng);
  EXPECT_EQ(skew + skew.transpose(), Matrix::Zero(10, 10));
}

TEST(RateFit, ExactPowerLaw) {
  std::vector<double> ns{100, 200, 400, 800, 1600}, mses;
  for (double n : ns) mses.push_back(3.0 * std::pow(n, -0.5));
  const auto fit = rate_fit(ns, mses);
  EXPECT_NEAR(fit.slope, -0.5, 1e-12);
  EXPECT_NEAR(fit.intercept, std::log(3.0), 1e-10);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
}

TEST(RateFit, Constant) {
  std::vector<double> ns{10, 20, 40}, mses{0.2, 0.2, 0.2};
  const auto fit = rate_fit(ns, mses);
  EXPECT_NEAR(fit.slope, 0.0, 1e-12);
}

TEST(RateFit, NoisySlopeRecovered) {
  Rng rng(Seed{6});
  std::vector<double> ns, mses;
  for (int k = 0; k < 12; ++k) {
    const double n = 100.0 * std::pow(1.5, k);
    ns.push_back(n);
    mses.push_back(0.8 * std::pow(n, -0.7) * std::exp(rng.uniform(-0.1, 0.1)));
  }
  const auto fit = rate_fit(ns, mses);
  EXPECT_NEAR(fit.slope, -0.7, 0.05);
  EXPECT_GT(fit.r_squared, 0.95);
  EXPECT_LE(fit.r_squared, 1.0);
}

TEST(RateFit, Preconditions) {
  std::vector<double> two{1, 2};
  EXPECT_THROW(rate_fit(two, two), ValidationError);
  std::vector<double> ns{1, 2, 3}, bad{0.1, 0.0, 0.2};
  EXPECT_THROW(rate_fit(ns, bad), ValidationError);
}

}  // namespace
}  // namespace usvt
