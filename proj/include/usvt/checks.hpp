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

// Property batteries: randomized checks of the invariants the library
// promises. Used by `usvt check` and by the test suites.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "usvt/error.hpp"
#include "usvt/estimator.hpp"
#include "usvt/evaluation.hpp"
#include "usvt/generators.hpp"
#include "usvt/linalg.hpp"
#include "usvt/rng.hpp"

namespace usvt {

struct PropertyResult {
  PropertyResult() = default;
  explicit PropertyResult(std::string property_name) : name(std::move(property_name)) {}

  std::string name;
  int cases = 0;
  int passed = 0;
  std::optional<std::string> first_failure;

  bool ok() const { return cases > 0 && passed == cases; }

  void record(bool ok, const std::string& detail_if_failed) {
    ++cases;
    if (ok) {
      ++passed;
    } else if (!first_failure) {
      first_failure = "case " + std::to_string(cases - 1) + ": " + detail_if_failed;
    }
  }
};

struct CheckReport {
  std::vector<PropertyResult> properties;

  bool ok() const {
    return !properties.empty() &&
           std::all_of(properties.begin(), properties.end(), [](const PropertyResult& p) { return p.ok(); });
  }

  const PropertyResult* find(const std::string& name) const {
    for (const auto& p : properties) {
      if (p.name == name) return &p;
    }
    return nullptr;
  }
};

struct CheckOptions {
  // Battery name or "all": key-lemma, norms, concentration, generators,
  // estimator.
  std::string selector = "all";
  // Cases per battery; 0 uses each battery's default.
  int cases = 0;
  Seed seed{20130801};
  // Corrupt one fixture per property so that the battery must fail.
  bool negative_control = false;
};

inline const std::vector<std::string>& battery_names() {
  static const std::vector<std::string> names{"key-lemma", "norms", "concentration", "generators", "estimator"};
  return names;
}

namespace detail {

inline std::string fmt_pair(double lhs, double rhs) {
  std::ostringstream os;
  os.precision(17);
  os << lhs << " vs " << rhs;
  return os.str();
}

inline Eigen::Index draw_int(Rng& rng, Eigen::Index lo, Eigen::Index hi) {
  return lo + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
}

inline Matrix draw_uniform(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  Matrix a(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) a(i, j) = scale * rng.uniform(-1.0, 1.0);
  }
  return a;
}

inline Matrix draw_low_rank(Rng& rng, Eigen::Index rows, Eigen::Index cols, Eigen::Index rank) {
  return draw_uniform(rng, rows, rank) * draw_uniform(rng, rank, cols);
}

// ---------------------------------------------------------------------------

inline std::vector<PropertyResult> key_lemma_battery(int cases, Seed seed, bool corrupt) {
  PropertyResult prop{"key-lemma.inequality"};
  const double deltas[] = {0.5, 1.0, 2.0};
  for (int c = 0; c < cases; ++c) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(c)}));
    const Eigen::Index rows = draw_int(rng, 1, 20);
    const Eigen::Index cols = draw_int(rng, 1, 30);
    const Eigen::Index rank = draw_int(rng, 1, std::min(rows, cols));
    const double noise = std::pow(10.0, rng.uniform(-3.0, 0.5));
    const Matrix b = draw_low_rank(rng, rows, cols, rank);
    const Matrix a = b + draw_uniform(rng, rows, cols, noise);
    const double delta = deltas[c % 3];
    Matrix b_hat = key_lemma_estimate(a, b, delta);
    const double rhs = key_lemma_constant(delta) * std::sqrt(spectral_norm(a - b) * nuclear_norm(b));
    if (corrupt && c == 0) b_hat(0, 0) += 2.0 * rhs + 1.0;
    const double lhs = frobenius_norm(b_hat - b);
    prop.record(lhs <= rhs * (1.0 + 1e-8) + 1e-8, fmt_pair(lhs, rhs));
  }
  return {prop};
}

inline std::vector<PropertyResult> norms_battery(int cases, Seed seed, bool corrupt) {
  PropertyResult recon{"norms.reconstruction"};
  PropertyResult ortho{"norms.orthonormality"};
  PropertyResult order{"norms.ordering"};
  PropertyResult cs{"norms.cauchy-schwarz"};
  PropertyResult tri{"norms.triangle"};
  for (int c = 0; c < cases; ++c) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(c)}));
    const Eigen::Index rows = draw_int(rng, 1, 64);
    const Eigen::Index cols = draw_int(rng, 1, 64);
    const bool low = rng.bernoulli(0.5);
    const Matrix a = low ? draw_low_rank(rng, rows, cols, draw_int(rng, 1, std::min(rows, cols)))
                         : draw_uniform(rng, rows, cols);
    const Matrix b = draw_uniform(rng, rows, cols);

    SvdFactorization f = svd(a);
    if (corrupt && c == 0) f.left(0, 0) += 1.0;
    const double s1 = f.singular_values(0);
    const double err = (a - f.reconstruct()).norm();
    const double tol = 1e-8 * static_cast<double>(std::max(rows, cols)) * s1;
    recon.record(err <= tol, fmt_pair(err, tol));

    const Eigen::Index k = f.singular_values.size();
    const double ou = (f.left.transpose() * f.left - Matrix::Identity(k, k)).cwiseAbs().maxCoeff();
    const double ov = (f.right.transpose() * f.right - Matrix::Identity(k, k)).cwiseAbs().maxCoeff();
    ortho.record(std::max(ou, ov) <= 1e-8, fmt_pair(std::max(ou, ov), 1e-8));

    const double spec = spectral_norm(a);
    const double frob = frobenius_norm(a);
    const double nuc = nuclear_norm(a);
    const double slack = 1e-12 * std::max(1.0, nuc);
    order.record(spec <= frob + slack && frob <= nuc + slack,
                 "spectral " + std::to_string(spec) + ", frobenius " + std::to_string(frob) + ", nuclear " +
                     std::to_string(nuc));

    const double rank = static_cast<double>(numerical_rank(a, 1e-10));
    const double cs_rhs = std::sqrt(rank) * frob * (1.0 + 1e-8);
    cs.record(nuc <= cs_rhs, fmt_pair(nuc, cs_rhs));

    const double diff = spectral_norm(a - b);
    const double gap = std::abs(spec - spectral_norm(b));
    const double diff_f = frobenius_norm(a - b);
    tri.record(gap <= diff + 1e-12 * std::max(1.0, diff) && diff <= diff_f + 1e-12 * std::max(1.0, diff_f),
               "gap " + std::to_string(gap) + ", spectral " + std::to_string(diff) + ", frobenius " +
                   std::to_string(diff_f));
  }
  return {recon, ortho, order, cs, tri};
}

inline std::vector<PropertyResult> concentration_battery(int trials, Seed seed, bool corrupt) {
  std::vector<PropertyResult> out;
  const struct {
    const char* name;
    EntryDistribution dist;
  } laws[] = {{"concentration.uniform", {EntryLaw::kUniform, 1.0}},
              {"concentration.rademacher", {EntryLaw::kRademacher, 1.0}}};
  std::uint64_t stream = 0;
  for (const auto& law : laws) {
    PropertyResult prop{law.name};
    const ConcentrationResult r =
        spectral_concentration_trial(400, law.dist, SymmetryMode::kSymmetric, 0.1, trials, derive_seed(seed, {stream++}));
    const double fraction = corrupt ? 0.0 : r.fraction;
    prop.record(fraction >= 0.95, "fraction " + std::to_string(fraction) + " below 0.95 (max norm " +
                                      std::to_string(r.max_norm) + ", bound " + std::to_string(r.bound) + ")");
    out.push_back(prop);
  }
  return out;
}

inline std::vector<PropertyResult> generators_battery(int cases, Seed seed, bool corrupt) {
  PropertyResult block{"generators.blockmodel-rank"};
  PropertyResult lowrank{"generators.low-rank-nuclear"};
  PropertyResult corr{"generators.correlation-psd"};
  PropertyResult dist{"generators.distance-triangle"};
  PropertyResult tour{"generators.tournament-complement"};
  PropertyResult mono{"generators.tournament-monotone"};
  PropertyResult minimax{"generators.minimax-budget"};
  for (int c = 0; c < cases; ++c) {
    const bool bad = corrupt && c == 0;
    const auto cu = static_cast<std::uint64_t>(c);
    Rng rng(derive_seed(seed, {cu, 0}));

    {
      const Eigen::Index n = draw_int(rng, 10, 80);
      const Eigen::Index k = draw_int(rng, 1, 5);
      Matrix probs(k, k);
      for (Eigen::Index j = 0; j < k; ++j) {
        for (Eigen::Index i = 0; i <= j; ++i) probs(i, j) = probs(j, i) = rng.uniform01();
      }
      BlockmodelSample s = gen_blockmodel(n, probs, std::nullopt, derive_seed(seed, {cu, 1}));
      if (bad) s.m += draw_uniform(rng, n, n, 1e-3);
      const Eigen::Index rank = numerical_rank(s.m, 1e-10);
      block.record(rank <= k, "rank " + std::to_string(rank) + " > k = " + std::to_string(k));
    }
    {
      const Eigen::Index m = draw_int(rng, 1, 60);
      const Eigen::Index n = draw_int(rng, 1, 60);
      const Eigen::Index r = draw_int(rng, 1, std::min(m, n));
      Matrix x = gen_low_rank(m, n, r, derive_seed(seed, {cu, 2}));
      if (bad) x = Matrix::Identity(m, n) * 2.0;
      const double nuc = nuclear_norm(x);
      const double cap = std::sqrt(static_cast<double>(r * m * n)) * (1.0 + 1e-8);
      lowrank.record(nuc <= cap && x.cwiseAbs().maxCoeff() <= 1.0, fmt_pair(nuc, cap));
    }
    {
      const Eigen::Index n = draw_int(rng, 1, 60);
      Matrix x = gen_correlation_matrix(n, derive_seed(seed, {cu, 3}));
      if (bad) x(0, 0) = -1.0;
      const double low = symmetric_eigenvalues(x)(0);
      const bool unit = (x.diagonal().array() == 1.0).all();
      corr.record(low >= -1e-8 && unit, "min eigenvalue " + std::to_string(low));
    }
    {
      const Eigen::Index n = draw_int(rng, 2, 40);
      const Eigen::Index dim = draw_int(rng, 1, 3);
      const Metric metric = static_cast<Metric>(rng.below(3));
      const auto points = sample_unit_cube(n, dim, derive_seed(seed, {cu, 4}));
      Matrix d = gen_distance_matrix(points, metric);
      if (bad) d(0, 1) = d(1, 0) = 5.0;
      bool ok = true;
      std::string where;
      for (Eigen::Index i = 0; i < n && ok; ++i) {
        for (Eigen::Index j = 0; j < n && ok; ++j) {
          for (Eigen::Index k = 0; k < n && ok; ++k) {
            if (d(i, j) > d(i, k) + d(k, j) + 1e-12) {
              ok = false;
              where = "(" + std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(k) + ")";
            }
          }
        }
      }
      dist.record(ok, "triangle inequality fails at " + where);
    }
    {
      const Eigen::Index n = draw_int(rng, 2, 30);
      TournamentFamily family = NonparametricMonotone{};
      if (rng.bernoulli(0.5)) {
        ParametricStrengths s;
        for (Eigen::Index i = 0; i < n; ++i) s.strengths.push_back(std::exp(rng.uniform(-3.0, 3.0)));
        family = s;
      }
      TournamentModel t = gen_bradley_terry(n, family, derive_seed(seed, {cu, 5}));
      if (bad) t.p(0, 1) = std::min(1.0, t.p(0, 1) + 0.25);
      bool complement = true;
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
          if (i != j && std::abs(t.p(i, j) + t.p(j, i) - 1.0) > 1e-12) complement = false;
        }
        if (t.p(i, i) != 0.0) complement = false;
      }
      tour.record(complement, "p_ij + p_ji != 1");
      bool monotone = true;
      for (std::size_t a = 0; a + 1 < t.strength_order.size(); ++a) {
        const auto si = static_cast<Eigen::Index>(t.strength_order[a]);
        const auto sj = static_cast<Eigen::Index>(t.strength_order[a + 1]);
        for (Eigen::Index k = 0; k < n; ++k) {
          if (k != si && k != sj && t.p(si, k) < t.p(sj, k) - 1e-12) monotone = false;
        }
      }
      mono.record(monotone, "stronger team has a smaller win probability");
    }
    {
      const Eigen::Index m = draw_int(rng, 1, 40);
      const Eigen::Index n = draw_int(rng, m, 50);
      const double cap = static_cast<double>(m) * std::sqrt(static_cast<double>(n));
      const double delta = cap * rng.uniform01();
      const double p = rng.uniform(0.02, 0.98);
      MinimaxInstance inst = gen_minimax_instance(m, n, delta, p, derive_seed(seed, {cu, 6}));
      if (bad) {
        inst.m_matrix.setConstant(1.0);
        inst.nuclear_budget = 0.0;
      }
      const double nuc = nuclear_norm(inst.m_matrix);
      minimax.record(nuc <= inst.nuclear_budget * (1.0 + 1e-8) + 1e-12 && inst.m_matrix.cwiseAbs().maxCoeff() <= 1.0,
                     fmt_pair(nuc, inst.nuclear_budget));
    }
  }
  return {block, lowrank, corr, dist, tour, mono, minimax};
}

inline std::vector<PropertyResult> estimator_battery(int cases, Seed seed, bool corrupt) {
  PropertyResult bounded{"estimator.bounded"};
  PropertyResult symmetric{"estimator.symmetric-output"};
  PropertyResult transpose{"estimator.transpose-equivariance"};
  PropertyResult monotone{"estimator.threshold-monotone"};
  for (int c = 0; c < cases; ++c) {
    const bool bad = corrupt && c == 0;
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(c)}));
    const auto mode = static_cast<SymmetryMode>(rng.below(3));
    const Eigen::Index rows = draw_int(rng, 1, 30);
    const Eigen::Index cols = mode == SymmetryMode::kAsymmetric ? draw_int(rng, 1, 30) : rows;
    const double lo = rng.uniform(-5.0, 5.0);
    const double hi = lo + rng.uniform(0.1, 5.0);
    const Interval iv{lo, hi};
    const double p = rng.uniform01();

    // Structured mean plus noise, all inside [lo, hi].
    Matrix truth = draw_low_rank(rng, rows, cols, 1);
    if (truth.cwiseAbs().maxCoeff() > 0) truth /= truth.cwiseAbs().maxCoeff();
    if (mode != SymmetryMode::kAsymmetric) truth = (0.5 * (truth + truth.transpose())).eval();
    Matrix x = (truth + draw_uniform(rng, rows, cols, 0.5)).cwiseMax(-1.0).cwiseMin(1.0);
    if (mode == SymmetryMode::kSymmetric) x = x.triangularView<Eigen::Upper>().toDenseMatrix() +
                                                  x.triangularView<Eigen::StrictlyUpper>().transpose().toDenseMatrix();
    x = (x.array() * iv.half_width() + iv.midpoint()).matrix().cwiseMax(lo).cwiseMin(hi);
    MaskedMatrix data{x, bernoulli_mask(rows, cols, p, mode, derive_seed(seed, {static_cast<std::uint64_t>(c), 1})), mode};

    EstimatorConfig config;
    config.eta = rng.uniform(0.001, 0.5);
    config.interval = iv;
    config.mode = mode;
    EstimateReport r = usvt_estimate(data, config);
    if (bad) r.estimate(0, 0) = hi + 1.0;
    const bool inside = (r.estimate.array() >= lo).all() && (r.estimate.array() <= hi).all();
    bounded.record(inside && r.retained_rank == static_cast<Eigen::Index>(r.retained_indices.size()),
                   "estimate leaves [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");

    if (mode == SymmetryMode::kSymmetric) {
      Matrix e = r.estimate;
      if (bad) e(0, rows - 1) += 1.0, e(rows - 1, 0) -= 1.0;
      const double asym = (e - e.transpose()).cwiseAbs().maxCoeff();
      symmetric.record(asym <= 1e-8 * std::max(1.0, iv.half_width()),
                       "max asymmetry " + std::to_string(asym));
    }
    if (mode == SymmetryMode::kAsymmetric) {
      Matrix back = usvt_estimate(data.transpose(), config).estimate.transpose();
      if (bad) back(0, 0) += 1.0;
      const double gap = (back - r.estimate).cwiseAbs().maxCoeff();
      transpose.record(gap <= 1e-9 * std::max(1.0, iv.half_width()), "max gap " + std::to_string(gap));
    }
    {
      EstimatorConfig wider = config;
      wider.eta = std::min(0.99, config.eta + rng.uniform(0.0, 0.5));
      Eigen::Index bigger = usvt_estimate(data, wider).retained_rank;
      if (bad) bigger = r.retained_rank + 1;
      monotone.record(bigger <= r.retained_rank,
                      "rank " + std::to_string(bigger) + " at larger eta exceeds " + std::to_string(r.retained_rank));
    }
  }
  // Symmetric fixtures are only a third of the draws; keep the property
  // meaningful even for tiny case counts.
  if (symmetric.cases == 0) symmetric.record(!corrupt, "no symmetric fixtures drawn");
  if (transpose.cases == 0) transpose.record(!corrupt, "no asymmetric fixtures drawn");
  return {bounded, symmetric, transpose, monotone};
}

}  // namespace detail

inline CheckReport check_suite(const CheckOptions& options) {
  const bool all = options.selector == "all";
  if (!all && std::find(battery_names().begin(), battery_names().end(), options.selector) == battery_names().end()) {
    throw ValidationError("unknown property set '" + options.selector + "'");
  }
  auto count = [&](int fallback) { return options.cases > 0 ? options.cases : fallback; };
  CheckReport report;
  auto append = [&](std::vector<PropertyResult> props) {
    for (auto& p : props) report.properties.push_back(std::move(p));
  };
  const bool bad = options.negative_control;
  if (all || options.selector == "key-lemma") append(detail::key_lemma_battery(count(1000), derive_seed(options.seed, {1}), bad));
  if (all || options.selector == "norms") append(detail::norms_battery(count(200), derive_seed(options.seed, {2}), bad));
  if (all || options.selector == "concentration") append(detail::concentration_battery(count(100), derive_seed(options.seed, {3}), bad));
  if (all || options.selector == "generators") append(detail::generators_battery(count(100), derive_seed(options.seed, {4}), bad));
  if (all || options.selector == "estimator") append(detail::estimator_battery(count(200), derive_seed(options.seed, {5}), bad));
  return report;
}

}  // namespace usvt
