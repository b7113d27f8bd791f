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

// Parameter-matrix and data-matrix generators for the model families the
// estimator is meant to handle, plus the block-copied adversarial
// constructions behind the lower bounds.
//
// All randomness flows through usvt::Rng. Symmetric draws visit the upper
// triangle (diagonal included) column by column, i <= j, and mirror.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "usvt/error.hpp"
#include "usvt/estimator.hpp"
#include "usvt/linalg.hpp"
#include "usvt/rng.hpp"

namespace usvt {

// ---------------------------------------------------------------------------
// Observation and rounding

inline Mask bernoulli_mask(Eigen::Index rows, Eigen::Index cols, double p, SymmetryMode mode,
                           Seed seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("bernoulli_mask: p must lie in [0, 1]");
  if (mode != SymmetryMode::kAsymmetric && rows != cols) {
    throw ValidationError("bernoulli_mask: symmetric modes need a square shape");
  }
  Rng rng(seed);
  Mask mask(rows, cols);
  if (mode == SymmetryMode::kAsymmetric) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (Eigen::Index i = 0; i < rows; ++i) mask(i, j) = rng.bernoulli(p);
    }
    return mask;
  }
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      const bool seen = rng.bernoulli(p);
      mask(i, j) = seen;
      mask(j, i) = seen;
    }
  }
  return mask;
}

// 0/1 matrix with E[x_ij] = m_ij; mirrored from the upper triangle unless
// mode is Asymmetric.
inline Matrix bernoulli_round(const Matrix& m, SymmetryMode mode, Seed seed) {
  if ((m.array() < 0.0).any() || (m.array() > 1.0).any() || !m.allFinite()) {
    throw ValidationError("bernoulli_round: entries must lie in [0, 1]");
  }
  Rng rng(seed);
  Matrix x(m.rows(), m.cols());
  if (mode == SymmetryMode::kAsymmetric) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) x(i, j) = rng.bernoulli(m(i, j)) ? 1.0 : 0.0;
    }
    return x;
  }
  if (m.rows() != m.cols()) throw ValidationError("bernoulli_round: symmetric modes need a square matrix");
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      const double v = rng.bernoulli(m(i, j)) ? 1.0 : 0.0;
      x(i, j) = v;
      x(j, i) = v;
    }
  }
  return x;
}

// ---------------------------------------------------------------------------
// Low rank

// Sum of r outer products of Uniform[-1, 1] factors, scaled so that the
// largest entry has magnitude 1 (unless the product vanishes).
inline Matrix gen_low_rank(Eigen::Index m, Eigen::Index n, Eigen::Index r, Seed seed) {
  if (m < 1 || n < 1 || r < 1 || r > std::min(m, n)) {
    throw ValidationError("gen_low_rank: need 1 <= r <= min(m, n)");
  }
  Rng rng(seed);
  Matrix left(m, r), right(n, r);
  for (Eigen::Index k = 0; k < r; ++k) {
    for (Eigen::Index i = 0; i < m; ++i) left(i, k) = rng.uniform(-1.0, 1.0);
    for (Eigen::Index j = 0; j < n; ++j) right(j, k) = rng.uniform(-1.0, 1.0);
  }
  Matrix out = left * right.transpose();
  const double peak = out.cwiseAbs().maxCoeff();
  if (peak > 0.0) out /= peak;
  return out;
}

// First r rows i.i.d. Uniform[-1, 1], that block stacked floor(m / r) times,
// remaining rows zero.
inline Matrix gen_low_rank_adversary(Eigen::Index m, Eigen::Index n, Eigen::Index r, Seed seed) {
  if (m < 1 || n < 1 || r < 1 || r > m) throw ValidationError("gen_low_rank_adversary: need 1 <= r <= m");
  Rng rng(seed);
  Matrix block(r, n);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) block(i, j) = rng.uniform(-1.0, 1.0);
  }
  Matrix out = Matrix::Zero(m, n);
  const Eigen::Index copies = m / r;
  for (Eigen::Index c = 0; c < copies; ++c) out.middleRows(c * r, r) = block;
  return out;
}

// ---------------------------------------------------------------------------
// Stochastic blockmodel

struct BlockmodelSample {
  Matrix m;
  Matrix adjacency;
  std::vector<Eigen::Index> assignment;  // 0-based block label per vertex
};

inline BlockmodelSample gen_blockmodel(Eigen::Index n, const Matrix& block_probs,
                                       std::optional<std::vector<Eigen::Index>> assignment,
                                       Seed seed) {
  const Eigen::Index k = block_probs.rows();
  if (n < 1 || k < 1 || block_probs.cols() != k) {
    throw ValidationError("gen_blockmodel: need n >= 1 and a square k x k block matrix");
  }
  if (!is_symmetric(block_probs) || (block_probs.array() < 0.0).any() ||
      (block_probs.array() > 1.0).any()) {
    throw ValidationError("gen_blockmodel: block probabilities must be symmetric and in [0, 1]");
  }
  Rng rng(derive_seed(seed, {0}));
  BlockmodelSample out;
  if (assignment) {
    if (static_cast<Eigen::Index>(assignment->size()) != n) {
      throw ValidationError("gen_blockmodel: assignment length must equal n");
    }
    for (Eigen::Index b : *assignment) {
      if (b < 0 || b >= k) throw ValidationError("gen_blockmodel: block label out of range");
    }
    out.assignment = std::move(*assignment);
  } else {
    out.assignment.resize(static_cast<std::size_t>(n));
    for (auto& b : out.assignment) b = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(k)));
  }
  out.m.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      out.m(i, j) = block_probs(out.assignment[static_cast<std::size_t>(i)],
                                out.assignment[static_cast<std::size_t>(j)]);
    }
  }
  out.adjacency = bernoulli_round(out.m, SymmetryMode::kSymmetric, derive_seed(seed, {1}));
  return out;
}

// ---------------------------------------------------------------------------
// Distance matrices

enum class Metric { kEuclidean, kManhattan, kChebyshev };

inline Metric parse_metric(const std::string& name) {
  if (name == "euclidean") return Metric::kEuclidean;
  if (name == "manhattan") return Metric::kManhattan;
  if (name == "chebyshev") return Metric::kChebyshev;
  throw ValidationError("unknown metric '" + name + "'");
}

inline double metric_distance(const Vector& x, const Vector& y, Metric metric) {
  switch (metric) {
    case Metric::kEuclidean: return (x - y).norm();
    case Metric::kManhattan: return (x - y).lpNorm<1>();
    case Metric::kChebyshev: return (x - y).lpNorm<Eigen::Infinity>();
  }
  return 0.0;
}

inline std::vector<Vector> sample_unit_cube(Eigen::Index count, Eigen::Index dim, Seed seed) {
  if (count < 1 || dim < 1) throw ValidationError("sample_unit_cube: need count, dim >= 1");
  Rng rng(seed);
  std::vector<Vector> points(static_cast<std::size_t>(count), Vector(dim));
  for (auto& p : points) {
    for (Eigen::Index d = 0; d < dim; ++d) p(d) = rng.uniform01();
  }
  return points;
}

// Pairwise distances divided by the realized diameter, so the largest entry
// is exactly 1 (all zero if the points coincide).
inline Matrix gen_distance_matrix(std::span<const Vector> points, Metric metric) {
  if (points.empty()) throw ValidationError("gen_distance_matrix: need at least one point");
  const Eigen::Index n = static_cast<Eigen::Index>(points.size());
  const Eigen::Index dim = points.front().size();
  for (const auto& p : points) {
    if (p.size() != dim || !p.allFinite()) {
      throw ValidationError("gen_distance_matrix: points must be finite and share a dimension");
    }
  }
  Matrix d = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      const double v = metric_distance(points[static_cast<std::size_t>(i)],
                                       points[static_cast<std::size_t>(j)], metric);
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  const double diameter = d.maxCoeff();
  if (diameter > 0.0) d /= diameter;
  return d;
}

// ---------------------------------------------------------------------------
// Latent space

using LatentKernel = std::function<double(const Vector&, const Vector&)>;

struct LatentSample {
  Matrix m;
  std::vector<Vector> betas;
};

inline LatentSample gen_latent_space(Eigen::Index n, Eigen::Index dim, const LatentKernel& f,
                                     Seed seed) {
  if (n < 1 || dim < 1) throw ValidationError("gen_latent_space: need n, dim >= 1");
  LatentSample out;
  out.betas = sample_unit_cube(n, dim, seed);
  out.m.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = f(out.betas[static_cast<std::size_t>(i)], out.betas[static_cast<std::size_t>(j)]);
      if (!(v >= -1.0 && v <= 1.0)) {
        throw ValidationError("gen_latent_space: kernel value " + std::to_string(v) +
                              " outside [-1, 1]");
      }
      out.m(i, j) = v;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Correlation matrices: m_ij = u_i u_j off the diagonal, 1 on it. This is
// u u^T + diag(1 - u_i^2), hence PSD.

inline Matrix correlation_from_latent(const Vector& u) {
  if (u.size() < 1 || (u.array().abs() > 1.0).any()) {
    throw ValidationError("correlation_from_latent: need a nonempty vector in [-1, 1]");
  }
  Matrix m = u * u.transpose();
  m.diagonal().setOnes();
  return m;
}

inline Matrix gen_correlation_matrix(Eigen::Index n, Seed seed) {
  if (n < 1) throw ValidationError("gen_correlation_matrix: need n >= 1");
  Rng rng(seed);
  Vector u(n);
  for (Eigen::Index i = 0; i < n; ++i) u(i) = rng.uniform01();
  return correlation_from_latent(u);
}

// ---------------------------------------------------------------------------
// Graphons

using Graphon = std::function<double(double, double)>;

struct GraphonSample {
  Vector u;
  Matrix m;
  Matrix adjacency;
};

// Self-pairs are generated too: m_ii = f(U_i, U_i) and the diagonal of the
// adjacency is Bernoulli(m_ii).
inline GraphonSample gen_graphon(Eigen::Index n, const Graphon& f, Seed seed) {
  if (n < 1) throw ValidationError("gen_graphon: need n >= 1");
  GraphonSample out;
  Rng rng(derive_seed(seed, {0}));
  out.u.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) out.u(i) = rng.uniform01();
  out.m.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      const double v = f(out.u(i), out.u(j));
      if (!(v >= 0.0 && v <= 1.0)) {
        throw ValidationError("gen_graphon: graphon value " + std::to_string(v) + " outside [0, 1]");
      }
      out.m(i, j) = v;
      out.m(j, i) = v;
    }
  }
  out.adjacency = bernoulli_round(out.m, SymmetryMode::kSymmetric, derive_seed(seed, {1}));
  return out;
}

// ---------------------------------------------------------------------------
// Tournaments

struct TournamentModel {
  Matrix p;                                  // p(i, j) = P(i beats j), zero diagonal
  std::vector<std::size_t> strength_order;   // strongest team first
};

struct ParametricStrengths {
  std::vector<double> strengths;  // a_i > 0, p_ij = a_i / (a_i + a_j)
};

// p_ij = 1/2 + (h(t_i) - h(t_j)) / 2 with t the normalized strength rank
// (weakest 0, strongest 1) and h strictly increasing from [0, 1] into [0, 1].
struct NonparametricMonotone {
  std::function<double(double)> h = [](double t) { return t * t * (3.0 - 2.0 * t); };
};

using TournamentFamily = std::variant<ParametricStrengths, NonparametricMonotone>;

inline TournamentModel gen_bradley_terry(Eigen::Index n, const TournamentFamily& family, Seed seed) {
  if (n < 1) throw ValidationError("gen_bradley_terry: need n >= 1");
  TournamentModel out;
  out.p = Matrix::Zero(n, n);
  if (const auto* param = std::get_if<ParametricStrengths>(&family)) {
    const auto& a = param->strengths;
    if (static_cast<Eigen::Index>(a.size()) != n) {
      throw ValidationError("gen_bradley_terry: need one strength per team");
    }
    for (double s : a) {
      if (!(s > 0.0) || !std::isfinite(s)) throw ValidationError("gen_bradley_terry: strengths must be positive");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i != j) out.p(i, j) = a[i] / (a[i] + a[j]);
      }
    }
    out.strength_order.resize(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < out.strength_order.size(); ++i) out.strength_order[i] = i;
    std::stable_sort(out.strength_order.begin(), out.strength_order.end(),
                     [&](std::size_t x, std::size_t y) { return a[x] > a[y]; });
    return out;
  }
  const auto& mono = std::get<NonparametricMonotone>(family);
  Rng rng(seed);
  out.strength_order = random_permutation(static_cast<std::size_t>(n), rng);
  Vector level(n);
  for (std::size_t pos = 0; pos < out.strength_order.size(); ++pos) {
    const double t = n == 1 ? 0.0
                            : static_cast<double>(n - 1 - static_cast<Eigen::Index>(pos)) /
                                  static_cast<double>(n - 1);
    const double v = mono.h(t);
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("gen_bradley_terry: h must map into [0, 1]");
    level(static_cast<Eigen::Index>(out.strength_order[pos])) = v;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j) out.p(i, j) = 0.5 + 0.5 * (level(i) - level(j));
    }
  }
  return out;
}

// Each pair meets with probability p and then plays games_per_pair games;
// x_ij is i's win fraction and x_ji = 1 - x_ij. The diagonal is observed
// as zero.
inline MaskedMatrix play_tournament(const TournamentModel& model, double p, int games_per_pair,
                                    Seed seed) {
  const Eigen::Index n = model.p.rows();
  if (n < 1 || model.p.cols() != n) throw ValidationError("play_tournament: model must be square");
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("play_tournament: p must lie in [0, 1]");
  if (games_per_pair < 1) throw ValidationError("play_tournament: games_per_pair must be positive");
  Rng rng(seed);
  MaskedMatrix out{Matrix::Zero(n, n), Mask::Constant(n, n, false), SymmetryMode::kSkewSymmetric};
  for (Eigen::Index j = 0; j < n; ++j) {
    out.mask(j, j) = true;
    for (Eigen::Index i = 0; i < j; ++i) {
      if (!rng.bernoulli(p)) continue;
      int wins = 0;
      for (int g = 0; g < games_per_pair; ++g) wins += rng.bernoulli(model.p(i, j)) ? 1 : 0;
      const double frac = static_cast<double>(wins) / games_per_pair;
      out.values(i, j) = frac;
      out.values(j, i) = 1.0 - frac;
      out.mask(i, j) = true;
      out.mask(j, i) = true;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Minimax lower-bound instances

enum class MinimaxCase {
  kZero,         // delta = 0
  kBlockCopies,  // theta/sqrt(p) <= 1 and m theta sqrt(p) >= 1
  kSingleRow,    // theta/sqrt(p) <= 1 and m theta sqrt(p) < 1
  kSaturated,    // theta/sqrt(p) > 1
};

struct MinimaxInstance {
  Matrix m_matrix;
  double nuclear_budget = 0.0;
  double observed_p = 0.0;
  MinimaxCase construction = MinimaxCase::kZero;
  Eigen::Index block_rows = 0;  // rows in the random block
  Eigen::Index copies = 0;      // times the block is stacked
};

// Matrix with ||M||_* <= delta whose nonzero rows are floor(1/p) copies of a
// random block, so that with positive probability no copy of a given entry is
// observed. Entries are halved when p >= 1/2.
inline MinimaxInstance gen_minimax_instance(Eigen::Index m, Eigen::Index n, double delta, double p,
                                            Seed seed) {
  if (m < 1 || n < m) throw ValidationError("gen_minimax_instance: need 1 <= m <= n");
  const double cap = static_cast<double>(m) * std::sqrt(static_cast<double>(n));
  if (!(delta >= 0.0 && delta <= cap)) throw ValidationError("gen_minimax_instance: delta must lie in [0, m sqrt(n)]");
  if (!(p > 0.0 && p < 1.0)) throw ValidationError("gen_minimax_instance: p must lie in (0, 1)");

  MinimaxInstance out;
  out.m_matrix = Matrix::Zero(m, n);
  out.nuclear_budget = delta;
  out.observed_p = p;
  if (delta == 0.0) return out;

  const double theta = delta / cap;
  const double md = static_cast<double>(m);
  const Eigen::Index copies_full = static_cast<Eigen::Index>(std::floor(1.0 / p));
  Rng rng(seed);

  double amplitude = 1.0;
  if (theta / std::sqrt(p) <= 1.0) {
    const double k_real = md * theta * std::sqrt(p);
    if (k_real >= 1.0) {
      out.construction = MinimaxCase::kBlockCopies;
      out.block_rows = static_cast<Eigen::Index>(std::floor(k_real));
    } else {
      out.construction = MinimaxCase::kSingleRow;
      out.block_rows = 1;
      amplitude = k_real;
    }
  } else {
    out.construction = MinimaxCase::kSaturated;
    out.block_rows = static_cast<Eigen::Index>(std::floor(md * p));
  }
  if (out.block_rows == 0) return out;
  out.copies = std::min(copies_full, m / out.block_rows);

  Matrix block(out.block_rows, n);
  for (Eigen::Index i = 0; i < out.block_rows; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) block(i, j) = rng.uniform(-amplitude, amplitude);
  }
  if (p >= 0.5) block *= 0.5;
  for (Eigen::Index c = 0; c < out.copies; ++c) {
    out.m_matrix.middleRows(c * out.block_rows, out.block_rows) = block;
  }
  return out;
}

}  // namespace usvt
