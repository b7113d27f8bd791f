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

// Experiment runner: sweeps an (n, p) grid for one model family, runs
// seeded trials, scores estimates against the known truth, and emits JSON
// and CSV reports.
//
// Seeds. For grid position (i, j) = (index in n_grid, index in p_grid) and
// trial t, the parameter matrix and its noise are drawn from
// derive_seed(seed, {i, t, stream}) and the observation mask from
// derive_seed(seed, {i, j, t, stream}). Trials at different p for the same
// n therefore share the same truth and data, and differ only in what is
// observed. Results are written to per-trial slots and reduced in trial
// order, so the report does not depend on the worker count.

#pragma once

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "usvt/error.hpp"
#include "usvt/estimator.hpp"
#include "usvt/evaluation.hpp"
#include "usvt/generators.hpp"
#include "usvt/linalg.hpp"
#include "usvt/matrix_io.hpp"
#include "usvt/rng.hpp"

namespace usvt {

inline constexpr int kReportSchema = 1;

// How data are drawn around a parameter matrix that has no inherent noise.
enum class NoiseModel {
  kNone,       // X = M
  kBernoulli,  // x_ij at an interval endpoint with mean m_ij
};

struct ZeroModel {
  double aspect = 1.0;  // rows = max(1, round(aspect * n))
};
struct LowRankModel {
  Eigen::Index rank = 1;
  double aspect = 1.0;
  NoiseModel noise = NoiseModel::kNone;
};
struct LowRankAdversaryModel {
  Eigen::Index rank = 1;
};
struct BlockModel {
  Eigen::Index blocks = 2;
  std::optional<Matrix> block_probs;  // default: 0.7 within, 0.2 across
};
struct DistanceModel {
  Eigen::Index dim = 1;
  Metric metric = Metric::kEuclidean;
  NoiseModel noise = NoiseModel::kNone;
};
struct LatentModel {
  Eigen::Index dim = 1;
  std::string kernel = "lipschitz_l1";
  NoiseModel noise = NoiseModel::kNone;
};
struct CorrelationModel {
  NoiseModel noise = NoiseModel::kNone;
};
struct GraphonModel {
  std::string graphon = "linear";
};
struct BradleyTerryModel {
  bool parametric = false;
  int games_per_pair = 1;
};
struct MinimaxModel {
  double theta = 0.1;  // delta = theta * m sqrt(n)
};

using ModelSpec = std::variant<ZeroModel, LowRankModel, LowRankAdversaryModel, BlockModel, DistanceModel,
                               LatentModel, CorrelationModel, GraphonModel, BradleyTerryModel, MinimaxModel>;

struct ExperimentSpec {
  ModelSpec model = ZeroModel{};
  std::vector<Eigen::Index> n_grid;
  std::vector<double> p_grid;
  double eta = 0.01;
  std::optional<double> sigma_sq;
  int trials = 1;
  Seed seed{};
  bool baseline_trivial = false;
  bool allow_zero_eta = false;

  void validate() const {
    if (n_grid.empty() || p_grid.empty()) throw ValidationError("experiment grids must be nonempty");
    if (trials < 1) throw ValidationError("trials must be >= 1");
    for (auto n : n_grid) {
      if (n < 1) throw ValidationError("grid sizes must be positive");
    }
    for (double p : p_grid) {
      if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("grid probabilities must lie in [0, 1]");
    }
  }
};

struct ExperimentCell {
  Eigen::Index n = 0;
  double p = 0.0;
  int trials_completed = 0;
  double mean_mse = 0.0;
  double std_mse = 0.0;
  double mean_retained_rank = 0.0;
  double bracket = 0.0;
  std::optional<double> trivial_mse;
  std::optional<std::string> failure;
  double wall_time = 0.0;  // seconds, summed over trials
};

struct CellFit {
  double p = 0.0;
  std::optional<RateFit> fit;
  std::optional<std::string> note;  // why no fit was possible
};

struct ExperimentReport {
  ExperimentSpec spec;
  std::vector<ExperimentCell> cells;  // n-major, p-minor
  std::vector<CellFit> fits;          // one per p
};

struct RunOptions {
  unsigned threads = 1;
  bool include_timing = false;
};

// ---------------------------------------------------------------------------
// Built-in kernel catalogs for the CLI

inline LatentKernel latent_kernel(const std::string& name) {
  if (name == "inner_product") {
    return [](const Vector& x, const Vector& y) { return x.dot(y) / static_cast<double>(x.size()); };
  }
  if (name == "lipschitz_l1") {
    return [](const Vector& x, const Vector& y) {
      return 1.0 - (x - y).lpNorm<1>() / static_cast<double>(x.size());
    };
  }
  if (name == "logistic") {
    return [](const Vector& x, const Vector& y) {
      return 1.0 / (1.0 + std::exp(-(x.sum() + y.sum() - static_cast<double>(x.size()))));
    };
  }
  throw ValidationError("unknown latent kernel '" + name + "'");
}

inline Graphon named_graphon(const std::string& name) {
  if (name == "linear") return [](double x, double y) { return 0.5 * (x + y); };
  if (name == "product") return [](double x, double y) { return x * y; };
  if (name == "min") return [](double x, double y) { return std::min(x, y); };
  if (name == "zero") return [](double, double) { return 0.0; };
  if (name == "one") return [](double, double) { return 1.0; };
  if (name == "dyadic") {
    // Piecewise constant on a 4 x 4 dyadic grid.
    return [](double x, double y) {
      const int a = std::min(3, static_cast<int>(x * 4.0));
      const int b = std::min(3, static_cast<int>(y * 4.0));
      return a == b ? 0.8 : 0.1 + 0.05 * (a + b);
    };
  }
  throw ValidationError("unknown graphon '" + name + "'");
}

inline Matrix default_block_probs(Eigen::Index k) {
  Matrix b = Matrix::Constant(k, k, 0.2);
  b.diagonal().setConstant(0.7);
  return b;
}

// ---------------------------------------------------------------------------
// Trials

struct TrialInstance {
  Matrix truth;
  MaskedMatrix data;
  SymmetryMode mode = SymmetryMode::kAsymmetric;
  std::optional<Interval> interval;
  double bracket = 0.0;
};

namespace detail {

enum Stream : std::uint64_t { kTruth = 0, kNoise = 1, kMask = 2, kPlay = 3 };

inline Matrix apply_noise(const Matrix& truth, NoiseModel noise, SymmetryMode mode, const Interval& iv, Seed seed) {
  if (noise == NoiseModel::kNone) return truth;
  return resample_data(truth, 1.0, mode, iv, ResampleModel::kBernoulliRound, seed).values;
}

inline Eigen::Index aspect_rows(double aspect, Eigen::Index n) {
  if (!(aspect > 0.0)) throw ValidationError("aspect must be positive");
  return std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::llround(aspect * static_cast<double>(n))));
}

inline double unit_cube_covering(Eigen::Index dim, double radius) {
  return std::pow(std::ceil(1.0 / radius), static_cast<double>(dim));
}

}  // namespace detail

// Builds the truth, the data, and the estimator setting for one trial.
// `shape_seed` drives everything independent of p; `mask_seed` the rest.
inline TrialInstance generate_trial(const ModelSpec& model, Eigen::Index n, double p, Seed shape_seed,
                                    Seed mask_seed) {
  using detail::kMask;
  using detail::kNoise;
  using detail::kPlay;
  using detail::kTruth;
  const Seed truth_seed = derive_seed(shape_seed, {kTruth});
  const Seed noise_seed = derive_seed(shape_seed, {kNoise});
  const Seed obs_seed = derive_seed(mask_seed, {kMask});
  const Interval unit{0.0, 1.0};
  const Interval sign{-1.0, 1.0};

  TrialInstance t;
  auto observe = [&](Matrix x, SymmetryMode mode) {
    Mask mask = bernoulli_mask(x.rows(), x.cols(), p, mode, obs_seed);
    t.data = MaskedMatrix{std::move(x), std::move(mask), mode};
    t.mode = mode;
  };

  std::visit(
      [&](const auto& spec) {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, ZeroModel>) {
          t.truth = Matrix::Zero(detail::aspect_rows(spec.aspect, n), n);
          observe(t.truth, SymmetryMode::kAsymmetric);
          t.bracket = 0.0;
        } else if constexpr (std::is_same_v<T, LowRankModel>) {
          const Eigen::Index m = detail::aspect_rows(spec.aspect, n);
          t.truth = gen_low_rank(m, n, spec.rank, truth_seed);
          observe(detail::apply_noise(t.truth, spec.noise, SymmetryMode::kAsymmetric, sign, noise_seed),
                  SymmetryMode::kAsymmetric);
          t.bracket = p > 0.0 ? lowrank_bracket(std::min(m, n), spec.rank, p) : 1.0;
        } else if constexpr (std::is_same_v<T, LowRankAdversaryModel>) {
          t.truth = gen_low_rank_adversary(n, n, spec.rank, truth_seed);
          observe(t.truth, SymmetryMode::kAsymmetric);
          t.bracket = lowrank_lower(n, spec.rank, p);
        } else if constexpr (std::is_same_v<T, BlockModel>) {
          const Matrix probs = spec.block_probs.value_or(default_block_probs(spec.blocks));
          BlockmodelSample s = gen_blockmodel(n, probs, std::nullopt, truth_seed);
          t.truth = std::move(s.m);
          observe(std::move(s.adjacency), SymmetryMode::kSymmetric);
          t.interval = unit;
          t.bracket = p > 0.0 ? lowrank_bracket(n, probs.rows(), p) : 1.0;
        } else if constexpr (std::is_same_v<T, DistanceModel>) {
          const auto points = sample_unit_cube(n, spec.dim, truth_seed);
          t.truth = gen_distance_matrix(points, spec.metric);
          observe(detail::apply_noise(t.truth, spec.noise, SymmetryMode::kSymmetric, unit, noise_seed),
                  SymmetryMode::kSymmetric);
          t.interval = unit;
          const Eigen::Index dim = spec.dim;
          t.bracket = p > 0.0 ? distance_bracket(n, p, [dim](double r) { return detail::unit_cube_covering(dim, r); })
                              : 1.0;
        } else if constexpr (std::is_same_v<T, LatentModel>) {
          LatentSample s = gen_latent_space(n, spec.dim, latent_kernel(spec.kernel), truth_seed);
          t.truth = std::move(s.m);
          t.interval = unit;
          observe(detail::apply_noise(t.truth, spec.noise, SymmetryMode::kSymmetric, unit, noise_seed),
                  SymmetryMode::kSymmetric);
          t.bracket = p > 0.0 ? lipschitz_latent_bracket(n, p, spec.dim) : 1.0;
        } else if constexpr (std::is_same_v<T, CorrelationModel>) {
          t.truth = gen_correlation_matrix(n, truth_seed);
          t.interval = unit;
          observe(detail::apply_noise(t.truth, spec.noise, SymmetryMode::kSymmetric, unit, noise_seed),
                  SymmetryMode::kSymmetric);
          t.bracket = p > 0.0 ? psd_bracket(n, p) : 1.0;
        } else if constexpr (std::is_same_v<T, GraphonModel>) {
          GraphonSample s = gen_graphon(n, named_graphon(spec.graphon), truth_seed);
          t.truth = std::move(s.m);
          t.interval = unit;
          observe(std::move(s.adjacency), SymmetryMode::kSymmetric);
          t.bracket = p > 0.0 ? mainest_bracket(t.truth, p).bracket : 1.0;
        } else if constexpr (std::is_same_v<T, BradleyTerryModel>) {
          TournamentFamily family = NonparametricMonotone{};
          if (spec.parametric) {
            Rng rng(derive_seed(truth_seed, {1}));
            ParametricStrengths strengths;
            strengths.strengths.resize(static_cast<std::size_t>(n));
            for (auto& a : strengths.strengths) a = std::exp(rng.uniform(-2.0, 2.0));
            family = std::move(strengths);
          }
          TournamentModel tm = gen_bradley_terry(n, family, truth_seed);
          t.data = play_tournament(tm, p, spec.games_per_pair, derive_seed(mask_seed, {kPlay}));
          t.truth = std::move(tm.p);
          t.mode = SymmetryMode::kSkewSymmetric;
          t.interval = unit;
          t.bracket = p > 0.0 ? bradley_bracket(n, p) : 1.0;
        } else if constexpr (std::is_same_v<T, MinimaxModel>) {
          const double delta = spec.theta * static_cast<double>(n) * std::sqrt(static_cast<double>(n));
          MinimaxInstance inst = gen_minimax_instance(n, n, delta, p, truth_seed);
          t.truth = std::move(inst.m_matrix);
          observe(t.truth, SymmetryMode::kAsymmetric);
          t.bracket = minimax_bracket(delta, n, n, p);
        }
      },
      model);
  return t;
}

namespace detail {

struct TrialOutcome {
  bool ok = false;
  std::string error;
  double mse = 0.0;
  double trivial_mse = 0.0;
  double retained_rank = 0.0;
  double bracket = 0.0;
  double seconds = 0.0;
};

inline TrialOutcome run_trial(const ExperimentSpec& spec, std::size_t ni, std::size_t pi, int trial) {
  TrialOutcome out;
  const auto start = std::chrono::steady_clock::now();
  try {
    const auto t = static_cast<std::uint64_t>(trial);
    const Seed shape_seed = derive_seed(spec.seed, {ni, t});
    const Seed mask_seed = derive_seed(spec.seed, {ni, pi, t});
    const TrialInstance inst = generate_trial(spec.model, spec.n_grid[ni], spec.p_grid[pi], shape_seed, mask_seed);
    EstimatorConfig config;
    config.eta = spec.eta;
    config.sigma_sq = spec.sigma_sq;
    config.interval = inst.interval;
    config.mode = inst.mode;
    config.allow_zero_eta = spec.allow_zero_eta;
    const EstimateReport est = usvt_estimate(inst.data, config);
    out.mse = mse(est.estimate, inst.truth);
    out.retained_rank = static_cast<double>(est.retained_rank);
    out.bracket = inst.bracket;
    if (spec.baseline_trivial) out.trivial_mse = mse(trivial_estimate(inst.data, config), inst.truth);
    out.ok = true;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace detail

inline ExperimentReport run_experiment(const ExperimentSpec& spec, const RunOptions& options = {}) {
  spec.validate();
  EstimatorConfig probe;
  probe.eta = spec.eta;
  probe.sigma_sq = spec.sigma_sq;
  probe.allow_zero_eta = spec.allow_zero_eta;
  probe.validate();

  const std::size_t n_count = spec.n_grid.size();
  const std::size_t p_count = spec.p_grid.size();
  const std::size_t trials = static_cast<std::size_t>(spec.trials);
  const std::size_t total = n_count * p_count * trials;
  std::vector<detail::TrialOutcome> outcomes(total);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next.fetch_add(1); k < total; k = next.fetch_add(1)) {
      const std::size_t cell = k / trials;
      outcomes[k] = detail::run_trial(spec, cell / p_count, cell % p_count, static_cast<int>(k % trials));
    }
  };
  const unsigned workers = std::max(1u, options.threads);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  ExperimentReport report;
  report.spec = spec;
  for (std::size_t ni = 0; ni < n_count; ++ni) {
    for (std::size_t pi = 0; pi < p_count; ++pi) {
      ExperimentCell cell;
      cell.n = spec.n_grid[ni];
      cell.p = spec.p_grid[pi];
      const std::size_t base = (ni * p_count + pi) * trials;
      double sum = 0.0, trivial_sum = 0.0, rank_sum = 0.0, bracket_sum = 0.0;
      for (std::size_t t = 0; t < trials; ++t) {
        const auto& o = outcomes[base + t];
        if (options.include_timing) cell.wall_time += o.seconds;
        if (cell.failure) continue;
        if (!o.ok) {
          cell.failure = "trial " + std::to_string(t) + ": " + o.error;
          continue;
        }
        ++cell.trials_completed;
        sum += o.mse;
        trivial_sum += o.trivial_mse;
        rank_sum += o.retained_rank;
        bracket_sum += o.bracket;
      }
      if (!cell.failure) {
        const double k = static_cast<double>(trials);
        cell.mean_mse = sum / k;
        cell.mean_retained_rank = rank_sum / k;
        cell.bracket = bracket_sum / k;
        if (spec.baseline_trivial) cell.trivial_mse = trivial_sum / k;
        double ss = 0.0;
        for (std::size_t t = 0; t < trials; ++t) {
          const double d = outcomes[base + t].mse - cell.mean_mse;
          ss += d * d;
        }
        cell.std_mse = trials > 1 ? std::sqrt(ss / (k - 1.0)) : 0.0;
      } else {
        cell.trials_completed = 0;
      }
      report.cells.push_back(std::move(cell));
    }
  }

  for (std::size_t pi = 0; pi < p_count; ++pi) {
    CellFit fit;
    fit.p = spec.p_grid[pi];
    std::vector<double> ns, mses;
    bool usable = true;
    for (std::size_t ni = 0; ni < n_count; ++ni) {
      const auto& cell = report.cells[ni * p_count + pi];
      if (cell.failure || !(cell.mean_mse > 0.0)) {
        usable = false;
        break;
      }
      ns.push_back(static_cast<double>(cell.n));
      mses.push_back(cell.mean_mse);
    }
    if (!usable) {
      fit.note = "a cell failed or has zero mean MSE";
    } else if (ns.size() < 3) {
      fit.note = "fewer than 3 grid sizes";
    } else {
      try {
        fit.fit = rate_fit(ns, mses);
      } catch (const ValidationError& e) {
        fit.note = e.what();
      }
    }
    report.fits.push_back(std::move(fit));
  }
  return report;
}

// ---------------------------------------------------------------------------
// JSON / CSV

namespace detail {

inline const char* noise_name(NoiseModel n) { return n == NoiseModel::kNone ? "none" : "bernoulli"; }

inline NoiseModel parse_noise(const nlohmann::json& j) {
  const std::string name = j.value("noise", std::string("none"));
  if (name == "none") return NoiseModel::kNone;
  if (name == "bernoulli") return NoiseModel::kBernoulli;
  throw ValidationError("unknown noise model '" + name + "'");
}

inline const char* metric_name(Metric m) {
  switch (m) {
    case Metric::kEuclidean: return "euclidean";
    case Metric::kManhattan: return "manhattan";
    case Metric::kChebyshev: return "chebyshev";
  }
  return "euclidean";
}

inline nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) throw ValidationError("expected a nested array matrix");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) throw ValidationError("ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

}  // namespace detail

inline nlohmann::json model_to_json(const ModelSpec& model) {
  using nlohmann::json;
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ZeroModel>) {
          return {{"family", "zero"}, {"aspect", s.aspect}};
        } else if constexpr (std::is_same_v<T, LowRankModel>) {
          return {{"family", "low_rank"}, {"rank", s.rank}, {"aspect", s.aspect}, {"noise", detail::noise_name(s.noise)}};
        } else if constexpr (std::is_same_v<T, LowRankAdversaryModel>) {
          return {{"family", "low_rank_adversary"}, {"rank", s.rank}};
        } else if constexpr (std::is_same_v<T, BlockModel>) {
          return {{"family", "blockmodel"},
                  {"k", s.blocks},
                  {"block_probs", detail::matrix_to_json(s.block_probs.value_or(default_block_probs(s.blocks)))}};
        } else if constexpr (std::is_same_v<T, DistanceModel>) {
          return {{"family", "distance"}, {"dim", s.dim}, {"metric", detail::metric_name(s.metric)},
                  {"noise", detail::noise_name(s.noise)}};
        } else if constexpr (std::is_same_v<T, LatentModel>) {
          return {{"family", "latent"}, {"dim", s.dim}, {"kernel", s.kernel}, {"noise", detail::noise_name(s.noise)}};
        } else if constexpr (std::is_same_v<T, CorrelationModel>) {
          return {{"family", "correlation"}, {"noise", detail::noise_name(s.noise)}};
        } else if constexpr (std::is_same_v<T, GraphonModel>) {
          return {{"family", "graphon"}, {"graphon", s.graphon}};
        } else if constexpr (std::is_same_v<T, BradleyTerryModel>) {
          return {{"family", "bradley_terry"},
                  {"variant", s.parametric ? "parametric" : "nonparametric"},
                  {"games_per_pair", s.games_per_pair}};
        } else {
          return {{"family", "minimax"}, {"theta", s.theta}};
        }
      },
      model);
}

inline ModelSpec model_from_json(const nlohmann::json& j) {
  const std::string family = j.at("family").get<std::string>();
  if (family == "zero") return ZeroModel{j.value("aspect", 1.0)};
  if (family == "low_rank") {
    return LowRankModel{j.value("rank", Eigen::Index{1}), j.value("aspect", 1.0), detail::parse_noise(j)};
  }
  if (family == "low_rank_adversary") return LowRankAdversaryModel{j.value("rank", Eigen::Index{1})};
  if (family == "blockmodel") {
    BlockModel b;
    b.blocks = j.value("k", Eigen::Index{2});
    if (j.contains("block_probs")) {
      b.block_probs = detail::matrix_from_json(j.at("block_probs"));
      if (b.block_probs->rows() != b.blocks) throw ValidationError("block_probs must be k x k");
    }
    return b;
  }
  if (family == "distance") {
    return DistanceModel{j.value("dim", Eigen::Index{1}), parse_metric(j.value("metric", std::string("euclidean"))),
                         detail::parse_noise(j)};
  }
  if (family == "latent") {
    return LatentModel{j.value("dim", Eigen::Index{1}), j.value("kernel", std::string("lipschitz_l1")),
                       detail::parse_noise(j)};
  }
  if (family == "correlation") return CorrelationModel{detail::parse_noise(j)};
  if (family == "graphon") return GraphonModel{j.value("graphon", std::string("linear"))};
  if (family == "bradley_terry") {
    const std::string variant = j.value("variant", std::string("nonparametric"));
    if (variant != "parametric" && variant != "nonparametric") {
      throw ValidationError("bradley_terry variant must be parametric or nonparametric");
    }
    return BradleyTerryModel{variant == "parametric", j.value("games_per_pair", 1)};
  }
  if (family == "minimax") return MinimaxModel{j.value("theta", 0.1)};
  throw ValidationError("unknown model family '" + family + "'");
}

inline nlohmann::json spec_to_json(const ExperimentSpec& spec) {
  nlohmann::json j;
  j["schema"] = kReportSchema;
  j["model"] = model_to_json(spec.model);
  j["n_grid"] = spec.n_grid;
  j["p_grid"] = spec.p_grid;
  j["eta"] = spec.eta;
  j["sigma_sq"] = spec.sigma_sq ? nlohmann::json(*spec.sigma_sq) : nlohmann::json(nullptr);
  j["trials"] = spec.trials;
  j["seed"] = spec.seed.value;
  j["baseline_trivial"] = spec.baseline_trivial;
  j["allow_zero_eta"] = spec.allow_zero_eta;
  return j;
}

inline ExperimentSpec spec_from_json(const nlohmann::json& j) {
  try {
    if (j.contains("schema") && j.at("schema").get<int>() != kReportSchema) {
      throw ValidationError("unsupported spec schema " + j.at("schema").dump());
    }
    ExperimentSpec spec;
    spec.model = model_from_json(j.at("model"));
    spec.n_grid = j.at("n_grid").get<std::vector<Eigen::Index>>();
    spec.p_grid = j.value("p_grid", std::vector<double>{1.0});
    spec.eta = j.value("eta", 0.01);
    if (j.contains("sigma_sq") && !j.at("sigma_sq").is_null()) spec.sigma_sq = j.at("sigma_sq").get<double>();
    spec.trials = j.value("trials", 1);
    spec.seed = Seed{j.value("seed", std::uint64_t{0})};
    spec.baseline_trivial = j.value("baseline_trivial", false);
    spec.allow_zero_eta = j.value("allow_zero_eta", false);
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("experiment spec: ") + e.what());
  }
}

inline nlohmann::json report_to_json(const ExperimentReport& report, const RunOptions& options = {}) {
  using nlohmann::json;
  json j;
  j["schema"] = kReportSchema;
  j["spec"] = spec_to_json(report.spec);
  json cells = json::array();
  for (const auto& c : report.cells) {
    json cj;
    cj["n"] = c.n;
    cj["p"] = c.p;
    cj["trials_completed"] = c.trials_completed;
    if (c.failure) {
      cj["failure"] = *c.failure;
      cj["mean_mse"] = nullptr;
      cj["std_mse"] = nullptr;
      cj["mean_retained_rank"] = nullptr;
      cj["bracket"] = nullptr;
      cj["trivial_mse"] = nullptr;
    } else {
      cj["failure"] = nullptr;
      cj["mean_mse"] = c.mean_mse;
      cj["std_mse"] = c.std_mse;
      cj["mean_retained_rank"] = c.mean_retained_rank;
      cj["bracket"] = c.bracket;
      cj["trivial_mse"] = c.trivial_mse ? json(*c.trivial_mse) : json(nullptr);
    }
    if (options.include_timing) cj["wall_time"] = c.wall_time;
    cells.push_back(std::move(cj));
  }
  j["cells"] = std::move(cells);
  json fits = json::array();
  for (const auto& f : report.fits) {
    json fj;
    fj["p"] = f.p;
    if (f.fit) {
      fj["slope"] = f.fit->slope;
      fj["intercept"] = f.fit->intercept;
      fj["r_squared"] = f.fit->r_squared;
    } else {
      fj["slope"] = nullptr;
      fj["note"] = f.note.value_or("");
    }
    fits.push_back(std::move(fj));
  }
  j["fits"] = std::move(fits);
  return j;
}

// One row per grid cell; empty fields for missing values.
inline void write_report_csv(std::ostream& out, const ExperimentReport& report, const RunOptions& options = {}) {
  out << "n,p,trials_completed,mean_mse,std_mse,mean_retained_rank,bracket,trivial_mse,failure";
  if (options.include_timing) out << ",wall_time";
  out << '\n';
  for (const auto& c : report.cells) {
    out << c.n << ',' << format_real(c.p) << ',' << c.trials_completed << ',';
    if (c.failure) {
      std::string reason = *c.failure;
      for (char& ch : reason) {
        if (ch == ',' || ch == '\n' || ch == '"') ch = ' ';
      }
      out << ",,,,," << reason;
    } else {
      out << format_real(c.mean_mse) << ',' << format_real(c.std_mse) << ',' << format_real(c.mean_retained_rank)
          << ',' << format_real(c.bracket) << ',' << (c.trivial_mse ? format_real(*c.trivial_mse) : "") << ',';
    }
    if (options.include_timing) out << ',' << format_real(c.wall_time);
    out << '\n';
  }
}

}  // namespace usvt
