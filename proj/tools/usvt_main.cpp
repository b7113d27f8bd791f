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

// usvt: command-line front end.
//
//   usvt estimate INPUT.csv --out OUT.csv [--report OUT.json] ...
//   usvt run SPEC.json --out DIR [--threads N] ...
//   usvt check [--selector NAME] [--cases N] [--negative-control]
//
// Exit codes: 0 success, 1 validation error, 2 property failure, 3 I/O error.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "usvt/usvt.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitProperty = 2;
constexpr int kExitIo = 3;

struct EstimatorFlags {
  double eta = 0.01;
  std::optional<double> sigma_sq;
  std::vector<double> interval;
  std::string mode = "asym";
  bool allow_zero_eta = false;
};

void add_estimator_flags(CLI::App* cmd, EstimatorFlags& f) {
  cmd->add_option("--eta", f.eta, "Threshold slack eta")->capture_default_str();
  cmd->add_option("--sigma-sq", f.sigma_sq, "Known variance bound on the [-1,1] scale");
  cmd->add_option("--interval", f.interval, "Value interval a b")->expected(2);
  cmd->add_option("--mode", f.mode, "Observation model")
      ->check(CLI::IsMember({"asym", "sym", "skew"}))
      ->capture_default_str();
  cmd->add_flag("--allow-zero-eta", f.allow_zero_eta, "Permit eta = 0 (exploratory)");
}

usvt::EstimatorConfig to_config(const EstimatorFlags& f) {
  usvt::EstimatorConfig c;
  c.eta = f.eta;
  c.sigma_sq = f.sigma_sq;
  if (!f.interval.empty()) c.interval = usvt::Interval{f.interval[0], f.interval[1]};
  c.mode = usvt::parse_symmetry_mode(f.mode);
  c.allow_zero_eta = f.allow_zero_eta;
  return c;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw usvt::IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw usvt::IoError("write failure on '" + path + "'");
}

int cmd_estimate(const std::string& input, const std::string& output, std::string report_path, bool header,
                 const EstimatorFlags& flags) {
  const usvt::EstimatorConfig config = to_config(flags);
  usvt::MaskedMatrix data = usvt::read_matrix_csv_file(input, header);
  data.mode = config.mode;
  const usvt::EstimateReport r = usvt::usvt_estimate(data, config);
  usvt::write_matrix_csv_file(output, r.estimate, nullptr, header);

  nlohmann::json j;
  j["schema"] = usvt::kReportSchema;
  j["rows"] = r.estimate.rows();
  j["cols"] = r.estimate.cols();
  j["mode"] = std::string(usvt::to_string(config.mode));
  j["eta"] = config.eta;
  j["sigma_sq"] = config.sigma_sq ? nlohmann::json(*config.sigma_sq) : nlohmann::json(nullptr);
  const usvt::Interval iv = config.effective_interval();
  j["interval"] = {iv.lo, iv.hi};
  j["p_hat"] = r.p_hat;
  j["q_hat"] = r.q_hat ? nlohmann::json(*r.q_hat) : nlohmann::json(nullptr);
  j["threshold"] = r.threshold;
  j["retained_rank"] = r.retained_rank;
  j["retained_indices"] = r.retained_indices;
  j["n"] = r.n;
  j["transposed"] = r.transposed;
  j["no_data"] = r.no_data;
  if (report_path.empty()) report_path = output + ".json";
  write_text(report_path, j.dump(2) + "\n");
  if (r.no_data) std::cerr << "warning: no observed entries; wrote the interval midpoint\n";
  return kExitOk;
}

int cmd_run(const std::string& spec_path, const std::string& out_dir, unsigned threads, bool timing,
            std::optional<std::uint64_t> seed, std::optional<int> trials, std::optional<double> eta,
            std::optional<double> sigma_sq) {
  std::ifstream in(spec_path);
  if (!in) throw usvt::IoError("cannot open '" + spec_path + "' for reading");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw usvt::ValidationError(std::string("experiment spec: ") + e.what());
  }
  usvt::ExperimentSpec spec = usvt::spec_from_json(j);
  if (seed) spec.seed = usvt::Seed{*seed};
  if (trials) spec.trials = *trials;
  if (eta) spec.eta = *eta;
  if (sigma_sq) spec.sigma_sq = *sigma_sq;

  const usvt::RunOptions options{threads, timing};
  const usvt::ExperimentReport report = usvt::run_experiment(spec, options);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw usvt::IoError("cannot create '" + out_dir + "': " + ec.message());
  write_text(out_dir + "/report.json", usvt::report_to_json(report, options).dump(2) + "\n");
  std::ostringstream csv;
  usvt::write_report_csv(csv, report, options);
  write_text(out_dir + "/report.csv", csv.str());

  int failed = 0;
  for (const auto& c : report.cells) {
    std::cout << "n=" << c.n << " p=" << c.p;
    if (c.failure) {
      ++failed;
      std::cout << " FAILED: " << *c.failure << '\n';
    } else {
      std::cout << " mean_mse=" << c.mean_mse << " rank=" << c.mean_retained_rank << " bracket=" << c.bracket;
      if (c.trivial_mse) std::cout << " trivial_mse=" << *c.trivial_mse;
      std::cout << '\n';
    }
  }
  for (const auto& f : report.fits) {
    if (f.fit) std::cout << "p=" << f.p << " slope=" << f.fit->slope << " r2=" << f.fit->r_squared << '\n';
  }
  return failed ? kExitValidation : kExitOk;
}

int cmd_check(const usvt::CheckOptions& options, const std::string& out_path) {
  const usvt::CheckReport report = usvt::check_suite(options);
  nlohmann::json j;
  j["schema"] = usvt::kReportSchema;
  j["ok"] = report.ok();
  j["properties"] = nlohmann::json::array();
  for (const auto& p : report.properties) {
    std::cout << (p.ok() ? "PASS " : "FAIL ") << p.name << ' ' << p.passed << '/' << p.cases;
    if (p.first_failure) std::cout << "  first failure: " << *p.first_failure;
    std::cout << '\n';
    j["properties"].push_back({{"name", p.name},
                               {"cases", p.cases},
                               {"passed", p.passed},
                               {"first_failure", p.first_failure ? nlohmann::json(*p.first_failure) : nlohmann::json(nullptr)}});
  }
  if (!out_path.empty()) write_text(out_path, j.dump(2) + "\n");
  return report.ok() ? kExitOk : kExitProperty;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Universal singular value thresholding: estimation, experiments, property checks"};
  app.require_subcommand(1);

  auto* estimate = app.add_subcommand("estimate", "Estimate the mean matrix of a CSV data file (NA = missing)");
  std::string input, output, report_path;
  bool header = false;
  EstimatorFlags est_flags;
  estimate->add_option("input", input, "Input CSV")->required();
  estimate->add_option("--out", output, "Output CSV for the estimate")->required();
  estimate->add_option("--report", report_path, "Diagnostics JSON (default: <out>.json)");
  estimate->add_flag("--header", header, "Input has a header row; output gets one too");
  add_estimator_flags(estimate, est_flags);

  auto* run = app.add_subcommand("run", "Run an experiment spec and write report.json / report.csv");
  std::string spec_path, out_dir;
  unsigned threads = 1;
  bool timing = false;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<double> eta, sigma_sq;
  run->add_option("spec", spec_path, "Experiment spec JSON")->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--threads", threads, "Worker threads")->capture_default_str();
  run->add_flag("--timing", timing, "Include wall times (reports are then not reproducible)");
  run->add_option("--seed", seed, "Override the spec seed");
  run->add_option("--trials", trials, "Override the trial count");
  run->add_option("--eta", eta, "Override eta");
  run->add_option("--sigma-sq", sigma_sq, "Override the variance bound");

  auto* check = app.add_subcommand("check", "Run property batteries");
  usvt::CheckOptions check_opts;
  std::string check_out;
  std::vector<std::string> selectors{"all"};
  for (const auto& b : usvt::battery_names()) selectors.push_back(b);
  check->add_option("--selector", check_opts.selector, "Property set")
      ->check(CLI::IsMember(selectors))
      ->capture_default_str();
  check->add_option("--cases", check_opts.cases, "Cases per battery (0 = default)");
  check->add_option("--seed", check_opts.seed.value, "Seed")->capture_default_str();
  check->add_flag("--negative-control", check_opts.negative_control, "Corrupt one fixture per property");
  check->add_option("--out", check_out, "Write results as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*estimate) return cmd_estimate(input, output, report_path, header, est_flags);
    if (*run) return cmd_run(spec_path, out_dir, threads, timing, seed, trials, eta, sigma_sq);
    if (*check) return cmd_check(check_opts, check_out);
  } catch (const usvt::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const usvt::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const usvt::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}
