// Copyright 2026 The mimu Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "mimu/json_util.hpp"
#include "mimu/pipeline.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kRuntimeError = 1;
constexpr int kInvalidInput = 2;

std::optional<uint64_t> seed_option(const CLI::Option* opt, uint64_t value) {
  if (opt->count() == 0) return std::nullopt;
  return value;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-IMU legged-robot state estimation toolkit"};
  app.require_subcommand(1);

  // simulate
  std::string sim_config, sim_out = "out/sim", sim_log, sim_truth;
  uint64_t sim_seed = 0;
  bool sim_no_tilt = false;
  auto* simulate = app.add_subcommand(
      "simulate", "generate a gait: sensor log + ground truth CSVs");
  simulate->add_option("--config", sim_config, "simulation spec JSON")
      ->required();
  simulate->add_option("--out", sim_out,
                       "output prefix (writes <out>_log.csv, <out>_truth.csv)");
  simulate->add_option("--out-log", sim_log, "explicit sensor log path");
  simulate->add_option("--out-truth", sim_truth, "explicit truth path");
  auto* sim_seed_opt =
      simulate->add_option("--seed", sim_seed, "override the spec seed");
  simulate->add_flag("--no-tilt", sim_no_tilt,
                     "omit tilt columns (exercises the fallback tilt filter)");

  // estimate
  std::string est_config, est_log, est_truth, est_out = "estimate.csv";
  std::string est_filter;
  auto* estimate =
      app.add_subcommand("estimate", "run a filter over a sensor log");
  estimate->add_option("--config", est_config, "run config JSON")->required();
  estimate->add_option("--log", est_log, "sensor log CSV")->required();
  estimate->add_option("--truth", est_truth,
                       "ground truth CSV (required for truth initialization)");
  estimate->add_option("--out", est_out, "output trajectory CSV");
  estimate->add_option("--filter", est_filter,
                       "override the configured filter selection");

  // evaluate
  std::string eval_est, eval_truth, eval_out, eval_link;
  double eval_window = 0.5;
  auto* evaluate =
      app.add_subcommand("evaluate", "trajectory metrics vs ground truth");
  evaluate->add_option("--est", eval_est, "estimate CSV")->required();
  evaluate->add_option("--truth", eval_truth, "ground truth CSV")->required();
  evaluate->add_option("--out", eval_out, "metrics JSON path (default stdout)");
  evaluate->add_option("--link", eval_link, "link to evaluate (IMU name)");
  evaluate->add_option("--window", eval_window, "RPE window, s");

  // compare
  std::string cmp_config, cmp_out = "out/compare";
  uint64_t cmp_seed = 0;
  auto* compare = app.add_subcommand(
      "compare", "simulate once, run every filter, tabulate the metrics");
  compare->add_option("--config", cmp_config, "compare config JSON")
      ->required();
  compare->add_option("--out", cmp_out, "output directory");
  auto* cmp_seed_opt =
      compare->add_option("--seed", cmp_seed, "override the config seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalidInput;
  }

  try {
    if (simulate->parsed()) {
      const auto spec = mimu::SimulationSpec::from_json_file(sim_config);
      std::string log_path = sim_log, truth_path = sim_truth;
      if (log_path.empty()) log_path = sim_out + "_log.csv";
      if (truth_path.empty()) truth_path = sim_out + "_truth.csv";
      const auto dir = std::filesystem::path(log_path).parent_path();
      if (!dir.empty()) std::filesystem::create_directories(dir);
      const auto outcome =
          mimu::run_simulate(spec, log_path, truth_path,
                             seed_option(sim_seed_opt, sim_seed), !sim_no_tilt);
      std::printf("wrote %d rows (%d steps): %s, %s\n", outcome.rows,
                  outcome.steps, log_path.c_str(), truth_path.c_str());
    } else if (estimate->parsed()) {
      mimu::RunConfig config = mimu::RunConfig::from_json_file(est_config);
      if (!est_filter.empty()) {
        if (est_filter != "5-imu-ekm" && est_filter != "1-imu" &&
            est_filter != "1-imu-ekm") {
          throw mimu::InvalidInput("--filter must be 5-imu-ekm, 1-imu or 1-imu-ekm");
        }
        config.filter = est_filter;
      }
      if (est_out.empty() && !config.output.empty()) est_out = config.output;
      const auto outcome =
          mimu::run_estimate(config, est_log, est_truth, est_out);
      std::printf("wrote %d rows to %s (%.2f s wall, %.3f ms/tick)\n",
                  outcome.rows, est_out.c_str(), outcome.wall_seconds,
                  outcome.mean_tick_ms);
    } else if (evaluate->parsed()) {
      const auto report =
          mimu::run_evaluate(eval_est, eval_truth, eval_link, eval_window);
      const std::string text = mimu::metrics::to_json(report).dump(2);
      if (eval_out.empty()) {
        std::printf("%s\n", text.c_str());
      } else {
        std::ofstream out(eval_out);
        if (!out) throw mimu::InvalidInput("cannot write " + eval_out);
        out << text << "\n";
        std::printf("wrote %s\n", eval_out.c_str());
      }
    } else if (compare->parsed()) {
      const auto outcome = mimu::run_compare(
          cmp_config, cmp_out, seed_option(cmp_seed_opt, cmp_seed));
      std::printf("%s", outcome.table.c_str());
      std::printf("outputs in %s\n", cmp_out.c_str());
    }
  } catch (const mimu::InvalidInput& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInvalidInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntimeError;
  }
  return kOk;
}
