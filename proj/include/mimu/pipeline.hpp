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

#ifndef MIMU_PIPELINE_HPP
#define MIMU_PIPELINE_HPP

#include <optional>
#include <string>
#include <vector>

#include "mimu/log_io.hpp"

namespace mimu {

/// Filter run description, loaded from the versioned run-config JSON.
struct RunConfig {
  std::string robot;         // robot description path
  std::string filter{"5-imu-ekm"};  // 5-imu-ekm | 1-imu | 1-imu-ekm
  NoiseConfig noise;
  ContactDetectorConfig contact;
  InitialStd initial_std;
  std::string initial_state{"truth"};  // truth | static
  double foothold_process_noise{1e-6};
  uint64_t seed{0};
  std::string output;

  static RunConfig from_json_file(const std::string& path);
  static RunConfig from_json(const nlohmann::json& j,
                             const std::string& base_dir);
};

/// Gait simulation input: robot + gait + sensor noise + seed.
struct SimulationSpec {
  std::string robot;
  GaitSpec gait;
  NoiseConfig noise;
  uint64_t seed{1};

  static SimulationSpec from_json_file(const std::string& path);
};

struct SimulateOutcome {
  int rows{};
  int steps{};
};
/// Generates a gait and writes the sensor log and ground truth CSVs.
SimulateOutcome run_simulate(const SimulationSpec& spec,
                             const std::string& log_path,
                             const std::string& truth_path,
                             std::optional<uint64_t> seed_override = {},
                             bool write_tilt = true);

struct EstimateOutcome {
  int rows{};
  double wall_seconds{};
  double mean_tick_ms{};
};
/// Streams a sensor log through the selected filter, writing one estimate
/// row per input tick. Truth is required for the "truth" initial-state
/// policy (first row used).
EstimateOutcome run_estimate(const RunConfig& config,
                             const std::string& log_path,
                             const std::string& truth_path,
                             const std::string& out_path);

/// Metrics of an estimate against the ground truth, on `link` (default:
/// the first estimated link of the estimate file).
metrics::Report run_evaluate(const std::string& estimate_path,
                             const std::string& truth_path,
                             const std::string& link = "",
                             double rpe_window = 0.5);

struct CompareEntry {
  std::string name;
  metrics::Report report;
};
struct CompareOutcome {
  std::vector<CompareEntry> entries;
  std::string table;  // rendered text table
};
/// Simulates one gait, runs every configured filter on the same log, and
/// evaluates them. Writes log/truth/estimates/metrics, a text and JSON
/// table, and a per-tick XY/Z error CSV under `out_dir`.
CompareOutcome run_compare(const std::string& compare_config_path,
                           const std::string& out_dir,
                           std::optional<uint64_t> seed_override = {});

}  // namespace mimu

#endif  // MIMU_PIPELINE_HPP
