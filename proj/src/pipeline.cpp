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

#include "mimu/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include "mimu/json_util.hpp"

namespace mimu {
namespace {

namespace fs = std::filesystem;

std::string resolve(const std::string& base_dir, const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base_dir) / path).string();
}

ContactDetectorConfig contact_from_json(const nlohmann::json& j) {
  jsonu::require_keys_in(j, {"threshold_n", "hysteresis_n", "debounce_s"},
                         "contact");
  ContactDetectorConfig c;
  c.threshold = jsonu::get_number_or(j, "threshold_n", c.threshold);
  c.hysteresis = jsonu::get_number_or(j, "hysteresis_n", c.hysteresis);
  c.debounce = jsonu::get_number_or(j, "debounce_s", c.debounce);
  if (c.threshold <= 0 || c.hysteresis < 0 || c.hysteresis >= c.threshold ||
      c.debounce < 0) {
    throw InvalidInput("contact: invalid threshold/hysteresis/debounce");
  }
  return c;
}

InitialStd initial_std_from_json(const nlohmann::json& j) {
  jsonu::require_keys_in(j,
                         {"orientation_rad", "position_m", "velocity_mps",
                          "gyro_bias", "accel_bias"},
                         "initial_std");
  InitialStd s;
  s.orientation = jsonu::get_number_or(j, "orientation_rad", s.orientation);
  s.position = jsonu::get_number_or(j, "position_m", s.position);
  s.velocity = jsonu::get_number_or(j, "velocity_mps", s.velocity);
  s.gyro_bias = jsonu::get_number_or(j, "gyro_bias", s.gyro_bias);
  s.accel_bias = jsonu::get_number_or(j, "accel_bias", s.accel_bias);
  return s;
}

LinkState truth_to_state(const LinkState& x) { return x; }

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& j,
                               const std::string& base_dir) {
  jsonu::require_keys_in(j,
                         {"schema_version", "robot", "filter", "noise",
                          "contact", "initial_state", "initial_std",
                          "foothold_process_noise", "seed", "output"},
                         "run config");
  jsonu::require_schema_version(j, 1, "run config");
  RunConfig c;
  if (!j.contains("robot")) throw InvalidInput("run config: missing robot");
  c.robot = resolve(base_dir, j.at("robot").get<std::string>());
  c.filter = j.value("filter", c.filter);
  if (c.filter != "5-imu-ekm" && c.filter != "1-imu" && c.filter != "1-imu-ekm") {
    throw InvalidInput("run config: filter must be 5-imu-ekm, 1-imu or 1-imu-ekm");
  }
  if (j.contains("noise")) {
    c.noise = NoiseConfig::from_json(j.at("noise"), "run config noise");
  }
  if (j.contains("contact")) c.contact = contact_from_json(j.at("contact"));
  if (j.contains("initial_std")) {
    c.initial_std = initial_std_from_json(j.at("initial_std"));
  }
  c.initial_state = j.value("initial_state", c.initial_state);
  if (c.initial_state != "truth" && c.initial_state != "static") {
    throw InvalidInput("run config: initial_state must be truth or static");
  }
  c.foothold_process_noise =
      jsonu::get_number_or(j, "foothold_process_noise", c.foothold_process_noise);
  c.seed = j.value("seed", c.seed);
  c.output = j.value("output", std::string());
  return c;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
  return from_json(jsonu::load_file(path), fs::path(path).parent_path().string());
}

SimulationSpec SimulationSpec::from_json_file(const std::string& path) {
  const nlohmann::json j = jsonu::load_file(path);
  jsonu::require_keys_in(j, {"schema_version", "robot", "gait", "noise", "seed"},
                         "simulation spec");
  jsonu::require_schema_version(j, 1, "simulation spec");
  SimulationSpec s;
  if (!j.contains("robot")) throw InvalidInput("simulation spec: missing robot");
  s.robot = resolve(fs::path(path).parent_path().string(),
                    j.at("robot").get<std::string>());
  if (!j.contains("gait")) throw InvalidInput("simulation spec: missing gait");
  s.gait = GaitSpec::from_json(j.at("gait"));
  if (j.contains("noise")) {
    s.noise = NoiseConfig::from_json(j.at("noise"), "simulation noise");
  }
  s.seed = j.value("seed", s.seed);
  return s;
}

SimulateOutcome run_simulate(const SimulationSpec& spec,
                             const std::string& log_path,
                             const std::string& truth_path,
                             std::optional<uint64_t> seed_override,
                             bool write_tilt) {
  const KinematicChain chain = KinematicChain::from_json_file(spec.robot);
  const GaitGenerator gait(spec.gait, chain);
  SensorSynthesizer synth(gait, spec.noise,
                          seed_override.value_or(spec.seed));

  CsvWriter log_writer(log_path, sensor_log_header(chain, write_tilt));
  CsvWriter truth_writer(truth_path, truth_header(chain));
  for (int k = 0; k < gait.ticks(); ++k) {
    append_sensor_row(log_writer, chain, synth.frame(k), write_tilt);
    append_truth_row(truth_writer, chain, gait.at(k * gait.dt()));
  }
  return {log_writer.rows_written(), gait.total_steps()};
}

EstimateOutcome run_estimate(const RunConfig& config,
                             const std::string& log_path,
                             const std::string& truth_path,
                             const std::string& out_path) {
  const KinematicChain chain = KinematicChain::from_json_file(config.robot);
  SensorLogReader log(log_path, chain);

  // First row of the truth stream for the truth initial-state policy.
  std::optional<TruthRow> truth0;
  if (config.initial_state == "truth") {
    if (truth_path.empty()) {
      throw InvalidInput("truth initial-state policy requires --truth");
    }
    TruthReader truth(truth_path, chain);
    truth0 = truth.next();
    if (!truth0) throw InvalidInput(truth_path + ": empty truth file");
  }

  const bool multi = config.filter == "5-imu-ekm";
  EstimateOutcome outcome;
  const auto started = std::chrono::steady_clock::now();
  int ticks = 0;

  if (multi) {
    FilterConfig fc;
    fc.noise = config.noise;
    fc.contact = config.contact;
    fc.initial_std = config.initial_std;
    MultiImuEkf filter(chain, fc);

    std::vector<int> indices(chain.imus().size());
    for (size_t i = 0; i < indices.size(); ++i) indices[i] = static_cast<int>(i);
    CsvWriter writer(out_path, estimate_header(chain, indices));

    std::vector<SensorFrame> warmup;
    bool running = false;
    while (auto frame = log.next()) {
      if (!running) {
        if (truth0) {
          std::vector<LinkState> init;
          for (const auto& link : truth0->links) init.push_back(truth_to_state(link));
          filter.initialize_at(frame->t, init, &*frame);
          running = true;
          append_estimate_row(writer, filter.belief(), nullptr);
          continue;
        }
        warmup.push_back(*frame);
        if (warmup.back().t - warmup.front().t >= 1.0) {
          filter.initialize_static(warmup);
          running = true;
          append_estimate_row(writer, filter.belief(), nullptr);
        }
        continue;
      }
      const StepInfo info = filter.step(*frame);
      append_estimate_row(writer, filter.belief(), &info);
      ++ticks;
    }
    outcome.rows = writer.rows_written();
  } else {
    SingleImuEkf::Config bc;
    bc.noise = config.noise;
    bc.contact = config.contact;
    bc.initial_std = config.initial_std;
    bc.foothold_process_noise = config.foothold_process_noise;
    SingleImuEkf filter(chain, bc,
                        config.filter == "1-imu"
                            ? SingleImuEkf::Kinematics::kRigid
                            : SingleImuEkf::Kinematics::kExtended);

    CsvWriter writer(out_path, estimate_header(chain, {0}));
    std::vector<SensorFrame> warmup;
    bool running = false;
    while (auto frame = log.next()) {
      if (!running) {
        if (truth0) {
          filter.initialize_at(frame->t, truth_to_state(truth0->links[0]),
                               &*frame);
          running = true;
          append_estimate_row(writer, filter, nullptr);
          continue;
        }
        warmup.push_back(*frame);
        if (warmup.back().t - warmup.front().t >= 1.0) {
          filter.initialize_static(warmup);
          running = true;
          append_estimate_row(writer, filter, nullptr);
        }
        continue;
      }
      const auto info = filter.step(*frame);
      append_estimate_row(writer, filter, &info);
      ++ticks;
    }
    outcome.rows = writer.rows_written();
  }

  const auto elapsed = std::chrono::steady_clock::now() - started;
  outcome.wall_seconds =
      std::chrono::duration_cast<std::chrono::duration<double>>(elapsed).count();
  outcome.mean_tick_ms = ticks > 0 ? outcome.wall_seconds * 1000.0 / ticks : 0.0;
  return outcome;
}

metrics::Report run_evaluate(const std::string& estimate_path,
                             const std::string& truth_path,
                             const std::string& link, double rpe_window) {
  const std::string name =
      link.empty() ? first_trajectory_link(estimate_path) : link;
  const auto est = load_trajectory(estimate_path, name);
  const auto truth = load_trajectory(truth_path, name);
  const int steps = std::max(1, read_step_count(truth_path));
  return metrics::evaluate(est, truth, steps, rpe_window);
}

CompareOutcome run_compare(const std::string& compare_config_path,
                           const std::string& out_dir,
                           std::optional<uint64_t> seed_override) {
  const nlohmann::json j = jsonu::load_file(compare_config_path);
  jsonu::require_keys_in(j, {"schema_version", "simulation", "filters", "seed"},
                         "compare config");
  jsonu::require_schema_version(j, 1, "compare config");
  const std::string base_dir =
      fs::path(compare_config_path).parent_path().string();
  if (!j.contains("simulation") || !j.contains("filters")) {
    throw InvalidInput("compare config: simulation and filters are required");
  }

  SimulationSpec sim = SimulationSpec::from_json_file(
      resolve(base_dir, j.at("simulation").get<std::string>()));
  const uint64_t seed = seed_override.value_or(
      j.contains("seed") ? j.at("seed").get<uint64_t>() : sim.seed);

  fs::create_directories(out_dir);
  const std::string log_path = (fs::path(out_dir) / "log.csv").string();
  const std::string truth_path = (fs::path(out_dir) / "truth.csv").string();
  run_simulate(sim, log_path, truth_path, seed);

  CompareOutcome outcome;
  nlohmann::json table_json = nlohmann::json::array();
  for (const auto& fj : j.at("filters")) {
    jsonu::require_keys_in(fj, {"name", "config"}, "compare filter");
    const std::string name = fj.at("name").get<std::string>();
    RunConfig rc = RunConfig::from_json_file(
        resolve(base_dir, fj.at("config").get<std::string>()));
    const std::string est_path =
        (fs::path(out_dir) / (name + "_estimate.csv")).string();
    run_estimate(rc, log_path, truth_path, est_path);
    const metrics::Report report = run_evaluate(est_path, truth_path);
    outcome.entries.push_back({name, report});
    nlohmann::json entry = metrics::to_json(report);
    entry["filter"] = name;
    table_json.push_back(entry);

    std::ofstream metrics_file(
        (fs::path(out_dir) / (name + "_metrics.json")).string());
    metrics_file << metrics::to_json(report).dump(2) << "\n";
  }

  // Text table, one filter per row.
  char line[160];
  std::snprintf(line, sizeof(line), "%-12s %10s %10s %10s %14s\n", "filter",
                "RPE (cm)", "ATE (cm)", "AVDS (mm)", "yaw drift (deg)");
  outcome.table += line;
  for (const auto& entry : outcome.entries) {
    std::snprintf(line, sizeof(line), "%-12s %10.2f %10.2f %10.2f %14.2f\n",
                  entry.name.c_str(), entry.report.rpe_cm, entry.report.ate_cm,
                  entry.report.avds_mm, entry.report.yaw_drift_deg);
    outcome.table += line;
  }
  std::ofstream table_file((fs::path(out_dir) / "table.txt").string());
  table_file << outcome.table;
  std::ofstream json_file((fs::path(out_dir) / "table.json").string());
  json_file << table_json.dump(2) << "\n";

  // Plot-ready per-tick XY and Z error columns for every filter.
  {
    const std::string link = first_trajectory_link(truth_path);
    const auto truth = load_trajectory(truth_path, link);
    std::vector<std::string> header{"t"};
    std::vector<std::vector<metrics::AlignedPair>> aligned;
    for (const auto& entry : outcome.entries) {
      header.push_back(entry.name + "_err_xy");
      header.push_back(entry.name + "_err_z");
      const auto est = load_trajectory(
          (fs::path(out_dir) / (entry.name + "_estimate.csv")).string(), link);
      aligned.push_back(metrics::align(est, truth));
    }
    CsvWriter errors((fs::path(out_dir) / "errors.csv").string(), header);
    if (!aligned.empty()) {
      const size_t rows = aligned.front().size();
      for (size_t r = 0; r < rows; ++r) {
        std::vector<double> row{aligned.front()[r].t};
        bool complete = true;
        for (const auto& pairs : aligned) {
          if (r >= pairs.size()) {
            complete = false;
            break;
          }
          const Vec3 err = pairs[r].p_est - pairs[r].p_truth;
          row.push_back(err.head<2>().norm());
          row.push_back(std::abs(err.z()));
        }
        if (complete) errors.write_row(row);
      }
    }
  }
  return outcome;
}

}  // namespace mimu
