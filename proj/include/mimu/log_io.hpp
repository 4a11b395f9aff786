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
//
// CSV formats (all headered, doubles written with shortest round-trip
// precision; see docs/file_formats.md):
//   sensor log: t, {imu}_gx..gz, {imu}_ax..az, q1..qN, {foot}_f1..f4,
//               {imu}_tilt_x..z (tilt columns optional)
//   truth:      t, {imu}_px..pz qw..qz vx..vz, {foot}_contact,
//               {foot}_cop_x..z, steps
//   estimate:   t, per estimated link {imu}_px..pz qw..qz vx..vz
//               srot_x..z spos_x..z svel_x..z, {foot}_contact

#ifndef MIMU_LOG_IO_HPP
#define MIMU_LOG_IO_HPP

#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mimu/baseline.hpp"
#include "mimu/estimator.hpp"
#include "mimu/gait_sim.hpp"
#include "mimu/metrics.hpp"

namespace mimu {

/// Row-oriented CSV writer; numbers render with shortest-exact precision.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void write_row(const std::vector<double>& values);
  int rows_written() const { return rows_; }

 private:
  std::ofstream out_;
  size_t columns_;
  int rows_{0};
  std::string buffer_;
};

/// Line-by-line CSV reader with a validated header. Errors carry the
/// 1-based line number.
class CsvReader {
 public:
  explicit CsvReader(const std::string& path);
  const std::vector<std::string>& header() const { return header_; }
  /// Column index lookup; throws InvalidInput when missing.
  int column(const std::string& name) const;
  bool has_column(const std::string& name) const;
  std::optional<std::vector<double>> next_row();
  int line_number() const { return line_; }

 private:
  std::ifstream in_;
  std::string path_;
  std::vector<std::string> header_;
  int line_{1};
};

// --- sensor logs -----------------------------------------------------------

std::vector<std::string> sensor_log_header(const KinematicChain& chain,
                                           bool with_tilt);
void append_sensor_row(CsvWriter& writer, const KinematicChain& chain,
                       const SensorFrame& frame, bool with_tilt);

/// Streaming sensor-log reader bound to a robot description.
class SensorLogReader {
 public:
  SensorLogReader(const std::string& path, const KinematicChain& chain);
  std::optional<SensorFrame> next();
  bool has_tilt() const { return has_tilt_; }
  int line_number() const { return reader_.line_number(); }

 private:
  CsvReader reader_;
  const KinematicChain& chain_;
  bool has_tilt_;
  std::vector<int> gyro_, accel_, tilt_, angle_;
  std::vector<std::array<int, 4>> force_;
  int t_col_;
};

// --- ground truth ----------------------------------------------------------

std::vector<std::string> truth_header(const KinematicChain& chain);
void append_truth_row(CsvWriter& writer, const KinematicChain& chain,
                      const TruthSample& sample);

struct TruthRow {
  double t{};
  std::vector<LinkState> links;  // rotation/position/velocity filled
  std::vector<bool> contact;
  int steps{};
};

class TruthReader {
 public:
  TruthReader(const std::string& path, const KinematicChain& chain);
  std::optional<TruthRow> next();

 private:
  CsvReader reader_;
  const KinematicChain& chain_;
  std::vector<std::array<int, 10>> pose_;  // px..pz qw..qz vx..vz
  std::vector<int> contact_;
  int t_col_, steps_col_;
};

// --- estimates -------------------------------------------------------------

std::vector<std::string> estimate_header(const KinematicChain& chain,
                                         const std::vector<int>& imu_indices);
void append_estimate_row(CsvWriter& writer, const FilterBelief& belief,
                         const StepInfo* info);
void append_estimate_row(CsvWriter& writer, const SingleImuEkf& filter,
                         const SingleImuEkf::Info* info);

/// Loads one link's trajectory (by IMU name) from an estimate or truth CSV.
std::vector<TrajectoryRecord> load_trajectory(const std::string& path,
                                              const std::string& link);
/// First IMU-name prefix found in a trajectory CSV header.
std::string first_trajectory_link(const std::string& path);
/// Last value of the `steps` column; throws if the column is missing.
int read_step_count(const std::string& path);

Mat3 quaternion_to_rotation(double w, double x, double y, double z);

}  // namespace mimu

#endif  // MIMU_LOG_IO_HPP
