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

#ifndef MIMU_METRICS_HPP
#define MIMU_METRICS_HPP

#include <span>
#include <vector>

#include <json.hpp>

#include "mimu/manifold.hpp"

namespace mimu {

struct TrajectoryRecord {
  double t{};
  Vec3 position{Vec3::Zero()};
  Mat3 rotation{Mat3::Identity()};
};

namespace metrics {

/// Estimate/truth samples paired by nearest timestamp within `tolerance`.
struct AlignedPair {
  double t;
  Vec3 p_est, p_truth;
  Mat3 r_est, r_truth;
};
std::vector<AlignedPair> align(std::span<const TrajectoryRecord> est,
                               std::span<const TrajectoryRecord> truth,
                               double tolerance = 0.002);

/// RMS of the Euclidean position errors over the aligned samples. No
/// alignment transform beyond the shared initial pose of the two streams.
double ate(std::span<const TrajectoryRecord> est,
           std::span<const TrajectoryRecord> truth);

/// Median norm of the windowed relative-translation error
/// (est(t+w)-est(t)) - (truth(t+w)-truth(t)), window sliding per sample.
double rpe(std::span<const TrajectoryRecord> est,
           std::span<const TrajectoryRecord> truth, double window = 0.5);

/// Net final-minus-initial vertical error divided by the step count, mm.
double avds_mm(std::span<const TrajectoryRecord> est,
               std::span<const TrajectoryRecord> truth, int steps);

double yaw_drift_deg(std::span<const TrajectoryRecord> est,
                     std::span<const TrajectoryRecord> truth);

/// RMS geodesic orientation error, degrees (reported, not a headline metric).
double rotation_rmse_deg(std::span<const TrajectoryRecord> est,
                         std::span<const TrajectoryRecord> truth);

struct Report {
  double ate_cm{};
  double rpe_cm{};
  double avds_mm{};
  double yaw_drift_deg{};
  double rot_rmse_deg{};
  int steps{};
};

Report evaluate(std::span<const TrajectoryRecord> est,
                std::span<const TrajectoryRecord> truth, int steps,
                double window = 0.5);

nlohmann::json to_json(const Report& report);

}  // namespace metrics
}  // namespace mimu

#endif  // MIMU_METRICS_HPP
