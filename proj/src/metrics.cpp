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

#include "mimu/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mimu::metrics {
namespace {

double yaw_of(const Mat3& r) { return std::atan2(r(1, 0), r(0, 0)); }

double wrap_angle(double a) {
  while (a > M_PI) a -= 2.0 * M_PI;
  while (a < -M_PI) a += 2.0 * M_PI;
  return a;
}

double geodesic_angle(const Mat3& a, const Mat3& b) {
  const double c = std::clamp(((a.transpose() * b).trace() - 1.0) * 0.5, -1.0, 1.0);
  return std::acos(c);
}

double median(std::vector<double> values) {
  if (values.empty()) {
    throw std::domain_error("median of an empty set");
  }
  const size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  double m = values[mid];
  if (values.size() % 2 == 0) {
    const auto lower = std::max_element(values.begin(), values.begin() + mid);
    m = (m + *lower) / 2.0;
  }
  return m;
}

}  // namespace

std::vector<AlignedPair> align(std::span<const TrajectoryRecord> est,
                               std::span<const TrajectoryRecord> truth,
                               double tolerance) {
  std::vector<AlignedPair> out;
  size_t j = 0;
  for (const auto& e : est) {
    while (j + 1 < truth.size() &&
           std::abs(truth[j + 1].t - e.t) <= std::abs(truth[j].t - e.t)) {
      ++j;
    }
    if (truth.empty() || std::abs(truth[j].t - e.t) > tolerance) continue;
    out.push_back({e.t, e.position, truth[j].position, e.rotation,
                   truth[j].rotation});
  }
  if (out.empty()) {
    throw std::domain_error("metrics: no time overlap between trajectories");
  }
  return out;
}

double ate(std::span<const TrajectoryRecord> est,
           std::span<const TrajectoryRecord> truth) {
  const auto pairs = align(est, truth);
  double sum = 0.0;
  for (const auto& p : pairs) {
    sum += (p.p_est - p.p_truth).squaredNorm();
  }
  return std::sqrt(sum / pairs.size());
}

double rpe(std::span<const TrajectoryRecord> est,
           std::span<const TrajectoryRecord> truth, double window) {
  const auto pairs = align(est, truth);
  std::vector<double> errors;
  size_t j = 0;
  for (size_t i = 0; i < pairs.size(); ++i) {
    const double target = pairs[i].t + window;
    if (j < i) j = i;
    while (j + 1 < pairs.size() &&
           std::abs(pairs[j + 1].t - target) <= std::abs(pairs[j].t - target)) {
      ++j;
    }
    if (std::abs(pairs[j].t - target) > 0.002) continue;
    const Vec3 d_est = pairs[j].p_est - pairs[i].p_est;
    const Vec3 d_truth = pairs[j].p_truth - pairs[i].p_truth;
    errors.push_back((d_est - d_truth).norm());
  }
  if (errors.empty()) {
    throw std::domain_error("rpe: trajectory shorter than the window");
  }
  return median(std::move(errors));
}

double avds_mm(std::span<const TrajectoryRecord> est,
               std::span<const TrajectoryRecord> truth, int steps) {
  if (steps < 1) {
    throw std::domain_error("avds: at least one step required");
  }
  const auto pairs = align(est, truth);
  const double z0 = pairs.front().p_est.z() - pairs.front().p_truth.z();
  const double z1 = pairs.back().p_est.z() - pairs.back().p_truth.z();
  return std::abs(z1 - z0) / steps * 1000.0;
}

double yaw_drift_deg(std::span<const TrajectoryRecord> est,
                     std::span<const TrajectoryRecord> truth) {
  const auto pairs = align(est, truth);
  const double start =
      wrap_angle(yaw_of(pairs.front().r_est) - yaw_of(pairs.front().r_truth));
  const double end =
      wrap_angle(yaw_of(pairs.back().r_est) - yaw_of(pairs.back().r_truth));
  return std::abs(wrap_angle(end - start)) * 180.0 / M_PI;
}

double rotation_rmse_deg(std::span<const TrajectoryRecord> est,
                         std::span<const TrajectoryRecord> truth) {
  const auto pairs = align(est, truth);
  double sum = 0.0;
  for (const auto& p : pairs) {
    const double a = geodesic_angle(p.r_est, p.r_truth);
    sum += a * a;
  }
  return std::sqrt(sum / pairs.size()) * 180.0 / M_PI;
}

Report evaluate(std::span<const TrajectoryRecord> est,
                std::span<const TrajectoryRecord> truth, int steps,
                double window) {
  Report r;
  r.ate_cm = ate(est, truth) * 100.0;
  r.rpe_cm = rpe(est, truth, window) * 100.0;
  r.avds_mm = avds_mm(est, truth, steps);
  r.yaw_drift_deg = yaw_drift_deg(est, truth);
  r.rot_rmse_deg = rotation_rmse_deg(est, truth);
  r.steps = steps;
  return r;
}

nlohmann::json to_json(const Report& report) {
  return {{"ate_cm", report.ate_cm},
          {"rpe_cm", report.rpe_cm},
          {"avds_mm", report.avds_mm},
          {"yaw_drift_deg", report.yaw_drift_deg},
          {"rot_rmse_deg", report.rot_rmse_deg},
          {"steps", report.steps}};
}

}  // namespace mimu::metrics
