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

#ifndef MIMU_SENSORS_HPP
#define MIMU_SENSORS_HPP

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "mimu/contact.hpp"
#include "mimu/manifold.hpp"

namespace mimu {

/// One IMU reading: body angular rate (rad/s) and specific force (m/s^2).
struct ImuSample {
  Vec3 gyro{Vec3::Zero()};
  Vec3 accel{Vec3::Zero()};
};

/// One tick of every sensor channel, in the robot description's ordering:
/// imu[] and tilt[] follow chain.imus(), forces[] follows chain.feet(),
/// joint_angles follows chain.joints(). tilt is empty when the log carries
/// no tilt columns (a fallback tilt filter takes over).
struct SensorFrame {
  double t{};
  std::vector<ImuSample> imu;
  VecX joint_angles;
  std::vector<FootForces> forces;
  std::vector<Vec3> tilt;

  bool has_tilt() const { return !tilt.empty(); }
};

struct ImuNoise {
  double gyro_density{0.005};   // rad/s/sqrt(Hz)
  double accel_density{0.05};   // m/s^2/sqrt(Hz)
  double gyro_walk{1e-5};       // rad/s^2/sqrt(Hz)
  double accel_walk{1e-5};      // m/s^3/sqrt(Hz)
};

/// Noise magnitudes shared between the simulator (to corrupt channels) and
/// the filters (as assumed process/measurement noise). Defaults mimic a
/// low-cost MEMS IMU class.
struct NoiseConfig {
  ImuNoise imu;
  std::map<std::string, ImuNoise> imu_overrides;  // keyed by IMU name

  double tilt_std{0.002};            // rad (isotropic on the tangent plane)
  double encoder_std{5e-4};          // rad
  double deformation_std{1e-3};      // rad
  double slippage_std{0.01};         // m/s
  double force_std{0.5};             // N (simulator only)
  double initial_gyro_bias_std{0.0}; // rad/s (simulator only)
  double initial_accel_bias_std{0.0};// m/s^2 (simulator only)

  const ImuNoise& for_imu(const std::string& name) const;
  static NoiseConfig zero();
  static NoiseConfig from_json(const nlohmann::json& j,
                               const std::string& context);
  nlohmann::json to_json() const;
};

}  // namespace mimu

#endif  // MIMU_SENSORS_HPP
