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

#ifndef MIMU_CONTACT_HPP
#define MIMU_CONTACT_HPP

#include <array>

#include "mimu/robot_model.hpp"

namespace mimu {

/// One foot's force sensor readings. Negative raw values are clamped to 0.
struct FootForces {
  std::array<double, 4> newtons{0.0, 0.0, 0.0, 0.0};
  static FootForces clamped(const std::array<double, 4>& raw);
  double max() const;
};

/// kAnySensor: in contact as soon as any sensor exceeds the threshold.
/// kFlatOnly: in contact only when a diagonally opposed sensor pair both
/// exceed it, indicating flat support. Sensor order is front-left,
/// front-right, back-left, back-right; diagonals are (0,3) and (1,2).
enum class ContactMode { kAnySensor, kFlatOnly };

/// Stateless threshold test. Throws std::invalid_argument on threshold <= 0.
bool detect_contact(const FootForces& forces, ContactMode mode,
                    double threshold);

/// Force-weighted average of the sensor positions (foot frame, m).
/// Throws std::domain_error when all forces are zero.
Vec3 center_of_pressure(const FootForces& forces,
                        const std::array<Vec3, 4>& sensor_positions);

/// Vector from the center of pressure to the tracking-frame origin of the
/// foot, expressed in the tracking (IMU) frame.
Vec3 lever_arm(const KinematicChain& chain, int foot_link,
               const Vec3& cop_foot_frame);

struct ContactDetectorConfig {
  double threshold{20.0};    // N
  double hysteresis{5.0};    // N; rise at threshold+h, fall at threshold-h
  double debounce{0.010};    // s; a committed flip holds for this long
  ContactMode mode{ContactMode::kAnySensor};
};

/// Debounced, hysteretic contact classifier for one foot.
class ContactDetector {
 public:
  explicit ContactDetector(const ContactDetectorConfig& config)
      : config_(config) {}

  bool update(const FootForces& forces, double t);
  bool in_contact() const { return in_contact_; }

 private:
  ContactDetectorConfig config_;
  bool in_contact_{false};
  double last_flip_{-1.0};
  bool initialized_{false};
};

}  // namespace mimu

#endif  // MIMU_CONTACT_HPP
