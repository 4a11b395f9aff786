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

#include "mimu/contact.hpp"

#include <algorithm>
#include <stdexcept>

namespace mimu {

FootForces FootForces::clamped(const std::array<double, 4>& raw) {
  FootForces f;
  for (int i = 0; i < 4; ++i) f.newtons[i] = std::max(0.0, raw[i]);
  return f;
}

double FootForces::max() const {
  return *std::max_element(newtons.begin(), newtons.end());
}

bool detect_contact(const FootForces& forces, ContactMode mode,
                    double threshold) {
  if (threshold <= 0.0) {
    throw std::invalid_argument("detect_contact: threshold must be positive");
  }
  const auto& f = forces.newtons;
  switch (mode) {
    case ContactMode::kAnySensor:
      return forces.max() > threshold;
    case ContactMode::kFlatOnly:
      return (f[0] > threshold && f[3] > threshold) ||
             (f[1] > threshold && f[2] > threshold);
  }
  return false;
}

Vec3 center_of_pressure(const FootForces& forces,
                        const std::array<Vec3, 4>& sensor_positions) {
  double total = 0.0;
  Vec3 weighted = Vec3::Zero();
  for (int i = 0; i < 4; ++i) {
    total += forces.newtons[i];
    weighted += forces.newtons[i] * sensor_positions[i];
  }
  if (total <= 0.0) {
    throw std::domain_error("center_of_pressure: undefined for zero force");
  }
  return weighted / total;
}

Vec3 lever_arm(const KinematicChain& chain, int foot_link,
               const Vec3& cop_foot_frame) {
  const int imu = chain.imu_of_link(foot_link);
  if (imu < 0) {
    throw std::invalid_argument("lever_arm: foot link carries no IMU");
  }
  const auto& mount = chain.imus()[imu];
  return mount.rotation.transpose() * (mount.translation - cop_foot_frame);
}

bool ContactDetector::update(const FootForces& forces, double t) {
  const double rise = config_.threshold + config_.hysteresis;
  const double fall = config_.threshold - config_.hysteresis;
  if (!initialized_) {
    in_contact_ = detect_contact(forces, config_.mode, rise);
    last_flip_ = t - config_.debounce;  // allow an immediate first transition
    initialized_ = true;
    return in_contact_;
  }
  if (t - last_flip_ < config_.debounce) {
    return in_contact_;  // refractory hold
  }
  const bool raw = in_contact_ ? detect_contact(forces, config_.mode, fall)
                               : detect_contact(forces, config_.mode, rise);
  if (raw != in_contact_) {
    in_contact_ = raw;
    last_flip_ = t;
  }
  return in_contact_;
}

}  // namespace mimu
