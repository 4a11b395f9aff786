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

#ifndef MIMU_BASELINE_HPP
#define MIMU_BASELINE_HPP

#include <optional>

#include "mimu/estimator.hpp"

namespace mimu {

/// Single-IMU comparison filter: inertial floating-base prediction on the
/// base IMU plus constant-pose stance-foot states created at flat-contact
/// onset and corrected through the full base-to-foot kinematic pose. The
/// extended variant runs the same pipeline with estimated deformation
/// rotations inside the kinematics; the rigid variant keeps them identity.
class SingleImuEkf {
 public:
  enum class Kinematics { kRigid, kExtended };

  struct Config {
    NoiseConfig noise;
    ContactDetectorConfig contact;  // mode forced to flat-only
    InitialStd initial_std;
    Vec3 gravity{0.0, 0.0, -9.81};
    double foothold_process_noise{1e-6};  // (rad^2, m^2) per second
    double max_condition{1e12};
    double tilt_fallback_gain{0.02};
    double deformation_smoothing{0.02};  // as in FilterConfig
  };

  struct FootState {
    int link{-1};
    bool active{false};
    Mat3 rotation{Mat3::Identity()};
    Vec3 position{Vec3::Zero()};
  };

  struct Info {
    double t{};
    std::vector<bool> foot_contacts;
    bool correction_applied{false};
    double innovation_before{-1.0};
  };

  SingleImuEkf(KinematicChain chain, Config config, Kinematics variant);

  void initialize_at(double t, const LinkState& base,
                     const SensorFrame* frame = nullptr);
  void initialize_static(const std::vector<SensorFrame>& warmup);

  Info step(const SensorFrame& frame);

  double time() const { return t_; }
  const LinkState& base() const { return base_; }
  const MatX& covariance() const { return covariance_; }
  const std::vector<FootState>& feet() const { return feet_; }
  Kinematics variant() const { return variant_; }
  /// Joint state (with estimated deformations) used in the last correction.
  const JointState& last_kinematic_state() const { return q_kin_; }

 private:
  int offset_of(int foot_index) const;  // row offset of an active foot
  int dim() const;
  void add_foot(int foot_index, const JointState& q);
  void drop_foot(int foot_index);
  JointState kinematic_state(const SensorFrame& frame, double dt);

  KinematicChain chain_;
  Config config_;
  Kinematics variant_;
  int base_imu_{0};

  double t_{0.0};
  LinkState base_;
  std::vector<FootState> feet_;  // chain.feet() order
  MatX covariance_;              // 15 + 6 per active foot

  std::vector<ContactDetector> detectors_;
  std::vector<Vec3> fallback_tilt_;
  bool fallback_ready_{false};
  JointState q_kin_;
  bool initialized_{false};
};

}  // namespace mimu

#endif  // MIMU_BASELINE_HPP
