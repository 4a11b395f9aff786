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

#ifndef MIMU_GAIT_SIM_HPP
#define MIMU_GAIT_SIM_HPP

#include <optional>
#include <random>
#include <vector>

#include "mimu/robot_model.hpp"
#include "mimu/sensors.hpp"

namespace mimu {

struct PathSpec {
  enum class Type { kStraight, kCircular } type{Type::kStraight};
  double radius{1.0};  // m, circular only
};

/// Heel-toe biped gait description. Step length defaults to
/// speed * step_duration; a conflicting explicit value is rejected.
struct GaitSpec {
  double speed{0.15};             // m/s
  double step_length{0.0};        // m; 0 = derived
  double step_duration{0.8};      // s per step (half a cycle)
  double heel_toe_roll{0.15};     // rad of heel-strike / toe-off pitch
  double duration{20.0};          // s
  double sample_rate{1000.0};     // Hz
  PathSpec path;
  double deformation_amplitude{0.0};  // rad of injected structure flex

  // Shape parameters (implementer defaults, overridable in the JSON).
  double duty{0.65};           // stance fraction of the cycle
  double step_height{0.04};    // m swing apex
  double sway{0.02};           // m lateral pelvis sway amplitude
  double bob{0.01};            // m vertical pelvis bob amplitude
  double stance_width{0.18};   // m between foot centers
  double pelvis_height{0.0};   // m; 0 = derived from the leg geometry
  double total_weight{800.0};  // N on the ground
  /// Torsional slip of the stance foot about its pivot (rad, peak). The
  /// foot twists about the vertical through the contact point and returns
  /// by stance end, so the contact pivot never translates.
  double stance_yaw_slip{0.0};
  /// Sole compliance: below this pitch magnitude the rubber spreads load
  /// toward the far sensor pair although the rigid sole still pivots on
  /// its edge. Fires the flat-contact criterion while the foot is still
  /// rotating, as compliant feet do. 0 keeps rigid-sole force geometry.
  double sole_compliance{0.0};

  static GaitSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct LinkTruth {
  Mat3 rotation{Mat3::Identity()};
  Vec3 position{Vec3::Zero()};
  Vec3 velocity{Vec3::Zero()};
  Vec3 angular_velocity{Vec3::Zero()};  // body frame
  Vec3 acceleration{Vec3::Zero()};
};

struct TruthSample {
  double t{};
  std::vector<LinkTruth> links;     // chain.imus() order (tracking frames)
  std::vector<bool> contact;        // chain.feet() order
  std::vector<Vec3> cop;            // foot frame; zero when floating
  std::vector<FootForces> forces;   // noiseless
  VecX joint_angles;
  std::vector<Mat3> deformations;
  int steps{0};                     // heel strikes completed in (0, t]
};

/// Closed-form gait: C2 foot trajectories with heel-pivot / flat /
/// toe-pivot stance phases, a constant-speed pelvis with bounded sway, and
/// exact inverse kinematics for the 6-DoF legs. Every quantity is an
/// analytic function of time, so samples can be generated streaming.
class GaitGenerator {
 public:
  GaitGenerator(GaitSpec spec, KinematicChain chain);

  TruthSample at(double t) const;
  double dt() const { return 1.0 / spec_.sample_rate; }
  int ticks() const;  // duration * rate + 1 samples at k * dt
  const GaitSpec& spec() const { return spec_; }
  const KinematicChain& chain() const { return chain_; }
  int total_steps() const;

 private:
  struct FootPose {
    Mat3 rotation;
    Vec3 position;
    bool contact;
    double cop_x;    // foot-frame CoP progression
    double share;    // fraction of the robot weight
    double pitch;    // sole pitch relative to the ground
  };
  FootPose foot_pose(int foot, double t) const;
  Pose pelvis_pose(double t) const;
  void path_point(double s, Eigen::Vector2d& xy, double& heading) const;
  std::vector<Mat3> true_deformations(double t) const;
  struct Kinematics {
    VecX angles;
    std::vector<Mat3> deformations;
  };
  Kinematics solve_kinematics(double t) const;
  void validate() const;

  GaitSpec spec_;
  KinematicChain chain_;
  // Geometry extracted from the chain.
  double thigh_{}, shank_{}, sole_height_{};
  Vec3 hip_offset_[2];
  int hip_yaw_joint_[2], foot_link_[2];
  double cop_heel_{}, cop_toe_{};
  double t_cycle_{}, t_stance_{}, t_swing_{};
};

/// Corrupts the analytic truth with the configured noise. IMU channels are
/// zero-order-hold consistent with the sampling grid: integrating frame k's
/// gyro/accel over (t_{k-1}, t_k] reproduces the true orientation and
/// velocity exactly at zero noise. Deterministic per seed.
class SensorSynthesizer {
 public:
  SensorSynthesizer(const GaitGenerator& gait, NoiseConfig noise,
                    uint64_t seed);

  SensorFrame frame(int k);  // must be called with k = 0, 1, 2, ...
  int ticks() const { return gait_.ticks(); }

 private:
  const GaitGenerator& gait_;
  NoiseConfig noise_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> gauss_{0.0, 1.0};
  std::vector<Vec3> gyro_bias_, accel_bias_;
  std::optional<TruthSample> prev_;
  int next_k_{0};
  Vec3 draw3(double std);
};

std::vector<SensorFrame> synthesize_sensors(const GaitGenerator& gait,
                                            const NoiseConfig& noise,
                                            uint64_t seed);
std::vector<TruthSample> generate_gait(const GaitGenerator& gait);

}  // namespace mimu

#endif  // MIMU_GAIT_SIM_HPP
