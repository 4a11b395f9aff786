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

#ifndef MIMU_ESTIMATOR_HPP
#define MIMU_ESTIMATOR_HPP

#include <functional>
#include <optional>
#include <vector>

#include "mimu/filter_core.hpp"
#include "mimu/robot_model.hpp"
#include "mimu/sensors.hpp"

namespace mimu {

/// Per-link state tracked by the filter. The attached IMU's mount frame is
/// the link's tracking frame; orientation/position/velocity are expressed
/// in the inertial frame, biases in the sensor frame.
struct LinkState {
  Mat3 rotation{Mat3::Identity()};
  Vec3 position{Vec3::Zero()};
  Vec3 velocity{Vec3::Zero()};
  Vec3 gyro_bias{Vec3::Zero()};
  Vec3 accel_bias{Vec3::Zero()};
};

/// Error-state block layout inside one link's 15 rows.
inline constexpr int kTheta = 0;
inline constexpr int kPos = 3;
inline constexpr int kVel = 6;
inline constexpr int kGyroBias = 9;
inline constexpr int kAccelBias = 12;
inline constexpr int kLinkDim = 15;

/// x oplus delta for one link (delta is the 15-row error block).
LinkState link_oplus(const LinkState& x, const Eigen::Matrix<double, 15, 1>& d);

using Mat15 = Eigen::Matrix<double, 15, 15>;
using Mat15x12 = Eigen::Matrix<double, 15, 12>;
using Mat12 = Eigen::Matrix<double, 12, 12>;

/// Inertial-navigation prediction used for links without ground contact.
/// Noise column order: [gyro white, accel white, gyro walk, accel walk].
struct FloatingPrediction {
  LinkState state;
  Mat15 F;
  Mat15x12 G;
};
FloatingPrediction predict_floating(const LinkState& x, const ImuSample& imu,
                                    double dt, const Vec3& gravity);

/// Pivot-about-the-center-of-pressure prediction for contact links. The
/// velocity is not integrated: it is reconstructed instantaneously from the
/// gyro and the lever arm, so the error model is built on the reduced state
/// (theta, p, bg, ba) and the velocity rows are re-added afterwards.
/// Reduced noise column order: [gyro white, gyro walk, accel walk, slippage].
struct ContactPrediction {
  LinkState state;
  Mat12 F_reduced;
  Mat12 G_reduced;
  Mat3 dv_dtheta;     // velocity-error coefficient on delta theta
  Mat3 dv_dgyro_bias; // velocity-error coefficient on delta b_g
};
ContactPrediction predict_contact(const LinkState& x, const ImuSample& imu,
                                  const Vec3& lever, double dt);

/// Discrete per-link transition (A, Q) with the velocity rows embedded.
struct LinkTransition {
  LinkState state;
  Mat15 A;
  Mat15 Q;
};
LinkTransition floating_transition(const LinkState& x, const ImuSample& imu,
                                   double dt, const Vec3& gravity,
                                   const Mat12& noise_density);
LinkTransition contact_transition(const LinkState& x, const ImuSample& imu,
                                  const Vec3& lever, double dt,
                                  const Mat12& noise_density);

/// Block-diagonal covariance propagation: P_ij <- A_i P_ij A_j^T, plus Q_i
/// on the diagonal blocks.
MatX assemble_and_predict(const MatX& P, const std::vector<Mat15>& A,
                          const std::vector<Mat15>& Q);

struct FootContactState {
  int link{-1};
  bool in_contact{false};
  Vec3 cop{Vec3::Zero()};    // foot frame
  Vec3 lever{Vec3::Zero()};  // tracking frame
};

struct FilterBelief {
  double t{0.0};
  std::vector<LinkState> links;  // chain.imus() order
  MatX covariance;               // 15N x 15N
  std::vector<FootContactState> feet;  // chain.feet() order

  int dim() const { return static_cast<int>(links.size()) * kLinkDim; }
};

/// Applies a full-state tangent update to every link mean.
void inject_error(FilterBelief& belief, const VecX& delta);

/// Tilt measurement of link `index`: Jacobian blocks and innovation in the
/// basis spanned by the first two rows of the link's orientation estimate.
/// Returns nothing when the measured tilt is antipodal to the prediction.
std::optional<LinearizedMeasurement> build_tilt_measurement(
    const FilterBelief& belief, int index, const Vec3& measured_tilt,
    const Eigen::Matrix2d& noise);

/// A (contact, floating) link pair entering the relative-pose correction.
struct RelposePair {
  int contact_index;   // state index of the contact link
  int floating_index;  // state index of the floating link
  int contact_link;    // chain link ids, for the kinematics lookup
  int floating_link;
};

/// Stacked relative-pose measurement for all pairs; the joint/deformation
/// noise is shared across pairs through a common D matrix.
std::optional<LinearizedMeasurement> build_relpose_measurement(
    const FilterBelief& belief, const KinematicChain& chain,
    const JointState& q, const std::vector<RelposePair>& pairs,
    double angle_std, double deformation_std);

struct CorrectionOutcome {
  bool applied{false};
  double innovation_before{0.0};
  double innovation_after{0.0};
  double weighted_before{0.0};  // innovation^T S^-1 innovation
  double weighted_after{0.0};
};

/// Tilt correction of one contact link (in place).
CorrectionOutcome tilt_correction(FilterBelief& belief, int index,
                                  const Vec3& measured_tilt,
                                  const Eigen::Matrix2d& noise,
                                  double max_condition = 1e12);

/// Joint relative-pose correction over all pairs (in place).
CorrectionOutcome relpose_correction(FilterBelief& belief,
                                     const KinematicChain& chain,
                                     const JointState& q,
                                     const std::vector<RelposePair>& pairs,
                                     double angle_std, double deformation_std,
                                     double max_condition = 1e12);

struct InitialStd {
  double orientation{1e-2};  // rad
  double position{1e-2};     // m
  double velocity{1e-1};     // m/s
  double gyro_bias{1e-2};    // rad/s
  double accel_bias{1e-2};   // m/s^2
};

struct FilterConfig {
  NoiseConfig noise;
  ContactDetectorConfig contact;
  InitialStd initial_std;
  Vec3 gravity{0.0, 0.0, -9.81};
  bool extended_kinematics{true};  // estimate deformations from tilts
  double max_condition{1e12};
  /// Condition cap of the stacked relative-pose update. The stack closes
  /// kinematic loops whose eigenvalues are pure linearization residue
  /// (~mismatch^2 below the informative ones); gains in that range must be
  /// truncated, not inverted.
  double relpose_max_condition{1e5};
  double tilt_fallback_gain{0.02};  // complementary filter gain per tick
  /// Assumed tilt noise when the log has no tilt channel and the crude
  /// complementary fallback supplies the tilts instead.
  double tilt_fallback_std{0.05};
  /// Per-tick low-pass gain on the estimated deformation rotations.
  /// Structural flex is quasi-static; raw per-tick estimates would feed the
  /// tilt noise straight into the kinematics. 1.0 disables the smoothing.
  double deformation_smoothing{0.02};
  /// Post-correction hook (error reset point). Default: none.
  std::function<void(FilterBelief&, const VecX&)> reset_hook;
};

struct StepInfo {
  double t{0.0};
  double dt{0.0};
  bool any_contact{false};
  std::vector<bool> foot_contacts;  // chain.feet() order
  int tilt_applied{0};
  int tilt_skipped{0};
  bool relpose_applied{false};
  int relpose_pairs{0};
  CorrectionOutcome relpose;
};

/// The multi-IMU filter: per-link prediction with contact-dependent model
/// switching, block covariance assembly, then tilt and relative-pose
/// corrections through the extended kinematic model.
class MultiImuEkf {
 public:
  MultiImuEkf(KinematicChain chain, FilterConfig config);

  /// Start from externally supplied link states (e.g. ground truth).
  /// `frame`, when given, seeds the contact detectors and tilt fallback.
  void initialize_at(double t, const std::vector<LinkState>& links,
                     const SensorFrame* frame = nullptr);

  /// Start from a static warmup window: tilts from the accelerometer
  /// average, base yaw and position zero, remaining links placed through
  /// the kinematics of the last warmup frame.
  void initialize_static(const std::vector<SensorFrame>& warmup);

  StepInfo step(const SensorFrame& frame);

  const FilterBelief& belief() const { return belief_; }
  const KinematicChain& chain() const { return chain_; }
  const FilterConfig& config() const { return config_; }
  /// Joint state (with estimated deformations) used in the last correction.
  const JointState& kinematic_state() const { return q_kin_; }

 private:
  std::vector<Vec3> tilts_for(const SensorFrame& frame, double dt);
  void seed_detectors(const SensorFrame& frame);

  KinematicChain chain_;
  FilterConfig config_;
  FilterBelief belief_;
  std::vector<ContactDetector> detectors_;   // chain.feet() order
  std::vector<Vec3> fallback_tilt_;          // chain.imus() order
  bool fallback_ready_{false};
  JointState q_kin_;
  bool initialized_{false};
};

}  // namespace mimu

#endif  // MIMU_ESTIMATOR_HPP
