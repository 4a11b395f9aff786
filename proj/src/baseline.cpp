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

#include "mimu/baseline.hpp"

#include <stdexcept>

#include "mimu/json_util.hpp"

namespace mimu {
namespace {

const Mat3 kI3 = Mat3::Identity();

Mat12 baseline_noise_density(const ImuNoise& n) {
  Mat12 h = Mat12::Zero();
  h.block<3, 3>(0, 0) = n.gyro_density * n.gyro_density * kI3;
  h.block<3, 3>(3, 3) = n.accel_density * n.accel_density * kI3;
  h.block<3, 3>(6, 6) = n.gyro_walk * n.gyro_walk * kI3;
  h.block<3, 3>(9, 9) = n.accel_walk * n.accel_walk * kI3;
  return h;
}

}  // namespace

SingleImuEkf::SingleImuEkf(KinematicChain chain, Config config,
                           Kinematics variant)
    : chain_(std::move(chain)), config_(std::move(config)), variant_(variant) {
  if (chain_.feet().size() != 2) {
    throw InvalidInput("single-IMU filter needs both feet described");
  }
  config_.contact.mode = ContactMode::kFlatOnly;
  base_imu_ = 0;
  for (const auto& foot : chain_.feet()) {
    feet_.push_back({foot.link, false, Mat3::Identity(), Vec3::Zero()});
    detectors_.emplace_back(config_.contact);
  }
  q_kin_ = chain_.identity_joint_state();
}

int SingleImuEkf::dim() const {
  int d = kLinkDim;
  for (const auto& f : feet_) {
    if (f.active) d += 6;
  }
  return d;
}

int SingleImuEkf::offset_of(int foot_index) const {
  int offset = kLinkDim;
  for (int f = 0; f < foot_index; ++f) {
    if (feet_[f].active) offset += 6;
  }
  return offset;
}

void SingleImuEkf::initialize_at(double t, const LinkState& base,
                                 const SensorFrame* frame) {
  t_ = t;
  base_ = base;
  for (auto& f : feet_) f.active = false;

  VecX diag(kLinkDim);
  const InitialStd& s = config_.initial_std;
  diag << s.orientation, s.orientation, s.orientation, s.position, s.position,
      s.position, s.velocity, s.velocity, s.velocity, s.gyro_bias, s.gyro_bias,
      s.gyro_bias, s.accel_bias, s.accel_bias, s.accel_bias;
  covariance_ = diag.cwiseProduct(diag).asDiagonal();

  fallback_ready_ = false;
  initialized_ = true;
  if (frame != nullptr) {
    // Seed the detectors; footholds are created on the first step.
    for (size_t f = 0; f < feet_.size(); ++f) {
      detectors_[f].update(FootForces::clamped(frame->forces.at(f).newtons),
                           frame->t);
    }
    if (frame->has_tilt()) {
      fallback_tilt_ = frame->tilt;
      fallback_ready_ = true;
    }
  }
}

void SingleImuEkf::initialize_static(const std::vector<SensorFrame>& warmup) {
  if (warmup.empty()) {
    throw InvalidInput("initialize_static: empty warmup window");
  }
  Vec3 accel_sum = Vec3::Zero();
  for (const auto& frame : warmup) accel_sum += frame.imu.at(base_imu_).accel;
  const Vec3 tilt = accel_sum.normalized();
  const Mat32 b = s2::tangent_basis(tilt);
  LinkState base;
  base.rotation.row(0) = b.col(0).transpose();
  base.rotation.row(1) = tilt.cross(b.col(0)).transpose();
  base.rotation.row(2) = tilt.transpose();
  initialize_at(warmup.back().t, base, &warmup.back());
}

JointState SingleImuEkf::kinematic_state(const SensorFrame& frame, double dt) {
  JointState q = chain_.identity_joint_state();
  q.angles = frame.joint_angles;
  if (variant_ == Kinematics::kRigid) return q;

  // Deformation estimation anchors on any loaded foot; the flat-only
  // criterion only gates the foothold assumption. Anchoring on flat
  // contact alone would leave the estimates stale across every load
  // transfer, exactly when the structure flexes the most.
  int stance = -1;
  for (size_t f = 0; f < feet_.size(); ++f) {
    if (detect_contact(FootForces::clamped(frame.forces[f].newtons),
                       ContactMode::kAnySensor, config_.contact.threshold)) {
      stance = feet_[f].link;
      break;
    }
  }
  if (stance < 0) {
    q.deformations = q_kin_.deformations;  // freeze the last estimate
    return q;
  }

  std::vector<Vec3> tilts;
  if (frame.has_tilt()) {
    tilts = frame.tilt;
  } else {
    // Complementary fallback shared with the multi-IMU filter's policy.
    if (!fallback_ready_) {
      fallback_tilt_.clear();
      for (const auto& imu : frame.imu) {
        fallback_tilt_.push_back(imu.accel.normalized());
      }
      fallback_ready_ = true;
    } else {
      for (size_t k = 0; k < frame.imu.size(); ++k) {
        Vec3 u = fallback_tilt_[k];
        u = (u + u.cross(frame.imu[k].gyro) * dt).normalized();
        const Vec3 dir = frame.imu[k].accel.norm() > 1e-6
                             ? frame.imu[k].accel.normalized()
                             : u;
        fallback_tilt_[k] =
            (u + config_.tilt_fallback_gain * (dir - u)).normalized();
      }
    }
    tilts = fallback_tilt_;
  }
  std::map<int, Vec3> tilt_map;
  for (size_t k = 0; k < chain_.imus().size(); ++k) {
    tilt_map[chain_.imus()[k].link] = tilts[k];
  }
  JointState prior = q;
  prior.deformations = q_kin_.deformations;
  const JointState raw = estimate_deformations(chain_, prior, tilt_map, stance).q;
  q.deformations = q_kin_.deformations;
  const double gain = config_.deformation_smoothing;
  for (int d = 0; d < chain_.n_deformations(); ++d) {
    const Vec3 delta = so3::ominus(raw.deformations[d], q.deformations[d]);
    q.deformations[d] = so3::oplus(q.deformations[d], gain * delta);
  }
  return q;
}

void SingleImuEkf::add_foot(int foot_index, const JointState& q) {
  const int link = feet_[foot_index].link;
  const RelativePose kin =
      forward_kinematics(chain_, q, chain_.imus()[base_imu_].link, link);

  feet_[foot_index].active = true;
  feet_[foot_index].rotation = base_.rotation * kin.rotation;
  feet_[foot_index].position = base_.position + base_.rotation * kin.translation;

  // New rows from the propagated base uncertainty plus the kinematic noise.
  Eigen::Matrix<double, 6, kLinkDim> j_base =
      Eigen::Matrix<double, 6, kLinkDim>::Zero();
  j_base.block<3, 3>(0, kTheta) = kin.rotation.transpose();
  j_base.block<3, 3>(3, kTheta) = -base_.rotation * so3::hat(kin.translation);
  j_base.block<3, 3>(3, kPos) = kI3;

  const KinematicJacobians jac = kinematic_jacobians(
      chain_, q, chain_.imus()[base_imu_].link, link);
  MatX j_q(6, chain_.n_joints());
  j_q.topRows(3) = jac.rotation.leftCols(chain_.n_joints());
  j_q.bottomRows(3) = base_.rotation * jac.position.leftCols(chain_.n_joints());
  const MatX r_q = config_.noise.encoder_std * config_.noise.encoder_std *
                   MatX::Identity(chain_.n_joints(), chain_.n_joints());

  const int old_dim = covariance_.rows();
  const int offset = offset_of(foot_index);
  MatX grown = MatX::Zero(old_dim + 6, old_dim + 6);
  // Existing rows, with a 6-row slot spliced in at `offset`.
  auto old_index = [&](int i) { return i < offset ? i : i - 6; };
  for (int i = 0; i < old_dim + 6; ++i) {
    if (i >= offset && i < offset + 6) continue;
    for (int j = 0; j < old_dim + 6; ++j) {
      if (j >= offset && j < offset + 6) continue;
      grown(i, j) = covariance_(old_index(i), old_index(j));
    }
  }
  const MatX cross = j_base * covariance_.topRows(kLinkDim);  // 6 x old_dim
  for (int j = 0; j < old_dim + 6; ++j) {
    if (j >= offset && j < offset + 6) continue;
    grown.block<6, 1>(offset, j) = cross.col(old_index(j));
    grown.block<1, 6>(j, offset) = cross.col(old_index(j)).transpose();
  }
  grown.block<6, 6>(offset, offset) =
      j_base * covariance_.topLeftCorner(kLinkDim, kLinkDim) *
          j_base.transpose() +
      j_q * r_q * j_q.transpose();
  covariance_ = grown;
  symmetrize(covariance_);
}

void SingleImuEkf::drop_foot(int foot_index) {
  const int offset = offset_of(foot_index);
  const int old_dim = covariance_.rows();
  MatX shrunk(old_dim - 6, old_dim - 6);
  auto new_index = [&](int i) { return i < offset ? i : i + 6; };
  for (int i = 0; i < old_dim - 6; ++i) {
    for (int j = 0; j < old_dim - 6; ++j) {
      shrunk(i, j) = covariance_(new_index(i), new_index(j));
    }
  }
  covariance_ = shrunk;
  feet_[foot_index].active = false;
}

SingleImuEkf::Info SingleImuEkf::step(const SensorFrame& frame) {
  if (!initialized_) {
    throw std::logic_error("step: filter not initialized");
  }
  if (!(frame.t > t_)) {
    throw InvalidInput("step: non-monotone timestamp");
  }
  const double dt = frame.t - t_;
  if (frame.imu.size() != chain_.imus().size() ||
      frame.forces.size() != chain_.feet().size() ||
      frame.joint_angles.size() != chain_.n_joints()) {
    throw InvalidInput("step: frame layout does not match the robot");
  }
  Info info;
  info.t = frame.t;

  // Base prediction (identical to the multi-IMU floating model); foot
  // states are constants with configured process noise.
  const ImuNoise& noise = config_.noise.for_imu(chain_.imus()[base_imu_].name);
  const LinkTransition tr =
      floating_transition(base_, frame.imu[base_imu_], dt, config_.gravity,
                          baseline_noise_density(noise));
  base_ = tr.state;
  const int d = dim();
  MatX a = MatX::Identity(d, d);
  a.topLeftCorner(kLinkDim, kLinkDim) = tr.A;
  MatX q_mat = MatX::Zero(d, d);
  q_mat.topLeftCorner(kLinkDim, kLinkDim) = tr.Q;
  for (size_t f = 0; f < feet_.size(); ++f) {
    if (!feet_[f].active) continue;
    const int off = offset_of(static_cast<int>(f));
    q_mat.block<6, 6>(off, off) =
        config_.foothold_process_noise * dt * Eigen::Matrix<double, 6, 6>::Identity();
  }
  covariance_ = predict_covariance(covariance_, a, q_mat);
  t_ = frame.t;

  // Flat-contact reclassification; create/drop foothold states.
  std::vector<bool> flat(feet_.size());
  for (size_t f = 0; f < feet_.size(); ++f) {
    flat[f] = detectors_[f].update(
        FootForces::clamped(frame.forces[f].newtons), frame.t);
    info.foot_contacts.push_back(flat[f]);
  }

  const JointState q = kinematic_state(frame, dt);
  q_kin_ = q;

  for (size_t f = 0; f < feet_.size(); ++f) {
    if (flat[f] && !feet_[f].active) add_foot(static_cast<int>(f), q);
    if (!flat[f] && feet_[f].active) drop_foot(static_cast<int>(f));
  }

  // Joint full-pose correction over the active feet (shared encoder noise).
  std::vector<int> active;
  for (size_t f = 0; f < feet_.size(); ++f) {
    if (feet_[f].active) active.push_back(static_cast<int>(f));
  }
  if (!active.empty()) {
    const int rows = 6 * static_cast<int>(active.size());
    LinearizedMeasurement m;
    m.C = MatX::Zero(rows, dim());
    m.D = MatX::Zero(rows, chain_.n_joints());
    m.innovation = VecX::Zero(rows);
    m.R = config_.noise.encoder_std * config_.noise.encoder_std *
          MatX::Identity(chain_.n_joints(), chain_.n_joints());
    bool degenerate = false;
    for (size_t k = 0; k < active.size(); ++k) {
      const int f = active[k];
      const int row = 6 * static_cast<int>(k);
      const int off = offset_of(f);
      const FootState& foot = feet_[f];
      const Mat3 rel_rot = base_.rotation.transpose() * foot.rotation;
      const Vec3 rel_pos =
          base_.rotation.transpose() * (foot.position - base_.position);
      const RelativePose meas = forward_kinematics(
          chain_, q, chain_.imus()[base_imu_].link, foot.link);
      try {
        m.innovation.segment<3>(row) = so3::ominus(meas.rotation, rel_rot);
      } catch (const std::domain_error&) {
        degenerate = true;
        break;
      }
      m.innovation.segment<3>(row + 3) = meas.translation - rel_pos;

      m.C.block<3, 3>(row, kTheta) = -foot.rotation.transpose() * base_.rotation;
      m.C.block<3, 3>(row, off) = kI3;
      m.C.block<3, 3>(row + 3, kTheta) = so3::hat(rel_pos);
      m.C.block<3, 3>(row + 3, kPos) = -base_.rotation.transpose();
      m.C.block<3, 3>(row + 3, off + 3) = base_.rotation.transpose();

      const KinematicJacobians jac = kinematic_jacobians(
          chain_, q, chain_.imus()[base_imu_].link, foot.link);
      m.D.block(row, 0, 3, chain_.n_joints()) =
          jac.rotation.leftCols(chain_.n_joints());
      m.D.block(row + 3, 0, 3, chain_.n_joints()) =
          jac.position.leftCols(chain_.n_joints());
    }
    if (!degenerate) {
      const CorrectionResult r =
          kalman_correct(covariance_, m, config_.max_condition);
      if (r.applied) {
        info.correction_applied = true;
        info.innovation_before = m.innovation.norm();
        base_ = link_oplus(base_, r.delta.head<kLinkDim>());
        for (int f : active) {
          const int off = offset_of(f);
          feet_[f].rotation =
              so3::oplus(feet_[f].rotation, r.delta.segment<3>(off));
          feet_[f].position += r.delta.segment<3>(off + 3);
        }
        covariance_ = r.covariance;
      }
    }
  }
  return info;
}

}  // namespace mimu
