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

#include "mimu/estimator.hpp"

#include <Eigen/Cholesky>
#include <stdexcept>

#include "mimu/json_util.hpp"

namespace mimu {
namespace {

const Mat3 kI3 = Mat3::Identity();

void require_finite(const ImuSample& imu) {
  if (!imu.gyro.allFinite() || !imu.accel.allFinite()) {
    throw std::invalid_argument("prediction: non-finite IMU sample");
  }
}

void require_dt(double dt) {
  if (!(dt > 0.0) || dt > 0.1) {
    throw std::invalid_argument("prediction: dt must lie in (0, 0.1]");
  }
}

/// Columns are the first two rows of R: an orthonormal basis of the plane
/// orthogonal to the tilt R^T e_z.
Mat32 tilt_basis(const Mat3& rotation) {
  Mat32 b;
  b.col(0) = rotation.row(0).transpose();
  b.col(1) = rotation.row(1).transpose();
  return b;
}

}  // namespace

LinkState link_oplus(const LinkState& x, const Eigen::Matrix<double, 15, 1>& d) {
  LinkState out = x;
  out.rotation = so3::oplus(x.rotation, d.segment<3>(kTheta));
  out.position += d.segment<3>(kPos);
  out.velocity += d.segment<3>(kVel);
  out.gyro_bias += d.segment<3>(kGyroBias);
  out.accel_bias += d.segment<3>(kAccelBias);
  return out;
}

FloatingPrediction predict_floating(const LinkState& x, const ImuSample& imu,
                                    double dt, const Vec3& gravity) {
  require_finite(imu);
  require_dt(dt);
  const Vec3 omega = imu.gyro - x.gyro_bias;
  const Vec3 accel_world = x.rotation * (imu.accel - x.accel_bias) + gravity;

  FloatingPrediction out;
  out.state = x;
  out.state.rotation = so3::oplus(x.rotation, omega * dt);
  out.state.position = x.position + x.velocity * dt + accel_world * (dt * dt / 2);
  out.state.velocity = x.velocity + accel_world * dt;

  out.F.setZero();
  out.F.block<3, 3>(kTheta, kTheta) = -so3::hat(omega);
  out.F.block<3, 3>(kTheta, kGyroBias) = -kI3;
  out.F.block<3, 3>(kPos, kVel) = kI3;
  out.F.block<3, 3>(kVel, kTheta) = -x.rotation * so3::hat(imu.accel - x.accel_bias);
  out.F.block<3, 3>(kVel, kAccelBias) = -x.rotation;

  out.G.setZero();
  out.G.block<3, 3>(kTheta, 0) = -kI3;
  out.G.block<3, 3>(kVel, 3) = -x.rotation;
  out.G.block<3, 3>(kGyroBias, 6) = kI3;
  out.G.block<3, 3>(kAccelBias, 9) = kI3;
  return out;
}

ContactPrediction predict_contact(const LinkState& x, const ImuSample& imu,
                                  const Vec3& lever, double dt) {
  require_finite(imu);
  require_dt(dt);
  if (!lever.allFinite()) {
    throw std::invalid_argument("predict_contact: non-finite lever arm");
  }
  const Vec3 omega = imu.gyro - x.gyro_bias;
  const Vec3 pivot_velocity = x.rotation * omega.cross(lever);

  ContactPrediction out;
  out.state = x;
  out.state.rotation = so3::oplus(x.rotation, omega * dt);
  out.state.position = x.position + pivot_velocity * dt;
  out.state.velocity = pivot_velocity;

  // Reduced state rows/cols: theta(0), p(3), bg(6), ba(9).
  out.F_reduced.setZero();
  out.F_reduced.block<3, 3>(0, 0) = -so3::hat(omega);
  out.F_reduced.block<3, 3>(0, 6) = -kI3;
  out.F_reduced.block<3, 3>(3, 0) = -x.rotation * so3::hat(omega.cross(lever));
  out.F_reduced.block<3, 3>(3, 6) = x.rotation * so3::hat(lever);

  out.G_reduced.setZero();
  out.G_reduced.block<3, 3>(0, 0) = -kI3;
  out.G_reduced.block<3, 3>(3, 0) = x.rotation * so3::hat(lever);
  out.G_reduced.block<3, 3>(3, 9) = kI3;
  out.G_reduced.block<3, 3>(6, 3) = kI3;
  out.G_reduced.block<3, 3>(9, 6) = kI3;

  out.dv_dtheta = -x.rotation * so3::hat(omega.cross(lever));
  out.dv_dgyro_bias = x.rotation * so3::hat(lever);
  return out;
}

LinkTransition floating_transition(const LinkState& x, const ImuSample& imu,
                                   double dt, const Vec3& gravity,
                                   const Mat12& noise_density) {
  const FloatingPrediction p = predict_floating(x, imu, dt, gravity);
  LinkTransition out;
  out.state = p.state;
  out.A = Mat15::Identity() + p.F * dt;
  out.Q = p.G * noise_density * p.G.transpose() * dt;
  out.Q = ((out.Q + out.Q.transpose()) * 0.5).eval();
  return out;
}

LinkTransition contact_transition(const LinkState& x, const ImuSample& imu,
                                  const Vec3& lever, double dt,
                                  const Mat12& noise_density) {
  const ContactPrediction p = predict_contact(x, imu, lever, dt);
  const Mat12 a_red = Mat12::Identity() + p.F_reduced * dt;

  LinkTransition out;
  out.state = p.state;

  // Embed the reduced transition; the velocity block is reconstructed
  // instantaneously from theta and the gyro bias (its prior carries no
  // information while the link pivots on the foot).
  out.A.setZero();
  const std::array<int, 4> full{kTheta, kPos, kGyroBias, kAccelBias};
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      out.A.block<3, 3>(full[r], full[c]) = a_red.block<3, 3>(3 * r, 3 * c);
    }
  }
  out.A.block<3, 3>(kVel, kTheta) = p.dv_dtheta;
  out.A.block<3, 3>(kVel, kGyroBias) = p.dv_dgyro_bias;

  // The sampled (zero-order-hold) noise over one interval has covariance
  // H / dt. Integrated rows pick it up times dt; the velocity rows read it
  // instantaneously, so they scale by 1 and end up with variance H / dt.
  Mat15x12 g_scaled = Mat15x12::Zero();
  g_scaled.block<3, 3>(kTheta, 0) = -kI3 * dt;
  g_scaled.block<3, 3>(kPos, 0) = x.rotation * so3::hat(lever) * dt;
  g_scaled.block<3, 3>(kPos, 9) = kI3 * dt;
  g_scaled.block<3, 3>(kVel, 0) = x.rotation * so3::hat(lever);
  g_scaled.block<3, 3>(kVel, 9) = kI3;
  g_scaled.block<3, 3>(kGyroBias, 3) = kI3 * dt;
  g_scaled.block<3, 3>(kAccelBias, 6) = kI3 * dt;
  out.Q = g_scaled * (noise_density / dt) * g_scaled.transpose();
  out.Q = ((out.Q + out.Q.transpose()) * 0.5).eval();
  return out;
}

MatX assemble_and_predict(const MatX& P, const std::vector<Mat15>& A,
                          const std::vector<Mat15>& Q) {
  const int n = static_cast<int>(A.size());
  if (P.rows() != n * kLinkDim || P.cols() != n * kLinkDim ||
      Q.size() != A.size()) {
    throw std::invalid_argument("assemble_and_predict: dimension mismatch");
  }
  MatX out(P.rows(), P.cols());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      out.block<kLinkDim, kLinkDim>(i * kLinkDim, j * kLinkDim) =
          A[i] * P.block<kLinkDim, kLinkDim>(i * kLinkDim, j * kLinkDim) *
          A[j].transpose();
    }
    out.block<kLinkDim, kLinkDim>(i * kLinkDim, i * kLinkDim) += Q[i];
  }
  symmetrize(out);
  return out;
}

void inject_error(FilterBelief& belief, const VecX& delta) {
  if (delta.size() != belief.dim()) {
    throw std::invalid_argument("inject_error: wrong tangent dimension");
  }
  for (size_t i = 0; i < belief.links.size(); ++i) {
    belief.links[i] = link_oplus(
        belief.links[i],
        delta.segment<kLinkDim>(static_cast<int>(i) * kLinkDim));
  }
}

std::optional<LinearizedMeasurement> build_tilt_measurement(
    const FilterBelief& belief, int index, const Vec3& measured_tilt,
    const Eigen::Matrix2d& noise) {
  const Mat3& r = belief.links.at(index).rotation;
  const Vec3 predicted = r.transpose() * Vec3::UnitZ();
  const Vec3 measured = measured_tilt.normalized();
  if (1.0 + predicted.dot(measured) < s2::kAntipodalTol) {
    return std::nullopt;
  }
  const Mat32 basis = tilt_basis(r);
  const Mat3 hat2 = so3::hat(predicted) * so3::hat(predicted);

  LinearizedMeasurement m;
  m.innovation = basis.transpose() * so3::log(s2::rot_between(predicted, measured));
  m.C = MatX::Zero(2, belief.dim());
  m.C.block<2, 3>(0, index * kLinkDim + kTheta) = basis.transpose() * hat2;
  m.D = -basis.transpose() * hat2 * basis;
  m.R = noise;
  return m;
}

std::optional<LinearizedMeasurement> build_relpose_measurement(
    const FilterBelief& belief, const KinematicChain& chain,
    const JointState& q, const std::vector<RelposePair>& pairs,
    double angle_std, double deformation_std) {
  if (pairs.empty()) return std::nullopt;
  const int rows = 6 * static_cast<int>(pairs.size());
  const int q_dim = chain.dof();

  LinearizedMeasurement m;
  m.C = MatX::Zero(rows, belief.dim());
  m.D = MatX::Zero(rows, q_dim);
  m.innovation = VecX::Zero(rows);
  m.R = MatX::Zero(q_dim, q_dim);
  m.R.topLeftCorner(chain.n_joints(), chain.n_joints()) =
      angle_std * angle_std * MatX::Identity(chain.n_joints(), chain.n_joints());
  const int nd = 3 * chain.n_deformations();
  m.R.bottomRightCorner(nd, nd) =
      deformation_std * deformation_std * MatX::Identity(nd, nd);

  for (size_t k = 0; k < pairs.size(); ++k) {
    const auto& pair = pairs[k];
    const LinkState& xi = belief.links.at(pair.contact_index);
    const LinkState& xj = belief.links.at(pair.floating_index);
    const int row = 6 * static_cast<int>(k);

    const Mat3 rel_rot = xi.rotation.transpose() * xj.rotation;
    const Vec3 rel_pos = xi.rotation.transpose() * (xj.position - xi.position);
    const RelativePose measured =
        forward_kinematics(chain, q, pair.contact_link, pair.floating_link);

    try {
      m.innovation.segment<3>(row) = so3::ominus(measured.rotation, rel_rot);
    } catch (const std::domain_error&) {
      return std::nullopt;  // predicted and measured poses half a turn apart
    }
    m.innovation.segment<3>(row + 3) = measured.translation - rel_pos;

    const int ci = pair.contact_index * kLinkDim;
    const int cj = pair.floating_index * kLinkDim;
    m.C.block<3, 3>(row, ci + kTheta) = -xj.rotation.transpose() * xi.rotation;
    m.C.block<3, 3>(row, cj + kTheta) = kI3;
    m.C.block<3, 3>(row + 3, ci + kTheta) = so3::hat(rel_pos);
    m.C.block<3, 3>(row + 3, ci + kPos) = -xi.rotation.transpose();
    m.C.block<3, 3>(row + 3, cj + kPos) = xi.rotation.transpose();

    const KinematicJacobians jac =
        kinematic_jacobians(chain, q, pair.contact_link, pair.floating_link);
    m.D.block(row, 0, 3, q_dim) = jac.rotation;
    m.D.block(row + 3, 0, 3, q_dim) = jac.position;
  }
  return m;
}

namespace {

/// Innovation recomputed at the current belief, for the post-update checks.
VecX relpose_innovation(const FilterBelief& belief, const KinematicChain& chain,
                        const JointState& q,
                        const std::vector<RelposePair>& pairs) {
  VecX innovation = VecX::Zero(6 * pairs.size());
  for (size_t k = 0; k < pairs.size(); ++k) {
    const auto& pair = pairs[k];
    const LinkState& xi = belief.links.at(pair.contact_index);
    const LinkState& xj = belief.links.at(pair.floating_index);
    const RelativePose measured =
        forward_kinematics(chain, q, pair.contact_link, pair.floating_link);
    innovation.segment<3>(6 * k) = so3::ominus(
        measured.rotation, xi.rotation.transpose() * xj.rotation);
    innovation.segment<3>(6 * k + 3) =
        measured.translation -
        xi.rotation.transpose() * (xj.position - xi.position);
  }
  return innovation;
}

}  // namespace

CorrectionOutcome tilt_correction(FilterBelief& belief, int index,
                                  const Vec3& measured_tilt,
                                  const Eigen::Matrix2d& noise,
                                  double max_condition) {
  CorrectionOutcome out;
  const auto m = build_tilt_measurement(belief, index, measured_tilt, noise);
  if (!m) return out;
  const CorrectionResult r = kalman_correct(belief.covariance, *m, max_condition);
  if (!r.applied) return out;
  out.applied = true;
  out.innovation_before = m->innovation.norm();
  inject_error(belief, r.delta);
  belief.covariance = r.covariance;
  const Vec3 tilt_after =
      belief.links[index].rotation.transpose() * Vec3::UnitZ();
  out.innovation_after =
      so3::log(s2::rot_between(tilt_after, measured_tilt.normalized())).norm();
  return out;
}

CorrectionOutcome relpose_correction(FilterBelief& belief,
                                     const KinematicChain& chain,
                                     const JointState& q,
                                     const std::vector<RelposePair>& pairs,
                                     double angle_std, double deformation_std,
                                     double max_condition) {
  CorrectionOutcome out;
  const auto m = build_relpose_measurement(belief, chain, q, pairs, angle_std,
                                           deformation_std);
  if (!m) return out;
  const MatX P = belief.covariance;
  const CorrectionResult r = kalman_correct(P, *m, max_condition);
  if (!r.applied) return out;

  MatX S = m->C * P * m->C.transpose() + m->D * m->R * m->D.transpose();
  symmetrize(S);
  const Eigen::LDLT<MatX> s_ldlt(S);

  out.applied = true;
  out.innovation_before = m->innovation.norm();
  out.weighted_before = m->innovation.dot(s_ldlt.solve(m->innovation));

  inject_error(belief, r.delta);
  belief.covariance = r.covariance;

  const VecX after = relpose_innovation(belief, chain, q, pairs);
  out.innovation_after = after.norm();
  out.weighted_after = after.dot(s_ldlt.solve(after));
  return out;
}

namespace {

Mat12 floating_noise_density(const ImuNoise& n) {
  Mat12 h = Mat12::Zero();
  h.block<3, 3>(0, 0) = n.gyro_density * n.gyro_density * kI3;
  h.block<3, 3>(3, 3) = n.accel_density * n.accel_density * kI3;
  h.block<3, 3>(6, 6) = n.gyro_walk * n.gyro_walk * kI3;
  h.block<3, 3>(9, 9) = n.accel_walk * n.accel_walk * kI3;
  return h;
}

Mat12 contact_noise_density(const ImuNoise& n, double slippage_std) {
  Mat12 h = Mat12::Zero();
  h.block<3, 3>(0, 0) = n.gyro_density * n.gyro_density * kI3;
  h.block<3, 3>(3, 3) = n.gyro_walk * n.gyro_walk * kI3;
  h.block<3, 3>(6, 6) = n.accel_walk * n.accel_walk * kI3;
  h.block<3, 3>(9, 9) = slippage_std * slippage_std * kI3;
  return h;
}

}  // namespace

MultiImuEkf::MultiImuEkf(KinematicChain chain, FilterConfig config)
    : chain_(std::move(chain)), config_(std::move(config)) {
  if (chain_.imus().size() < 3) {
    throw InvalidInput("multi-IMU filter needs at least 3 IMUs");
  }
  if (chain_.feet().size() != 2) {
    throw InvalidInput("multi-IMU filter needs both feet described");
  }
  config_.contact.mode = ContactMode::kAnySensor;
  for (size_t f = 0; f < chain_.feet().size(); ++f) {
    detectors_.emplace_back(config_.contact);
  }
  q_kin_ = chain_.identity_joint_state();
}

void MultiImuEkf::seed_detectors(const SensorFrame& frame) {
  for (size_t f = 0; f < chain_.feet().size(); ++f) {
    auto& foot = belief_.feet[f];
    foot.in_contact = detectors_[f].update(
        FootForces::clamped(frame.forces.at(f).newtons), frame.t);
    if (foot.in_contact) {
      foot.cop = center_of_pressure(frame.forces[f],
                                    chain_.feet()[f].force_sensors);
      foot.lever = lever_arm(chain_, foot.link, foot.cop);
    }
  }
}

void MultiImuEkf::initialize_at(double t, const std::vector<LinkState>& links,
                                const SensorFrame* frame) {
  if (links.size() != chain_.imus().size()) {
    throw std::invalid_argument("initialize_at: one state per IMU required");
  }
  belief_.t = t;
  belief_.links = links;
  const int n = static_cast<int>(links.size());
  VecX diag(kLinkDim);
  const InitialStd& s = config_.initial_std;
  diag << s.orientation, s.orientation, s.orientation, s.position, s.position,
      s.position, s.velocity, s.velocity, s.velocity, s.gyro_bias, s.gyro_bias,
      s.gyro_bias, s.accel_bias, s.accel_bias, s.accel_bias;
  belief_.covariance = MatX::Zero(n * kLinkDim, n * kLinkDim);
  for (int i = 0; i < n; ++i) {
    belief_.covariance.block<kLinkDim, kLinkDim>(i * kLinkDim, i * kLinkDim) =
        diag.cwiseProduct(diag).asDiagonal();
  }
  belief_.feet.clear();
  for (const auto& foot : chain_.feet()) {
    belief_.feet.push_back({foot.link, false, Vec3::Zero(), Vec3::Zero()});
  }
  fallback_ready_ = false;
  if (frame != nullptr) {
    seed_detectors(*frame);
    if (frame->has_tilt()) {
      fallback_tilt_ = frame->tilt;
    } else {
      fallback_tilt_.clear();
      for (const auto& imu : frame->imu) {
        fallback_tilt_.push_back(imu.accel.normalized());
      }
    }
    fallback_ready_ = true;
  }
  initialized_ = true;
}

void MultiImuEkf::initialize_static(const std::vector<SensorFrame>& warmup) {
  if (warmup.empty()) {
    throw InvalidInput("initialize_static: empty warmup window");
  }
  // Tilt per IMU from the accelerometer average over the window.
  std::vector<Vec3> accel_sum(chain_.imus().size(), Vec3::Zero());
  for (const auto& frame : warmup) {
    for (size_t k = 0; k < accel_sum.size(); ++k) {
      accel_sum[k] += frame.imu.at(k).accel;
    }
  }

  const SensorFrame& last = warmup.back();
  JointState q = chain_.identity_joint_state();
  q.angles = last.joint_angles;

  // Base: tilt-aligned orientation, zero yaw and position by convention.
  const Vec3 base_tilt = accel_sum[0].normalized();
  const Mat32 b = s2::tangent_basis(base_tilt);
  Mat3 base_rot;
  base_rot.row(0) = b.col(0).transpose();
  base_rot.row(1) = base_tilt.cross(b.col(0)).transpose();
  base_rot.row(2) = base_tilt.transpose();

  const int base_link = chain_.imus()[0].link;
  std::vector<LinkState> links(chain_.imus().size());
  for (size_t k = 0; k < chain_.imus().size(); ++k) {
    const RelativePose rel =
        forward_kinematics(chain_, q, base_link, chain_.imus()[k].link);
    links[k].rotation = base_rot * rel.rotation;
    links[k].position = base_rot * rel.translation;
  }
  initialize_at(last.t, links, &last);
}

std::vector<Vec3> MultiImuEkf::tilts_for(const SensorFrame& frame, double dt) {
  if (frame.has_tilt()) return frame.tilt;
  // Complementary fallback: rotate the tilt by the gyro, pull it toward the
  // normalized accelerometer direction.
  if (!fallback_ready_) {
    fallback_tilt_.clear();
    for (const auto& imu : frame.imu) {
      fallback_tilt_.push_back(imu.accel.normalized());
    }
    fallback_ready_ = true;
    return fallback_tilt_;
  }
  for (size_t k = 0; k < frame.imu.size(); ++k) {
    Vec3 u = fallback_tilt_[k];
    u = (u + u.cross(frame.imu[k].gyro) * dt).normalized();
    const Vec3 accel_dir = frame.imu[k].accel.norm() > 1e-6
                               ? frame.imu[k].accel.normalized()
                               : u;
    u = (u + config_.tilt_fallback_gain * (accel_dir - u)).normalized();
    fallback_tilt_[k] = u;
  }
  return fallback_tilt_;
}

StepInfo MultiImuEkf::step(const SensorFrame& frame) {
  if (!initialized_) {
    throw std::logic_error("step: filter not initialized");
  }
  if (!(frame.t > belief_.t)) {
    throw InvalidInput("step: non-monotone timestamp");
  }
  const double dt = frame.t - belief_.t;
  if (frame.imu.size() != chain_.imus().size() ||
      frame.forces.size() != chain_.feet().size() ||
      frame.joint_angles.size() != chain_.n_joints()) {
    throw InvalidInput("step: frame layout does not match the robot");
  }

  StepInfo info;
  info.t = frame.t;
  info.dt = dt;

  // Prediction with the contact state committed at the previous tick.
  const int n = static_cast<int>(belief_.links.size());
  std::vector<Mat15> A(n), Q(n);
  for (int i = 0; i < n; ++i) {
    const std::string& name = chain_.imus()[i].name;
    const ImuNoise& noise = config_.noise.for_imu(name);
    const int link = chain_.imus()[i].link;
    const FootContactState* foot = nullptr;
    for (const auto& f : belief_.feet) {
      if (f.link == link && f.in_contact) foot = &f;
    }
    LinkTransition tr =
        foot ? contact_transition(belief_.links[i], frame.imu[i], foot->lever,
                                  dt,
                                  contact_noise_density(
                                      noise, config_.noise.slippage_std))
             : floating_transition(belief_.links[i], frame.imu[i], dt,
                                   config_.gravity,
                                   floating_noise_density(noise));
    belief_.links[i] = tr.state;
    A[i] = tr.A;
    Q[i] = tr.Q;
  }
  belief_.covariance = assemble_and_predict(belief_.covariance, A, Q);
  belief_.t = frame.t;

  // Contact reclassification from this frame's force readings.
  for (size_t f = 0; f < belief_.feet.size(); ++f) {
    auto& foot = belief_.feet[f];
    const FootForces forces = FootForces::clamped(frame.forces[f].newtons);
    foot.in_contact = detectors_[f].update(forces, frame.t);
    if (foot.in_contact) {
      foot.cop = center_of_pressure(forces, chain_.feet()[f].force_sensors);
      foot.lever = lever_arm(chain_, foot.link, foot.cop);
    }
    info.foot_contacts.push_back(foot.in_contact);
    info.any_contact = info.any_contact || foot.in_contact;
  }

  const std::vector<Vec3> tilts = tilts_for(frame, dt);

  // Kinematic state for the corrections.
  q_kin_.angles = frame.joint_angles;
  if (!config_.extended_kinematics) {
    q_kin_.deformations.assign(chain_.n_deformations(), Mat3::Identity());
  } else if (info.any_contact) {
    int stance = -1;
    for (const auto& foot : belief_.feet) {
      if (foot.in_contact) {
        stance = foot.link;
        break;
      }
    }
    std::map<int, Vec3> tilt_map;
    for (size_t k = 0; k < chain_.imus().size(); ++k) {
      tilt_map[chain_.imus()[k].link] = tilts[k];
    }
    const JointState raw = estimate_deformations(chain_, q_kin_, tilt_map,
                                                 stance).q;
    const double gain = config_.deformation_smoothing;
    for (int d = 0; d < chain_.n_deformations(); ++d) {
      const Vec3 delta = so3::ominus(raw.deformations[d], q_kin_.deformations[d]);
      q_kin_.deformations[d] = so3::oplus(q_kin_.deformations[d], gain * delta);
    }
  }

  if (info.any_contact) {
    // Tilt corrections, one contact link at a time.
    const double tilt_std = frame.has_tilt()
                                ? config_.noise.tilt_std
                                : std::max(config_.noise.tilt_std,
                                           config_.tilt_fallback_std);
    const Eigen::Matrix2d tilt_noise =
        tilt_std * tilt_std * Eigen::Matrix2d::Identity();
    for (const auto& foot : belief_.feet) {
      if (!foot.in_contact) continue;
      const int index = chain_.imu_of_link(foot.link);
      const CorrectionOutcome outcome =
          tilt_correction(belief_, index, tilts[index], tilt_noise,
                          config_.max_condition);
      outcome.applied ? ++info.tilt_applied : ++info.tilt_skipped;
      if (outcome.applied && config_.reset_hook) {
        config_.reset_hook(belief_, VecX());
      }
    }

    // Relative pose of every floating link with respect to every contact
    // link, stacked into a single update.
    std::vector<RelposePair> pairs;
    for (const auto& foot : belief_.feet) {
      if (!foot.in_contact) continue;
      for (size_t k = 0; k < chain_.imus().size(); ++k) {
        const int link = chain_.imus()[k].link;
        bool in_contact = false;
        for (const auto& other : belief_.feet) {
          if (other.link == link && other.in_contact) in_contact = true;
        }
        if (in_contact) continue;
        pairs.push_back({chain_.imu_of_link(foot.link),
                         static_cast<int>(k), foot.link, link});
      }
    }
    info.relpose_pairs = static_cast<int>(pairs.size());
    if (!pairs.empty()) {
      info.relpose = relpose_correction(
          belief_, chain_, q_kin_, pairs, config_.noise.encoder_std,
          config_.noise.deformation_std,
          std::min(config_.max_condition, config_.relpose_max_condition));
      info.relpose_applied = info.relpose.applied;
      if (info.relpose.applied && config_.reset_hook) {
        config_.reset_hook(belief_, VecX());
      }
    }
  }
  return info;
}

}  // namespace mimu
