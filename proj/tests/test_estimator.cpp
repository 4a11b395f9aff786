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

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "fd_oracles.hpp"
#include "mimu/estimator.hpp"
#include "mimu/json_util.hpp"
#include "test_util.hpp"

using namespace mimu;
using namespace mimu::testutil;

namespace {

const Vec3 kGravity(0.0, 0.0, -9.81);

KinematicChain biped() {
  static KinematicChain chain = KinematicChain::from_json_file(
      std::string(MIMU_SOURCE_DIR) + "/configs/biped.json");
  return chain;
}

LinkState random_link_state(std::mt19937& rng) {
  LinkState x;
  x.rotation = random_rotation(rng);
  x.position = random_vec3(rng);
  x.velocity = random_vec3(rng, 0.5);
  x.gyro_bias = random_vec3(rng, 0.01);
  x.accel_bias = random_vec3(rng, 0.1);
  return x;
}

ImuSample random_imu(std::mt19937& rng) {
  return {random_vec3(rng, 1.0), random_vec3(rng, 3.0)};
}

double rel_err(const MatX& a, const MatX& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

/// Standing robot: zero joint angles, consistent IMU/tilt/force channels.
struct StandingRig {
  KinematicChain chain = biped();
  std::vector<LinkState> links;
  JointState q;

  StandingRig() {
    q = chain.identity_joint_state();
    for (const auto& imu : chain.imus()) {
      const Pose pose = frame_pose(chain, q, imu.link);
      LinkState x;
      x.rotation = pose.rotation;
      x.position = pose.position;
      links.push_back(x);
    }
  }

  SensorFrame frame(double t, double left_load = 100.0,
                    double right_load = 100.0) const {
    SensorFrame f;
    f.t = t;
    for (const auto& x : links) {
      ImuSample s;
      s.gyro = Vec3::Zero();
      s.accel = x.rotation.transpose() * Vec3(0, 0, 9.81);
      f.imu.push_back(s);
    }
    f.joint_angles = q.angles;
    f.forces.push_back(FootForces{{left_load, left_load, left_load, left_load}});
    f.forces.push_back(
        FootForces{{right_load, right_load, right_load, right_load}});
    for (const auto& x : links) {
      f.tilt.push_back(x.rotation.transpose() * Vec3::UnitZ());
    }
    return f;
  }
};

FilterConfig default_config() {
  FilterConfig config;
  config.noise = NoiseConfig();  // MEMS-class defaults
  return config;
}

}  // namespace

TEST_SUITE_BEGIN("estimator");

TEST_CASE("floating prediction: gravity-compensated rest is a fixed point") {
  LinkState x;
  x.gyro_bias = Vec3(0.01, -0.02, 0.005);
  ImuSample imu;
  imu.gyro = x.gyro_bias;
  imu.accel = Vec3(0, 0, 9.81);
  const auto out = predict_floating(x, imu, 0.001, kGravity);
  CHECK((out.state.rotation - x.rotation).norm() == 0.0);
  CHECK((out.state.position - x.position).norm() == 0.0);
  CHECK(out.state.velocity.norm() == 0.0);
}

TEST_CASE("floating prediction: pure z-spin advances R by Exp and p by v dt") {
  LinkState x;
  x.velocity = Vec3(0.3, 0, 0);
  ImuSample imu;
  imu.gyro = Vec3(0, 0, 1);
  imu.accel = x.rotation.transpose() * Vec3(0, 0, 9.81);
  const double dt = 0.001;
  const auto out = predict_floating(x, imu, dt, kGravity);
  CHECK((out.state.rotation - so3::exp(Vec3(0, 0, dt))).norm() < 1e-15);
  CHECK((out.state.position - (x.position + x.velocity * dt)).norm() < 1e-15);
  CHECK((out.state.velocity - x.velocity).norm() < 1e-15);

  ImuSample bad;
  bad.gyro = Vec3(0, 0, std::numeric_limits<double>::quiet_NaN());
  CHECK_THROWS_AS(predict_floating(x, bad, dt, kGravity),
                  std::invalid_argument);
  CHECK_THROWS_AS(predict_floating(x, imu, 0.5, kGravity),
                  std::invalid_argument);
}

TEST_CASE("floating F and G match the finite-difference oracle") {
  std::mt19937 rng(127);
  for (int i = 0; i < 25; ++i) {
    const LinkState x = random_link_state(rng);
    const ImuSample imu = random_imu(rng);
    const auto analytic = predict_floating(x, imu, 0.001, kGravity);
    const auto fd = fd_floating_jacobians(x, imu, kGravity);
    CHECK(rel_err(analytic.F, fd.F) < 1e-5);
    CHECK(rel_err(analytic.G, fd.G) < 1e-5);
  }
}

TEST_CASE("contact prediction: zero gyro rests on the pivot") {
  std::mt19937 rng(131);
  LinkState x = random_link_state(rng);
  ImuSample imu;
  imu.gyro = x.gyro_bias;
  const auto out = predict_contact(x, imu, Vec3(0.05, 0, 0.08), 0.001);
  CHECK((out.state.position - x.position).norm() == 0.0);
  CHECK(out.state.velocity.norm() == 0.0);
}

TEST_CASE("contact prediction: axis-aligned pivot velocity") {
  LinkState x;
  ImuSample imu;
  imu.gyro = Vec3(0, 0, 1);
  const double dt = 0.001;
  const auto out = predict_contact(x, imu, Vec3(1, 0, 0), dt);
  CHECK((out.state.velocity - Vec3(0, 1, 0)).norm() < 1e-15);
  CHECK((out.state.position - Vec3(0, dt, 0)).norm() < 1e-15);
}

TEST_CASE("contact reduced F/G match the finite-difference oracle") {
  std::mt19937 rng(137);
  for (int i = 0; i < 25; ++i) {
    const LinkState x = random_link_state(rng);
    const ImuSample imu = random_imu(rng);
    const Vec3 lever = random_vec3(rng, 0.1);
    const auto analytic = predict_contact(x, imu, lever, 0.001);
    const auto fd = fd_contact_jacobians(x, imu, lever);
    CHECK(rel_err(analytic.F_reduced, fd.F) < 1e-5);
    CHECK(rel_err(analytic.G_reduced, fd.G) < 1e-5);
  }
}

TEST_CASE("contact velocity reconstruction matches its defining function") {
  std::mt19937 rng(139);
  for (int i = 0; i < 25; ++i) {
    const LinkState x = random_link_state(rng);
    const ImuSample imu = random_imu(rng);
    const Vec3 lever = random_vec3(rng, 0.1);
    const auto analytic = predict_contact(x, imu, lever, 0.001);
    const auto fd = fd_contact_velocity(x, imu, lever);
    CHECK(rel_err(analytic.dv_dtheta, fd.dv_dtheta) < 1e-7);
    CHECK(rel_err(analytic.dv_dgyro_bias, fd.dv_dbg) < 1e-7);

    // Exact coefficient form.
    const Vec3 omega = imu.gyro - x.gyro_bias;
    CHECK((analytic.dv_dtheta + x.rotation * so3::hat(omega.cross(lever)))
              .norm() == 0.0);
    CHECK((analytic.dv_dgyro_bias - x.rotation * so3::hat(lever)).norm() ==
          0.0);
  }
}

TEST_CASE("contact transition embeds the velocity rows and zero columns") {
  std::mt19937 rng(149);
  const LinkState x = random_link_state(rng);
  const ImuSample imu = random_imu(rng);
  const Vec3 lever = random_vec3(rng, 0.1);
  const Mat12 h = 1e-4 * Mat12::Identity();
  const auto tr = contact_transition(x, imu, lever, 0.001, h);
  const auto pred = predict_contact(x, imu, lever, 0.001);

  CHECK(tr.A.block<15, 3>(0, kVel).norm() == 0.0);  // no prior-velocity carry
  CHECK((tr.A.block<3, 3>(kVel, kTheta) - pred.dv_dtheta).norm() == 0.0);
  CHECK((tr.A.block<3, 3>(kVel, kGyroBias) - pred.dv_dgyro_bias).norm() == 0.0);
  // p integrates the same sampled noise that v reads out instantaneously:
  // Q_vv = Q_pp / dt^2, Q_pv = Q_pp / dt.
  const double dt = 0.001;
  CHECK((tr.Q.block<3, 3>(kVel, kVel) -
         tr.Q.block<3, 3>(kPos, kPos) / (dt * dt))
            .norm() < 1e-12 * tr.Q.block<3, 3>(kVel, kVel).norm());
  CHECK((tr.Q.block<3, 3>(kPos, kVel) - tr.Q.block<3, 3>(kPos, kPos) / dt)
            .norm() < 1e-12 * tr.Q.block<3, 3>(kPos, kVel).norm());
}

TEST_CASE("assemble_and_predict matches the dense block-diagonal oracle") {
  std::mt19937 rng(151);
  const int n = 3;
  MatX P = random_psd(rng, n * kLinkDim);

  std::vector<Mat15> A(n), Q(n);
  for (int i = 0; i < n; ++i) {
    A[i] = Mat15::Identity() + 0.01 * random_matx(rng, 15, 15);
    const MatX q = random_psd(rng, 15, 0.1);
    Q[i] = q;
  }

  SUBCASE("identity transition leaves P unchanged") {
    std::vector<Mat15> ident(n, Mat15::Identity());
    std::vector<Mat15> zero(n, Mat15::Zero());
    CHECK((assemble_and_predict(P, ident, zero) - P).norm() < 1e-12);
  }

  SUBCASE("zero cross-covariance stays zero") {
    MatX blocky = MatX::Zero(n * kLinkDim, n * kLinkDim);
    for (int i = 0; i < n; ++i) {
      blocky.block<15, 15>(15 * i, 15 * i) = random_psd(rng, 15);
    }
    const MatX out = assemble_and_predict(blocky, A, Q);
    CHECK(out.block<15, 15>(0, 15).norm() == 0.0);
    CHECK(out.block<15, 15>(15, 30).norm() == 0.0);
  }

  SUBCASE("dense equivalence") {
    MatX dense_a = MatX::Zero(n * kLinkDim, n * kLinkDim);
    MatX dense_q = MatX::Zero(n * kLinkDim, n * kLinkDim);
    for (int i = 0; i < n; ++i) {
      dense_a.block<15, 15>(15 * i, 15 * i) = A[i];
      dense_q.block<15, 15>(15 * i, 15 * i) = Q[i];
    }
    const MatX expected = predict_covariance(P, dense_a, dense_q);
    CHECK((assemble_and_predict(P, A, Q) - expected).norm() < 1e-12);
  }
}

TEST_CASE("tilt correction: exact tilt leaves the mean, contracts the trace") {
  StandingRig rig;
  MultiImuEkf filter(rig.chain, default_config());
  filter.initialize_at(0.0, rig.links);
  FilterBelief belief = filter.belief();

  const int index = rig.chain.imu_of_link(rig.chain.link_index("l_foot"));
  const Vec3 exact =
      belief.links[index].rotation.transpose() * Vec3::UnitZ();
  const double trace_before = belief.covariance.trace();
  const auto outcome = tilt_correction(
      belief, index, exact, 1e-6 * Eigen::Matrix2d::Identity());
  CHECK(outcome.applied);
  CHECK(outcome.innovation_before == 0.0);
  CHECK((belief.links[index].rotation - rig.links[index].rotation).norm() ==
        0.0);
  CHECK(belief.covariance.trace() <= trace_before);
}

TEST_CASE("tilt correction: 0.01 rad offset produces a 0.01 innovation") {
  StandingRig rig;
  MultiImuEkf filter(rig.chain, default_config());
  filter.initialize_at(0.0, rig.links);
  FilterBelief belief = filter.belief();

  const int index = rig.chain.imu_of_link(rig.chain.link_index("l_foot"));
  // links[index].rotation is the identity in the standing rig.
  REQUIRE((belief.links[index].rotation - Mat3::Identity()).norm() == 0.0);
  const Vec3 measured = so3::exp(0.01 * Vec3::UnitX()) * Vec3::UnitZ();
  const auto m = build_tilt_measurement(belief, index, measured,
                                        1e-6 * Eigen::Matrix2d::Identity());
  REQUIRE(m.has_value());
  CHECK(std::abs(m->innovation.norm() - 0.01) < 1e-6);

  const auto outcome = tilt_correction(belief, index, measured,
                                       1e-6 * Eigen::Matrix2d::Identity());
  CHECK(outcome.applied);
  CHECK(outcome.innovation_after < outcome.innovation_before);
}

TEST_CASE("tilt correction: antipodal measurement is skipped") {
  StandingRig rig;
  MultiImuEkf filter(rig.chain, default_config());
  filter.initialize_at(0.0, rig.links);
  FilterBelief belief = filter.belief();
  const int index = rig.chain.imu_of_link(rig.chain.link_index("l_foot"));
  CHECK_FALSE(build_tilt_measurement(belief, index, -Vec3::UnitZ(),
                                     Eigen::Matrix2d::Identity())
                  .has_value());
}

TEST_CASE("tilt C and D match the finite-difference oracle") {
  std::mt19937 rng(157);
  StandingRig rig;
  for (int i = 0; i < 25; ++i) {
    MultiImuEkf filter(rig.chain, default_config());
    auto links = rig.links;
    const int index = rig.chain.imu_of_link(rig.chain.link_index("r_foot"));
    links[index].rotation = random_rotation(rng);
    filter.initialize_at(0.0, links);
    FilterBelief belief = filter.belief();

    const Vec3 predicted =
        links[index].rotation.transpose() * Vec3::UnitZ();
    const auto m = build_tilt_measurement(belief, index, predicted,
                                          Eigen::Matrix2d::Identity());
    REQUIRE(m.has_value());
    const FdTilt fd = fd_tilt_jacobians(links[index].rotation);
    CHECK(rel_err(m->C.block<2, 3>(0, index * kLinkDim + kTheta), fd.C) < 1e-5);
    CHECK(rel_err(m->D, fd.D) < 1e-5);
    // Off-block columns are exactly zero.
    MatX c_copy = m->C;
    c_copy.block<2, 3>(0, index * kLinkDim + kTheta).setZero();
    CHECK(c_copy.norm() == 0.0);
  }
}

TEST_CASE("relpose correction: consistent belief gives zero innovation") {
  StandingRig rig;
  MultiImuEkf filter(rig.chain, default_config());
  filter.initialize_at(0.0, rig.links);
  FilterBelief belief = filter.belief();

  const std::vector<RelposePair> pairs = {
      {rig.chain.imu_of_link(rig.chain.link_index("l_foot")), 0,
       rig.chain.link_index("l_foot"), rig.chain.link_index("pelvis")}};
  const auto m = build_relpose_measurement(belief, rig.chain, rig.q, pairs,
                                           5e-4, 1e-3);
  REQUIRE(m.has_value());
  CHECK(m->innovation.norm() < 1e-12);
}

TEST_CASE("relpose correction pulls a shifted link back") {
  StandingRig rig;
  MultiImuEkf filter(rig.chain, default_config());
  auto links = rig.links;
  links[0].position += Vec3(0.01, 0, 0);  // pelvis off by 1 cm
  filter.initialize_at(0.0, links);
  FilterBelief belief = filter.belief();

  const std::vector<RelposePair> pairs = {
      {rig.chain.imu_of_link(rig.chain.link_index("l_foot")), 0,
       rig.chain.link_index("l_foot"), rig.chain.link_index("pelvis")}};
  const auto m = build_relpose_measurement(belief, rig.chain, rig.q, pairs,
                                           5e-4, 1e-3);
  REQUIRE(m.has_value());
  // Position innovation is the -x shift expressed in the contact frame.
  CHECK(std::abs(m->innovation.tail<3>().x() + 0.01) < 1e-12);

  const auto outcome = relpose_correction(belief, rig.chain, rig.q, pairs,
                                          5e-4, 1e-3);
  CHECK(outcome.applied);
  CHECK(outcome.innovation_after < outcome.innovation_before);
  CHECK(outcome.weighted_after <= outcome.weighted_before + 1e-12);
  CHECK((belief.links[0].position - links[0].position).norm() > 1e-4);
}

TEST_CASE("relpose C and D match the finite-difference oracle") {
  std::mt19937 rng(163);
  const KinematicChain chain = biped();
  const int foot = chain.link_index("l_foot");
  const int pelvis = chain.link_index("pelvis");
  const int ci = chain.imu_of_link(foot);

  for (int i = 0; i < 10; ++i) {
    JointState q = chain.identity_joint_state();
    q.angles = random_vecx(rng, chain.n_joints(), 0.3);
    for (auto& d : q.deformations) d = so3::exp(0.03 * random_unit(rng));

    // Kinematically consistent belief: the floating link placed by FK.
    const Mat3 ri = random_rotation(rng);
    const Vec3 pi = random_vec3(rng);
    const RelativePose rel = forward_kinematics(chain, q, foot, pelvis);

    MultiImuEkf filter(chain, default_config());
    StandingRig rig;
    auto links = rig.links;
    links[ci].rotation = ri;
    links[ci].position = pi;
    links[0].rotation = ri * rel.rotation;
    links[0].position = pi + ri * rel.translation;
    filter.initialize_at(0.0, links);
    FilterBelief belief = filter.belief();

    const std::vector<RelposePair> pairs = {{ci, 0, foot, pelvis}};
    const auto m =
        build_relpose_measurement(belief, chain, q, pairs, 5e-4, 1e-3);
    REQUIRE(m.has_value());
    REQUIRE(m->innovation.norm() < 1e-9);

    const FdRelpose fd = fd_relpose_jacobians(chain, q, foot, pelvis, ri, pi);
    MatX c_impl(6, 12);
    c_impl << m->C.block<6, 3>(0, ci * kLinkDim + kTheta),
        m->C.block<6, 3>(0, ci * kLinkDim + kPos),
        m->C.block<6, 3>(0, 0 * kLinkDim + kTheta),
        m->C.block<6, 3>(0, 0 * kLinkDim + kPos);
    CHECK(rel_err(c_impl, fd.C_blocks) < 1e-5);
    CHECK(rel_err(m->D, fd.D) < 1e-5);
  }
}

TEST_CASE("tilt correction with block-diagonal P only moves the target link") {
  StandingRig rig;
  MultiImuEkf filter(rig.chain, default_config());
  filter.initialize_at(0.0, rig.links);  // initial P is block diagonal
  FilterBelief belief = filter.belief();

  const int index = rig.chain.imu_of_link(rig.chain.link_index("l_foot"));
  const Vec3 measured = so3::exp(0.02 * Vec3::UnitY()) * Vec3::UnitZ();
  tilt_correction(belief, index, measured, 1e-6 * Eigen::Matrix2d::Identity());
  for (size_t k = 0; k < belief.links.size(); ++k) {
    if (static_cast<int>(k) == index) continue;
    CHECK((belief.links[k].rotation - rig.links[k].rotation).norm() == 0.0);
    CHECK((belief.links[k].position - rig.links[k].position).norm() == 0.0);
  }
}

TEST_CASE("flight reduces to per-link inertial integration") {
  StandingRig rig;
  MultiImuEkf filter(rig.chain, default_config());
  filter.initialize_at(0.0, rig.links);

  std::vector<LinkState> reference = rig.links;
  for (int k = 1; k <= 200; ++k) {
    SensorFrame f = rig.frame(k * 0.001, 0.0, 0.0);  // zero forces: flight
    f.imu[0].gyro = Vec3(0.1, 0.2, -0.1);            // swing the pelvis IMU
    const StepInfo info = filter.step(f);
    CHECK_FALSE(info.any_contact);
    CHECK(info.tilt_applied == 0);
    CHECK_FALSE(info.relpose_applied);
    for (size_t i = 0; i < reference.size(); ++i) {
      reference[i] =
          predict_floating(reference[i], f.imu[i], 0.001, kGravity).state;
    }
  }
  for (size_t i = 0; i < reference.size(); ++i) {
    CHECK((filter.belief().links[i].rotation - reference[i].rotation).norm() <
          1e-12);
    CHECK((filter.belief().links[i].position - reference[i].position).norm() <
          1e-12);
  }
}

TEST_CASE("unobservable variances grow monotonically in flight") {
  StandingRig rig;
  MultiImuEkf filter(rig.chain, default_config());
  filter.initialize_at(0.0, rig.links);

  double yaw_var = filter.belief().covariance(kTheta + 2, kTheta + 2);
  double pos_var = filter.belief().covariance(kPos, kPos);
  for (int k = 1; k <= 300; ++k) {
    filter.step(rig.frame(k * 0.001, 0.0, 0.0));
    const double new_yaw = filter.belief().covariance(kTheta + 2, kTheta + 2);
    const double new_pos = filter.belief().covariance(kPos, kPos);
    CHECK(new_yaw >= yaw_var);
    CHECK(new_pos >= pos_var);
    yaw_var = new_yaw;
    pos_var = new_pos;
  }
}

TEST_CASE("standing still for 10 s: no pose drift, healthy covariance") {
  StandingRig rig;
  MultiImuEkf filter(rig.chain, default_config());
  filter.initialize_at(0.0, rig.links, nullptr);

  for (int k = 1; k <= 10000; ++k) {
    const StepInfo info = filter.step(rig.frame(k * 0.001));
    CHECK(info.any_contact);
  }
  for (size_t i = 0; i < rig.links.size(); ++i) {
    CHECK((filter.belief().links[i].position - rig.links[i].position).norm() <
          1e-6);
    CHECK(so3::ominus(filter.belief().links[i].rotation, rig.links[i].rotation)
              .norm() < 1e-6);
  }
  const MatX& P = filter.belief().covariance;
  CHECK((P - P.transpose()).norm() < 1e-9);
  Eigen::SelfAdjointEigenSolver<MatX> eig(P);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("contact toggling never jumps the means or breaks the covariance") {
  StandingRig rig;
  MultiImuEkf filter(rig.chain, default_config());
  filter.initialize_at(0.0, rig.links, nullptr);

  std::vector<double> trace_delta;
  double prev_trace = filter.belief().covariance.trace();
  for (int k = 1; k <= 300; ++k) {
    // Lift the left foot between ticks 100 and 150.
    const double left = (k >= 100 && k < 150) ? 0.0 : 100.0;
    filter.step(rig.frame(k * 0.001, left, 100.0));
    const double trace = filter.belief().covariance.trace();
    trace_delta.push_back(std::abs(trace - prev_trace));
    prev_trace = trace;

    for (size_t i = 0; i < rig.links.size(); ++i) {
      CHECK((filter.belief().links[i].position - rig.links[i].position)
                .norm() < 1e-9);
    }
    Eigen::SelfAdjointEigenSolver<MatX> eig(filter.belief().covariance);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
  }
  // The trace change at the transition ticks stays within the range set by
  // ordinary process noise steps (one Q step), not a discontinuity.
  double regular = 0.0;
  for (size_t k = 0; k < trace_delta.size(); ++k) {
    if (k < 95 || (k > 155 && k < 295)) regular = std::max(regular, trace_delta[k]);
  }
  CHECK(trace_delta[99] <= 3.0 * regular);
  CHECK(trace_delta[149] <= 3.0 * regular);
}

TEST_CASE("output is invariant under a no-op reset hook") {
  StandingRig rig;

  FilterConfig plain = default_config();
  MultiImuEkf a(rig.chain, plain);
  a.initialize_at(0.0, rig.links, nullptr);

  FilterConfig hooked = default_config();
  hooked.reset_hook = [](FilterBelief&, const VecX&) {};
  MultiImuEkf b(rig.chain, hooked);
  b.initialize_at(0.0, rig.links, nullptr);

  for (int k = 1; k <= 500; ++k) {
    SensorFrame f = rig.frame(k * 0.001);
    f.imu[0].gyro = Vec3(0.02, 0.0, 0.01);  // make the estimates move
    a.step(f);
    b.step(f);
  }
  for (size_t i = 0; i < rig.links.size(); ++i) {
    CHECK((a.belief().links[i].rotation - b.belief().links[i].rotation).norm() <
          1e-12);
    CHECK((a.belief().links[i].position - b.belief().links[i].position).norm() <
          1e-12);
  }
  CHECK((a.belief().covariance - b.belief().covariance).norm() < 1e-12);
}

TEST_CASE("static initialization aligns tilts and zeroes the base") {
  StandingRig rig;
  MultiImuEkf filter(rig.chain, default_config());

  std::vector<SensorFrame> warmup;
  for (int k = 0; k < 1000; ++k) warmup.push_back(rig.frame(k * 0.001));
  filter.initialize_static(warmup);

  const auto& belief = filter.belief();
  CHECK(belief.links[0].position.norm() < 1e-12);
  for (size_t i = 0; i < belief.links.size(); ++i) {
    const Vec3 tilt = belief.links[i].rotation.transpose() * Vec3::UnitZ();
    const Vec3 expected =
        rig.links[i].rotation.transpose() * Vec3::UnitZ();
    CHECK((tilt - expected).norm() < 1e-9);
  }

  // Consistent initialization: the first correction has ~zero innovation.
  const StepInfo info = filter.step(rig.frame(1.0));
  CHECK(info.relpose_applied);
  CHECK(info.relpose.innovation_before < 1e-9);
}

TEST_CASE("step rejects non-monotone timestamps and bad layouts") {
  StandingRig rig;
  MultiImuEkf filter(rig.chain, default_config());
  filter.initialize_at(0.0, rig.links, nullptr);
  filter.step(rig.frame(0.001));
  CHECK_THROWS_AS(filter.step(rig.frame(0.001)), InvalidInput);
  SensorFrame bad = rig.frame(0.002);
  bad.imu.pop_back();
  CHECK_THROWS_AS(filter.step(bad), InvalidInput);
}

TEST_SUITE_END();
