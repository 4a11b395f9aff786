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

#include <json.hpp>

#include "mimu/json_util.hpp"
#include "mimu/robot_model.hpp"
#include "test_util.hpp"

using namespace mimu;
using nlohmann::json;
using testutil::random_unit;
using testutil::random_vecx;

namespace {

KinematicChain biped() {
  static KinematicChain chain = KinematicChain::from_json_file(
      std::string(MIMU_SOURCE_DIR) + "/configs/biped.json");
  return chain;
}

// base -> hinge (z axis at the base origin) -> tip (fixed 1 m x offset).
KinematicChain planar_arm() {
  json j = {
      {"schema_version", 1},
      {"name", "arm"},
      {"links", {"base", "hinge", "tip"}},
      {"joints",
       {{{"name", "shoulder"},
         {"parent", "base"},
         {"child", "hinge"},
         {"axis", {0, 0, 1}},
         {"offset_translation", {0, 0, 0}}},
        {{"name", "wrist"},
         {"parent", "hinge"},
         {"child", "tip"},
         {"axis", {0, 0, 1}},
         {"offset_translation", {1, 0, 0}}}}},
      {"imus", json::array()},
      {"feet", json::array()},
  };
  return KinematicChain::from_json(j);
}

JointState random_state(const KinematicChain& chain, std::mt19937& rng,
                        double angle_scale = 0.4, double def_scale = 0.05) {
  JointState q = chain.identity_joint_state();
  q.angles = random_vecx(rng, chain.n_joints(), angle_scale);
  for (auto& d : q.deformations) {
    d = so3::exp(def_scale * random_unit(rng));
  }
  return q;
}

}  // namespace

TEST_SUITE_BEGIN("robot_model");

TEST_CASE("chain loading validates structure") {
  const KinematicChain chain = biped();
  CHECK(chain.n_links() == 13);
  CHECK(chain.n_joints() == 12);
  CHECK(chain.n_deformations() == 4);
  CHECK(chain.dof() == 24);
  CHECK(chain.imus().size() == 5);
  CHECK(chain.root_link() == chain.link_index("pelvis"));
  CHECK(chain.is_foot(chain.link_index("l_foot")));
  CHECK_THROWS_AS(chain.link_index("nonexistent"), InvalidInput);

  json bad = {{"schema_version", 1},
              {"links", {"a"}},
              {"joints", json::array()},
              {"imus", json::array()},
              {"feet", json::array()},
              {"surprise", 1}};
  CHECK_THROWS_AS(KinematicChain::from_json(bad), InvalidInput);
}

TEST_CASE("forward kinematics: self pose is the exact identity") {
  const KinematicChain chain = biped();
  std::mt19937 rng(71);
  const JointState q = random_state(chain, rng);
  const int foot = chain.link_index("l_foot");
  const RelativePose self = forward_kinematics(chain, q, foot, foot);
  CHECK((self.rotation - Mat3::Identity()).norm() == 0.0);
  CHECK(self.translation.norm() == 0.0);
  CHECK_THROWS_AS(forward_kinematics(chain, q, 0, 99), std::invalid_argument);
}

TEST_CASE("forward kinematics: single revolute joint hand check") {
  const KinematicChain chain = planar_arm();
  JointState q = chain.identity_joint_state();
  q.angles[0] = M_PI_2;  // shoulder
  const RelativePose rel = forward_kinematics(
      chain, q, chain.link_index("base"), chain.link_index("tip"));
  CHECK((rel.translation - Vec3(0, 1, 0)).norm() < 1e-15);
  CHECK((rel.rotation - so3::exp(Vec3(0, 0, M_PI_2))).norm() < 1e-15);
}

TEST_CASE("forward kinematics composes and inverts consistently") {
  const KinematicChain chain = biped();
  std::mt19937 rng(73);
  const int pelvis = chain.link_index("pelvis");
  const int shank = chain.link_index("l_shank");
  const int foot = chain.link_index("l_foot");
  for (int i = 0; i < 20; ++i) {
    const JointState q = random_state(chain, rng);
    const RelativePose a = forward_kinematics(chain, q, pelvis, shank);
    const RelativePose b = forward_kinematics(chain, q, shank, foot);
    const RelativePose c = forward_kinematics(chain, q, pelvis, foot);
    CHECK((a.rotation * b.rotation - c.rotation).norm() < 1e-12);
    CHECK((a.translation + a.rotation * b.translation - c.translation).norm() <
          1e-12);

    const RelativePose inv = forward_kinematics(chain, q, foot, pelvis);
    CHECK((c.rotation * inv.rotation - Mat3::Identity()).norm() < 1e-12);
    CHECK((c.rotation * inv.translation + c.translation).norm() < 1e-12);
  }
}

TEST_CASE("jacobians: immobile pair and single-joint analytic column") {
  const KinematicChain chain = planar_arm();
  JointState q = chain.identity_joint_state();
  q.angles[0] = 0.7;

  const auto self = kinematic_jacobians(chain, q, 1, 1);
  CHECK(self.rotation.norm() == 0.0);
  CHECK(self.position.norm() == 0.0);

  const auto jac = kinematic_jacobians(chain, q, 0, 2);
  const Vec3 lever = forward_kinematics(chain, q, 0, 2).translation;
  const Vec3 expected = Vec3::UnitZ().cross(lever);
  CHECK((jac.position.col(0) - expected).norm() < 1e-9);
  CHECK((jac.rotation.col(0) - Vec3::UnitZ()).norm() < 1e-9);
}

TEST_CASE("jacobians agree across two finite-difference step sizes") {
  const KinematicChain chain = biped();
  std::mt19937 rng(79);
  const int pelvis = chain.link_index("pelvis");
  const int foot = chain.link_index("r_foot");
  for (int i = 0; i < 5; ++i) {
    const JointState q = random_state(chain, rng);
    const auto j5 = kinematic_jacobians(chain, q, pelvis, foot, 1e-5);
    const auto j6 = kinematic_jacobians(chain, q, pelvis, foot, 1e-6);
    const double scale = std::max(1.0, j5.position.norm());
    CHECK((j5.position - j6.position).norm() / scale < 1e-4);
    CHECK((j5.rotation - j6.rotation).norm() /
              std::max(1.0, j5.rotation.norm()) <
          1e-4);
  }
}

TEST_CASE("jacobians satisfy the first-order remainder bound") {
  const KinematicChain chain = biped();
  std::mt19937 rng(83);
  const int shank = chain.link_index("l_shank");
  const int foot = chain.link_index("r_foot");
  for (int i = 0; i < 30; ++i) {
    const JointState q = random_state(chain, rng);
    const auto jac = kinematic_jacobians(chain, q, shank, foot);
    const RelativePose base = forward_kinematics(chain, q, shank, foot);
    const VecX dq = random_vecx(rng, chain.dof(), 0.01);
    const RelativePose moved =
        forward_kinematics(chain, joint_state_oplus(chain, q, dq), shank, foot);
    const Vec3 dr = so3::ominus(moved.rotation, base.rotation);
    const Vec3 dp = moved.translation - base.translation;
    const double bound = 10.0 * dq.squaredNorm();
    CHECK((dr - jac.rotation * dq).norm() <= bound);
    CHECK((dp - jac.position * dq).norm() <= bound);
  }
}

TEST_CASE("deformation estimation: consistent tilts give identity") {
  const KinematicChain chain = biped();
  std::mt19937 rng(89);
  const JointState q = random_state(chain, rng, 0.3, 0.0);
  std::map<int, Vec3> tilts;
  for (int link : chain.instrumented_links()) {
    tilts[link] = frame_pose(chain, q, link).rotation.transpose() * Vec3::UnitZ();
  }
  const auto est =
      estimate_deformations(chain, q, tilts, chain.link_index("l_foot"));
  for (const auto& d : est.q.deformations) {
    CHECK((d - Mat3::Identity()).norm() < 1e-9);
  }
  CHECK(est.antipodal_skips == 0);
}

TEST_CASE("deformation estimation recovers an injected tilt-observable twist") {
  const KinematicChain chain = biped();
  std::mt19937 rng(97);
  JointState q_true = random_state(chain, rng, 0.3, 0.0);
  const int d_hip = 0;  // l_hip_flex

  // Axis orthogonal to the gravity direction seen by the deformation frame.
  const Vec3 g_local = deformation_frame_pose(chain, q_true, d_hip)
                           .rotation.transpose() *
                       Vec3::UnitZ();
  const Vec3 axis = g_local.cross(Vec3::UnitX()).normalized();
  q_true.deformations[d_hip] = so3::exp(0.01 * axis);

  std::map<int, Vec3> tilts;
  for (int link : chain.instrumented_links()) {
    tilts[link] =
        frame_pose(chain, q_true, link).rotation.transpose() * Vec3::UnitZ();
  }
  JointState q_rigid = q_true;
  q_rigid.deformations.assign(chain.n_deformations(), Mat3::Identity());

  const auto est =
      estimate_deformations(chain, q_rigid, tilts, chain.link_index("l_foot"));
  const Vec3 recovered = so3::log(est.q.deformations[d_hip]);
  CHECK(std::abs(recovered.norm() - 0.01) < 1e-6);
  CHECK((est.q.deformations[d_hip] - q_true.deformations[d_hip]).norm() < 1e-6);

  // Estimated chain reproduces the measured tilts.
  for (int link : chain.instrumented_links()) {
    const Vec3 t =
        frame_pose(chain, est.q, link).rotation.transpose() * Vec3::UnitZ();
    // Tilts are reproduced up to the yaw-invisible component.
    CHECK((t - tilts[link]).norm() < 1e-6);
  }
}

TEST_CASE("deformation estimation never alters the gravity component") {
  const KinematicChain chain = biped();
  std::mt19937 rng(101);
  for (int trial = 0; trial < 10; ++trial) {
    JointState q_true = random_state(chain, rng, 0.3, 0.0);
    const int d_hip = 0;
    const Vec3 g_local = deformation_frame_pose(chain, q_true, d_hip)
                             .rotation.transpose() *
                         Vec3::UnitZ();

    SUBCASE("") {}
    // Injected rotation about the gravity direction itself is unobservable.
    q_true.deformations[d_hip] = so3::exp(0.02 * g_local);
    std::map<int, Vec3> tilts;
    for (int link : chain.instrumented_links()) {
      tilts[link] =
          frame_pose(chain, q_true, link).rotation.transpose() * Vec3::UnitZ();
    }
    JointState q_rigid = q_true;
    q_rigid.deformations.assign(chain.n_deformations(), Mat3::Identity());
    const auto est = estimate_deformations(chain, q_rigid, tilts,
                                           chain.link_index("l_foot"));
    CHECK((est.q.deformations[d_hip] - Mat3::Identity()).norm() < 1e-9);
  }
}

TEST_CASE("deformation estimation: general twist keeps gravity axis clean") {
  const KinematicChain chain = biped();
  std::mt19937 rng(103);
  for (int trial = 0; trial < 10; ++trial) {
    JointState q_true = random_state(chain, rng, 0.3, 0.0);
    const int d_hip = 0;
    q_true.deformations[d_hip] = so3::exp(0.03 * random_unit(rng));
    std::map<int, Vec3> tilts;
    for (int link : chain.instrumented_links()) {
      tilts[link] =
          frame_pose(chain, q_true, link).rotation.transpose() * Vec3::UnitZ();
    }
    JointState q_rigid = q_true;
    q_rigid.deformations.assign(chain.n_deformations(), Mat3::Identity());
    const auto est = estimate_deformations(chain, q_rigid, tilts,
                                           chain.link_index("l_foot"));
    // The recovered rotation axis is orthogonal to the local gravity
    // direction: the component about gravity is never introduced.
    const Vec3 g_local = deformation_frame_pose(chain, est.q, d_hip)
                             .rotation.transpose() *
                         Vec3::UnitZ();
    const Vec3 w = so3::log(est.q.deformations[d_hip]);
    CHECK(std::abs(w.dot(g_local)) < 1e-8);
  }
}

TEST_CASE("deformation estimation requires tilts for instrumented links") {
  const KinematicChain chain = biped();
  std::map<int, Vec3> tilts;  // empty
  CHECK_THROWS_AS(estimate_deformations(chain, chain.identity_joint_state(),
                                        tilts, chain.link_index("l_foot")),
                  std::invalid_argument);
}

TEST_SUITE_END();
