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

#ifndef MIMU_ROBOT_MODEL_HPP
#define MIMU_ROBOT_MODEL_HPP

#include <array>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "mimu/manifold.hpp"

namespace mimu {

struct RevoluteJoint {
  std::string name;
  int parent{-1};
  int child{-1};
  Vec3 axis{Vec3::UnitZ()};
  Mat3 offset_rotation{Mat3::Identity()};
  Vec3 offset_translation{Vec3::Zero()};
};

/// A structural flexibility point, modeled as a rotation around the origin
/// of the frame where it sits: either just before a joint's rotation
/// ("pre", anchored at the joint origin) or just after it ("post").
struct DeformationFrame {
  std::string name;
  int joint{-1};
  enum class Placement { kPre, kPost } placement{Placement::kPre};
};

struct ImuMount {
  std::string name;
  int link{-1};
  Mat3 rotation{Mat3::Identity()};
  Vec3 translation{Vec3::Zero()};
};

/// Sole geometry of one foot. Force sensor order is front-left,
/// front-right, back-left, back-right, so (0,3) and (1,2) are the
/// diagonally opposed pairs.
struct FootGeometry {
  int link{-1};
  std::vector<Vec3> sole_polygon;
  std::array<Vec3, 4> force_sensors;
};

/// Configuration of the chain: one angle per revolute joint plus one
/// rotation per deformation frame.
struct JointState {
  VecX angles;
  std::vector<Mat3> deformations;
};

struct RelativePose {
  Mat3 rotation{Mat3::Identity()};
  Vec3 translation{Vec3::Zero()};
};

struct Pose {
  Mat3 rotation{Mat3::Identity()};
  Vec3 position{Vec3::Zero()};
};

/// Tree-structured kinematic description of the robot, loaded from the
/// versioned JSON robot file (see docs/robot_schema.md). Immutable after
/// construction.
class KinematicChain {
 public:
  static KinematicChain from_json_file(const std::string& path);
  static KinematicChain from_json(const nlohmann::json& j);

  int n_links() const { return static_cast<int>(link_names_.size()); }
  int n_joints() const { return static_cast<int>(joints_.size()); }
  int n_deformations() const { return static_cast<int>(deformations_.size()); }
  /// Tangent dimension of a JointState: angles plus 3 per deformation frame.
  int dof() const { return n_joints() + 3 * n_deformations(); }

  const std::string& name() const { return name_; }
  const std::string& link_name(int link) const { return link_names_.at(link); }
  int link_index(const std::string& name) const;         // throws on unknown
  int joint_index(const std::string& name) const;        // throws on unknown
  int root_link() const { return root_; }
  int parent_link(int link) const { return parent_.at(link); }
  /// Joint whose child is `link`; -1 for the root.
  int joint_of_link(int link) const { return joint_of_link_.at(link); }

  const std::vector<RevoluteJoint>& joints() const { return joints_; }
  const std::vector<DeformationFrame>& deformation_frames() const {
    return deformations_;
  }
  const std::vector<ImuMount>& imus() const { return imus_; }
  const std::vector<FootGeometry>& feet() const { return feet_; }

  bool is_instrumented(int link) const { return imu_of_link_.at(link) >= 0; }
  /// Index into imus() for an instrumented link; -1 otherwise.
  int imu_of_link(int link) const { return imu_of_link_.at(link); }
  /// Links carrying an IMU, in imus() order.
  std::vector<int> instrumented_links() const;
  const FootGeometry& foot(int link) const;               // throws on non-foot
  bool is_foot(int link) const;

  /// Deformation frames attached to joint `j`, pre first.
  const std::vector<int>& deformations_of_joint(int j) const {
    return defs_of_joint_.at(j);
  }

  JointState identity_joint_state() const;

  /// Links ordered so that parents precede children.
  const std::vector<int>& topological_order() const { return topo_; }

 private:
  void validate_and_index();

  std::string name_;
  std::vector<std::string> link_names_;
  std::vector<int> parent_;
  std::vector<int> joint_of_link_;
  std::vector<int> imu_of_link_;
  std::vector<RevoluteJoint> joints_;
  std::vector<DeformationFrame> deformations_;
  std::vector<ImuMount> imus_;
  std::vector<FootGeometry> feet_;
  std::vector<int> topo_;
  std::vector<std::vector<int>> defs_of_joint_;
  int root_{-1};
};

/// World (root-frame) poses of every link frame for configuration q.
std::vector<Pose> link_poses(const KinematicChain& chain, const JointState& q);
/// Allocation-free variant for hot loops.
void link_poses_into(const KinematicChain& chain, const JointState& q,
                     std::vector<Pose>& out);

/// Pose of a link's tracking frame: the IMU mount frame when the link is
/// instrumented, the link frame otherwise.
Pose frame_pose(const KinematicChain& chain, const JointState& q, int link);
Pose frame_pose(const KinematicChain& chain, const std::vector<Pose>& poses,
                int link);

/// Pose of the frame in which deformation `d` is expressed, evaluated with
/// that deformation replaced by identity.
Pose deformation_frame_pose(const KinematicChain& chain, const JointState& q,
                            int d);

/// Relative pose of link j's tracking frame in link i's tracking frame:
/// (Ri^T Rj, Ri^T (pj - pi)). Exact identity for i == j.
RelativePose forward_kinematics(const KinematicChain& chain,
                                const JointState& q, int link_i, int link_j);

struct KinematicJacobians {
  MatX rotation;  // 3 x dof
  MatX position;  // 3 x dof
};

/// Central finite differences of forward_kinematics in the perturbation
/// parametrization of q (additive angles, right-multiplied deformation
/// rotations). Columns: all joint angles, then 3 per deformation frame.
/// Off-path columns are exactly zero.
KinematicJacobians kinematic_jacobians(const KinematicChain& chain,
                                       const JointState& q, int link_i,
                                       int link_j, double step = 1e-6);

/// Joint/deformation indices on the tree path between two links.
struct PathDofs {
  std::vector<int> joints;
  std::vector<int> deformations;
};
PathDofs path_dofs(const KinematicChain& chain, int link_i, int link_j);

/// q with a tangent perturbation applied (same column layout as the
/// Jacobians).
JointState joint_state_oplus(const KinematicChain& chain, const JointState& q,
                             const VecX& delta);

/// Estimates the deformation rotations from per-IMU tilt measurements.
///
/// Walks the tree outward from the stance foot. Each time the walk reaches
/// the next instrumented link, the tilt predicted by the chain built so far
/// is compared against that link's measured tilt; the minimal rotation
/// reconciling the two is stored at the first deformation frame crossed
/// since the previous IMU, expressed in that frame. Frames not enclosed by
/// an IMU pair keep the identity. Discrepancies below 1e-12 rad and
/// antipodal tilt pairs leave the frame at its prior value (the latter with
/// a diagnostic on the returned struct).
struct DeformationEstimate {
  JointState q;
  int antipodal_skips{0};
};
DeformationEstimate estimate_deformations(const KinematicChain& chain,
                                          const JointState& q_rigid,
                                          const std::map<int, Vec3>& tilts,
                                          int stance_foot);

}  // namespace mimu

#endif  // MIMU_ROBOT_MODEL_HPP
