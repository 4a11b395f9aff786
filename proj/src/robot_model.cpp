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

#include "mimu/robot_model.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

#include "mimu/json_util.hpp"

namespace mimu {
namespace {

Vec3 read_vec3(const nlohmann::json& j, const std::string& context) {
  if (!j.is_array() || j.size() != 3) {
    throw InvalidInput(context + ": expected a 3-element array");
  }
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Mat3 rotation_from_rpy(const Vec3& rpy) {
  return so3::exp(rpy.z() * Vec3::UnitZ()) * so3::exp(rpy.y() * Vec3::UnitY()) *
         so3::exp(rpy.x() * Vec3::UnitX());
}

Mat3 read_offset_rotation(const nlohmann::json& j, const std::string& context) {
  if (j.contains("offset_rpy")) {
    return rotation_from_rpy(read_vec3(j.at("offset_rpy"), context));
  }
  return Mat3::Identity();
}

}  // namespace

int KinematicChain::link_index(const std::string& name) const {
  for (int i = 0; i < n_links(); ++i) {
    if (link_names_[i] == name) return i;
  }
  throw InvalidInput("unknown link: " + name);
}

int KinematicChain::joint_index(const std::string& name) const {
  for (int i = 0; i < n_joints(); ++i) {
    if (joints_[i].name == name) return i;
  }
  throw InvalidInput("unknown joint: " + name);
}

std::vector<int> KinematicChain::instrumented_links() const {
  std::vector<int> out;
  out.reserve(imus_.size());
  for (const auto& imu : imus_) out.push_back(imu.link);
  return out;
}

bool KinematicChain::is_foot(int link) const {
  return std::any_of(feet_.begin(), feet_.end(),
                     [&](const FootGeometry& f) { return f.link == link; });
}

const FootGeometry& KinematicChain::foot(int link) const {
  for (const auto& f : feet_) {
    if (f.link == link) return f;
  }
  throw InvalidInput("link " + link_name(link) + " is not a foot");
}


JointState KinematicChain::identity_joint_state() const {
  JointState q;
  q.angles = VecX::Zero(n_joints());
  q.deformations.assign(n_deformations(), Mat3::Identity());
  return q;
}

KinematicChain KinematicChain::from_json_file(const std::string& path) {
  return from_json(jsonu::load_file(path));
}

KinematicChain KinematicChain::from_json(const nlohmann::json& j) {
  jsonu::require_keys_in(j,
                         {"schema_version", "name", "links", "joints", "imus",
                          "deformation_frames", "feet"},
                         "robot");
  jsonu::require_schema_version(j, 1, "robot");

  KinematicChain c;
  c.name_ = j.value("name", "robot");
  for (const auto& l : j.at("links")) {
    c.link_names_.push_back(l.get<std::string>());
  }

  for (const auto& jj : j.at("joints")) {
    jsonu::require_keys_in(jj,
                           {"name", "parent", "child", "axis",
                            "offset_translation", "offset_rpy"},
                           "joint");
    RevoluteJoint joint;
    joint.name = jj.at("name").get<std::string>();
    joint.parent = c.link_index(jj.at("parent").get<std::string>());
    joint.child = c.link_index(jj.at("child").get<std::string>());
    joint.axis = read_vec3(jj.at("axis"), "joint " + joint.name + " axis");
    if (std::abs(joint.axis.norm() - 1.0) > 1e-9) {
      throw InvalidInput("joint " + joint.name + ": axis must be unit norm");
    }
    joint.offset_translation = jj.contains("offset_translation")
                                   ? read_vec3(jj.at("offset_translation"),
                                               "joint " + joint.name)
                                   : Vec3::Zero();
    joint.offset_rotation = read_offset_rotation(jj, "joint " + joint.name);
    c.joints_.push_back(joint);
  }

  for (const auto& ij : j.at("imus")) {
    jsonu::require_keys_in(ij, {"name", "link", "offset_translation", "offset_rpy"},
                           "imu");
    ImuMount imu;
    imu.name = ij.at("name").get<std::string>();
    imu.link = c.link_index(ij.at("link").get<std::string>());
    imu.translation = ij.contains("offset_translation")
                          ? read_vec3(ij.at("offset_translation"),
                                      "imu " + imu.name)
                          : Vec3::Zero();
    imu.rotation = read_offset_rotation(ij, "imu " + imu.name);
    c.imus_.push_back(imu);
  }

  if (j.contains("deformation_frames")) {
    for (const auto& dj : j.at("deformation_frames")) {
      jsonu::require_keys_in(dj, {"name", "joint", "placement"}, "deformation");
      DeformationFrame d;
      d.name = dj.at("name").get<std::string>();
      d.joint = c.joint_index(dj.at("joint").get<std::string>());
      const std::string placement = dj.value("placement", "pre");
      if (placement == "pre") {
        d.placement = DeformationFrame::Placement::kPre;
      } else if (placement == "post") {
        d.placement = DeformationFrame::Placement::kPost;
      } else {
        throw InvalidInput("deformation " + d.name +
                           ": placement must be \"pre\" or \"post\"");
      }
      c.deformations_.push_back(d);
    }
  }

  for (const auto& fj : j.at("feet")) {
    jsonu::require_keys_in(fj, {"link", "sole_polygon", "force_sensors"}, "foot");
    FootGeometry f;
    f.link = c.link_index(fj.at("link").get<std::string>());
    for (const auto& v : fj.at("sole_polygon")) {
      f.sole_polygon.push_back(read_vec3(v, "sole_polygon"));
    }
    const auto& sensors = fj.at("force_sensors");
    if (!sensors.is_array() || sensors.size() != 4) {
      throw InvalidInput("foot " + c.link_name(f.link) +
                         ": exactly four force sensors required");
    }
    for (int k = 0; k < 4; ++k) {
      f.force_sensors[k] = read_vec3(sensors[k], "force_sensors");
    }
    c.feet_.push_back(f);
  }

  c.validate_and_index();
  return c;
}

void KinematicChain::validate_and_index() {
  const int n = n_links();
  parent_.assign(n, -1);
  joint_of_link_.assign(n, -1);
  imu_of_link_.assign(n, -1);

  for (int ji = 0; ji < n_joints(); ++ji) {
    const auto& joint = joints_[ji];
    if (joint_of_link_[joint.child] != -1) {
      throw InvalidInput("link " + link_name(joint.child) +
                         " has more than one parent joint");
    }
    joint_of_link_[joint.child] = ji;
    parent_[joint.child] = joint.parent;
  }

  int roots = 0;
  for (int l = 0; l < n; ++l) {
    if (parent_[l] == -1) {
      root_ = l;
      ++roots;
    }
  }
  if (roots != 1) {
    throw InvalidInput("chain must have exactly one root link");
  }

  // Topological order; also catches cycles.
  topo_.clear();
  std::vector<int> depth(n, -1);
  std::deque<int> queue{root_};
  depth[root_] = 0;
  while (!queue.empty()) {
    const int l = queue.front();
    queue.pop_front();
    topo_.push_back(l);
    for (int m = 0; m < n; ++m) {
      if (parent_[m] == l) {
        if (depth[m] != -1) throw InvalidInput("chain contains a cycle");
        depth[m] = depth[l] + 1;
        queue.push_back(m);
      }
    }
  }
  if (static_cast<int>(topo_.size()) != n) {
    throw InvalidInput("chain is not connected");
  }

  for (size_t k = 0; k < imus_.size(); ++k) {
    const int link = imus_[k].link;
    if (imu_of_link_[link] != -1) {
      throw InvalidInput("link " + link_name(link) + " carries two IMUs");
    }
    imu_of_link_[link] = static_cast<int>(k);
  }

  if (!feet_.empty() && feet_.size() != 2) {
    throw InvalidInput("chain must describe both feet (or none)");
  }
  for (const auto& f : feet_) {
    if (imu_of_link_[f.link] < 0) {
      throw InvalidInput("foot " + link_name(f.link) +
                         " must carry an IMU");
    }
  }
  for (int d = 0; d < n_deformations(); ++d) {
    if (deformations_[d].joint < 0 || deformations_[d].joint >= n_joints()) {
      throw InvalidInput("deformation frame with invalid joint");
    }
  }

  defs_of_joint_.assign(n_joints(), {});
  for (int d = 0; d < n_deformations(); ++d) {
    defs_of_joint_[deformations_[d].joint].push_back(d);
  }
  for (auto& defs : defs_of_joint_) {
    std::sort(defs.begin(), defs.end(), [&](int a, int b) {
      return deformations_[a].placement < deformations_[b].placement;
    });
  }
}

void link_poses_into(const KinematicChain& chain, const JointState& q,
                     std::vector<Pose>& poses) {
  if (q.angles.size() != chain.n_joints() ||
      static_cast<int>(q.deformations.size()) != chain.n_deformations()) {
    throw std::invalid_argument("link_poses: joint state does not match chain");
  }
  poses.assign(chain.n_links(), Pose{});
  for (int link : chain.topological_order()) {
    const int ji = chain.joint_of_link(link);
    if (ji < 0) continue;  // root stays at identity
    const auto& joint = chain.joints()[ji];
    const Pose& parent = poses[joint.parent];
    Pose pose;
    pose.position = parent.position + parent.rotation * joint.offset_translation;
    Mat3 r = parent.rotation * joint.offset_rotation;
    for (int d : chain.deformations_of_joint(ji)) {
      if (chain.deformation_frames()[d].placement ==
          DeformationFrame::Placement::kPre) {
        r = r * q.deformations[d];
      }
    }
    r = r * so3::exp(joint.axis * q.angles[ji]);
    for (int d : chain.deformations_of_joint(ji)) {
      if (chain.deformation_frames()[d].placement ==
          DeformationFrame::Placement::kPost) {
        r = r * q.deformations[d];
      }
    }
    pose.rotation = r;
    poses[link] = pose;
  }
}

std::vector<Pose> link_poses(const KinematicChain& chain, const JointState& q) {
  std::vector<Pose> poses;
  link_poses_into(chain, q, poses);
  return poses;
}

Pose frame_pose(const KinematicChain& chain, const std::vector<Pose>& poses,
                int link) {
  if (link < 0 || link >= chain.n_links()) {
    throw std::invalid_argument("frame_pose: unknown link id");
  }
  Pose pose = poses[link];
  const int imu = chain.imu_of_link(link);
  if (imu >= 0) {
    const auto& mount = chain.imus()[imu];
    pose.position += pose.rotation * mount.translation;
    pose.rotation = pose.rotation * mount.rotation;
  }
  return pose;
}

Pose frame_pose(const KinematicChain& chain, const JointState& q, int link) {
  return frame_pose(chain, link_poses(chain, q), link);
}

Pose deformation_frame_pose(const KinematicChain& chain, const JointState& q,
                            int d) {
  const auto& frame = chain.deformation_frames().at(d);
  const auto& joint = chain.joints()[frame.joint];
  JointState q_id = q;
  q_id.deformations[d] = Mat3::Identity();
  const std::vector<Pose> poses = link_poses(chain, q_id);
  const Pose& parent = poses[joint.parent];
  Pose pose;
  pose.position = parent.position + parent.rotation * joint.offset_translation;
  Mat3 r = parent.rotation * joint.offset_rotation;
  if (frame.placement == DeformationFrame::Placement::kPost) {
    for (int other : chain.deformations_of_joint(frame.joint)) {
      if (other != d && chain.deformation_frames()[other].placement ==
                            DeformationFrame::Placement::kPre) {
        r = r * q.deformations[other];
      }
    }
    r = r * so3::exp(joint.axis * q.angles[frame.joint]);
  }
  pose.rotation = r;
  return pose;
}

RelativePose forward_kinematics(const KinematicChain& chain,
                                const JointState& q, int link_i, int link_j) {
  if (link_i < 0 || link_i >= chain.n_links() || link_j < 0 ||
      link_j >= chain.n_links()) {
    throw std::invalid_argument("forward_kinematics: unknown link id");
  }
  if (link_i == link_j) return {};
  const std::vector<Pose> poses = link_poses(chain, q);
  const Pose pi = frame_pose(chain, poses, link_i);
  const Pose pj = frame_pose(chain, poses, link_j);
  RelativePose rel;
  rel.rotation = pi.rotation.transpose() * pj.rotation;
  rel.translation = pi.rotation.transpose() * (pj.position - pi.position);
  return rel;
}

PathDofs path_dofs(const KinematicChain& chain, int link_i, int link_j) {
  // Climb both links to the root, then drop the common suffix.
  auto ancestry = [&](int link) {
    std::vector<int> path{link};
    while (chain.parent_link(path.back()) != -1) {
      path.push_back(chain.parent_link(path.back()));
    }
    return path;
  };
  std::vector<int> pi = ancestry(link_i);
  std::vector<int> pj = ancestry(link_j);
  while (pi.size() > 1 && pj.size() > 1 &&
         pi[pi.size() - 2] == pj[pj.size() - 2]) {
    pi.pop_back();
    pj.pop_back();
  }
  PathDofs out;
  auto add_edges = [&](const std::vector<int>& path) {
    for (size_t k = 0; k + 1 < path.size(); ++k) {
      const int ji = chain.joint_of_link(path[k]);
      out.joints.push_back(ji);
      for (int d : chain.deformations_of_joint(ji)) {
        out.deformations.push_back(d);
      }
    }
  };
  add_edges(pi);
  add_edges(pj);
  return out;
}

JointState joint_state_oplus(const KinematicChain& chain, const JointState& q,
                             const VecX& delta) {
  if (delta.size() != chain.dof()) {
    throw std::invalid_argument("joint_state_oplus: wrong tangent dimension");
  }
  JointState out = q;
  out.angles += delta.head(chain.n_joints());
  for (int d = 0; d < chain.n_deformations(); ++d) {
    const Vec3 dd = delta.segment<3>(chain.n_joints() + 3 * d);
    out.deformations[d] = so3::oplus(q.deformations[d], dd);
  }
  return out;
}

KinematicJacobians kinematic_jacobians(const KinematicChain& chain,
                                       const JointState& q, int link_i,
                                       int link_j, double step) {
  KinematicJacobians jac;
  jac.rotation = MatX::Zero(3, chain.dof());
  jac.position = MatX::Zero(3, chain.dof());
  if (link_i == link_j) return jac;

  JointState q_work = q;
  std::vector<Pose> buffer;
  auto relative = [&]() {
    link_poses_into(chain, q_work, buffer);
    const Pose pi = frame_pose(chain, buffer, link_i);
    const Pose pj = frame_pose(chain, buffer, link_j);
    RelativePose rel;
    rel.rotation = pi.rotation.transpose() * pj.rotation;
    rel.translation = pi.rotation.transpose() * (pj.position - pi.position);
    return rel;
  };
  const RelativePose base = relative();
  const PathDofs dofs = path_dofs(chain, link_i, link_j);

  auto column = [&](int col, const RelativePose& plus,
                    const RelativePose& minus) {
    jac.rotation.col(col) = (so3::ominus(plus.rotation, base.rotation) -
                             so3::ominus(minus.rotation, base.rotation)) /
                            (2.0 * step);
    jac.position.col(col) =
        (plus.translation - minus.translation) / (2.0 * step);
  };

  for (int ji : dofs.joints) {
    q_work.angles[ji] = q.angles[ji] + step;
    const RelativePose plus = relative();
    q_work.angles[ji] = q.angles[ji] - step;
    const RelativePose minus = relative();
    q_work.angles[ji] = q.angles[ji];
    column(ji, plus, minus);
  }
  for (int d : dofs.deformations) {
    for (int k = 0; k < 3; ++k) {
      Vec3 delta = Vec3::Zero();
      delta[k] = step;
      q_work.deformations[d] = so3::oplus(q.deformations[d], delta);
      const RelativePose plus = relative();
      q_work.deformations[d] = so3::oplus(q.deformations[d], -delta);
      const RelativePose minus = relative();
      q_work.deformations[d] = q.deformations[d];
      column(chain.n_joints() + 3 * d + k, plus, minus);
    }
  }
  return jac;
}

DeformationEstimate estimate_deformations(const KinematicChain& chain,
                                          const JointState& q_rigid,
                                          const std::map<int, Vec3>& tilts,
                                          int stance_foot) {
  if (!chain.is_instrumented(stance_foot)) {
    throw std::invalid_argument(
        "estimate_deformations: stance foot is not instrumented");
  }
  for (int link : chain.instrumented_links()) {
    if (!tilts.count(link)) {
      throw std::invalid_argument(
          "estimate_deformations: missing tilt for instrumented link " +
          chain.link_name(link));
    }
  }

  DeformationEstimate out;
  out.q = q_rigid;
  out.q.deformations.assign(chain.n_deformations(), Mat3::Identity());

  // Anchor: any orientation whose tilt equals the stance foot measurement.
  const Vec3 tilt0 = tilts.at(stance_foot).normalized();
  const Mat32 b0 = s2::tangent_basis(tilt0);
  Mat3 anchor;
  anchor.row(0) = b0.col(0).transpose();
  anchor.row(1) = tilt0.cross(b0.col(0)).transpose();
  anchor.row(2) = tilt0.transpose();

  // Undirected adjacency over the tree.
  std::vector<std::vector<int>> neighbors(chain.n_links());
  for (const auto& joint : chain.joints()) {
    neighbors[joint.parent].push_back(joint.child);
    neighbors[joint.child].push_back(joint.parent);
  }

  struct Crossing {
    int frame;
    bool toward_parent;  // walked child->parent: the rotation enters inverted
  };
  struct Visit {
    int link;
    int last_imu_link;
    Mat3 last_imu_anchor;
    std::vector<Crossing> pending;  // deformation frames crossed since last IMU
  };
  std::vector<bool> seen(chain.n_links(), false);
  std::deque<Visit> queue;
  queue.push_back({stance_foot, stance_foot, anchor, {}});
  seen[stance_foot] = true;

  while (!queue.empty()) {
    Visit v = queue.front();
    queue.pop_front();

    if (chain.is_instrumented(v.link) && v.link != v.last_imu_link) {
      const Mat3 rel = forward_kinematics(chain, out.q, v.last_imu_link, v.link)
                           .rotation;
      const Mat3 predicted = v.last_imu_anchor * rel;
      const Vec3 t_pred = predicted.transpose() * Vec3::UnitZ();
      const Vec3 t_meas = tilts.at(v.link).normalized();

      Mat3 correction = Mat3::Identity();
      const double cross_norm = t_pred.cross(t_meas).norm();
      const double dot = t_pred.dot(t_meas);
      if (1.0 + dot < s2::kAntipodalTol) {
        ++out.antipodal_skips;  // keep prior deformation values
        for (const Crossing& c : v.pending) {
          out.q.deformations[c.frame] = q_rigid.deformations[c.frame];
        }
      } else if (std::atan2(cross_norm, dot) > 1e-12) {
        correction = s2::rot_between(t_meas, t_pred);
        if (!v.pending.empty()) {
          const Crossing c = v.pending.front();
          const Mat3 r_def =
              deformation_frame_pose(chain, out.q, c.frame).rotation;
          const Mat3 r_link = frame_pose(chain, out.q, v.link).rotation;
          const Mat3 x = r_def.transpose() * r_link;
          const Mat3 delta =
              c.toward_parent ? correction.transpose() : correction;
          out.q.deformations[c.frame] = x * delta * x.transpose();
        }
      }
      v.last_imu_link = v.link;
      v.last_imu_anchor = predicted * correction;
      v.pending.clear();
    }

    for (int next : neighbors[v.link]) {
      if (seen[next]) continue;
      seen[next] = true;
      Visit w = v;
      w.link = next;
      const bool downward = chain.parent_link(next) == v.link;
      const int ji =
          downward ? chain.joint_of_link(next) : chain.joint_of_link(v.link);
      for (int d : chain.deformations_of_joint(ji)) {
        w.pending.push_back({d, !downward});
      }
      queue.push_back(w);
    }
  }
  return out;
}

}  // namespace mimu
