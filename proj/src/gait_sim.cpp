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

#include "mimu/gait_sim.hpp"

#include <cmath>

#include "mimu/json_util.hpp"

namespace mimu {
namespace {

constexpr double kGravityZ = -9.81;
constexpr double kHeelPivotFraction = 0.2;  // of the stance window
constexpr double kToePivotFraction = 0.2;
constexpr double kCopInset = 0.005;         // m inside the sensor lines
constexpr double kShareFloor = 0.08;        // minimum load share in contact
constexpr double kFdStep = 1e-5;            // s, velocity finite differences

double smoothstep5(double s) {
  s = std::clamp(s, 0.0, 1.0);
  return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

// C2 bump with zero value/slope/curvature at both ends, peak 1 at s = 1/2.
double bump3(double s) {
  s = std::clamp(s, 0.0, 1.0);
  const double w = s * (1.0 - s);
  return 64.0 * w * w * w;
}

Mat3 rot_z(double a) { return so3::exp(Vec3(0, 0, a)); }
Mat3 rot_y(double a) { return so3::exp(Vec3(0, a, 0)); }
Mat3 rot_x(double a) { return so3::exp(Vec3(a, 0, 0)); }

struct LegIkInput {
  Mat3 pelvis_rotation;
  Vec3 pelvis_position;
  Vec3 hip_offset;
  Mat3 hip_deformation;
  Mat3 ankle_deformation;
  Mat3 foot_rotation;
  Vec3 foot_position;
  double thigh;
  double shank;
};

struct LegAngles {
  double hip_yaw, hip_roll, hip_pitch, knee, ankle_pitch, ankle_roll;
  double reach;  // hip-to-ankle distance, for feasibility checks
};

// Exact closed-form 6-DoF leg inverse kinematics for the canonical
// z-x-y-y-y-x joint layout. Known deformations fold into the hip base
// orientation (pre hip-yaw) and the rigid foot target (post ankle-roll).
LegAngles leg_ik(const LegIkInput& in) {
  const Mat3 hip_base = in.pelvis_rotation * in.hip_deformation;
  const Vec3 hip_point = in.pelvis_position + in.pelvis_rotation * in.hip_offset;
  const Mat3 foot_rigid = in.foot_rotation * in.ankle_deformation.transpose();

  const Vec3 r = foot_rigid.transpose() * (hip_point - in.foot_position);
  const double reach = r.norm();
  const double a = in.thigh, b = in.shank;
  const double cos_inner =
      std::clamp((a * a + b * b - reach * reach) / (2.0 * a * b), -1.0, 1.0);
  const double inner = std::acos(cos_inner);

  LegAngles q{};
  q.reach = reach;
  q.knee = M_PI - inner;
  q.ankle_roll = std::atan2(r.y(), r.z());
  const Vec3 rp = rot_x(q.ankle_roll) * r;
  const double mu = std::atan2(rp.x(), rp.z());
  const double nu =
      std::atan2(-a * std::sin(q.knee), b + a * std::cos(q.knee));
  q.ankle_pitch = nu - mu;

  const Mat3 m = hip_base.transpose() * foot_rigid * rot_x(-q.ankle_roll) *
                 rot_y(-q.ankle_pitch - q.knee);
  q.hip_roll = std::asin(std::clamp(m(2, 1), -1.0, 1.0));
  q.hip_yaw = std::atan2(-m(0, 1), m(1, 1));
  q.hip_pitch = std::atan2(-m(2, 0), m(2, 2));
  return q;
}

}  // namespace

GaitSpec GaitSpec::from_json(const nlohmann::json& j) {
  jsonu::require_keys_in(
      j,
      {"speed_mps", "step_length_m", "step_duration_s", "heel_toe_roll_rad",
       "duration_s", "sample_rate_hz", "path", "deformation_amplitude_rad",
       "stance_yaw_slip_rad", "sole_compliance_rad", "duty", "step_height_m", "sway_m", "bob_m",
       "stance_width_m", "pelvis_height_m", "total_weight_n"},
      "gait");
  GaitSpec s;
  s.speed = jsonu::get_number(j, "speed_mps", "gait");
  s.step_length = jsonu::get_number_or(j, "step_length_m", 0.0);
  s.step_duration = jsonu::get_number_or(j, "step_duration_s", s.step_duration);
  s.heel_toe_roll =
      jsonu::get_number_or(j, "heel_toe_roll_rad", s.heel_toe_roll);
  s.duration = jsonu::get_number(j, "duration_s", "gait");
  s.sample_rate = jsonu::get_number_or(j, "sample_rate_hz", s.sample_rate);
  if (j.contains("path")) {
    const auto& p = j.at("path");
    jsonu::require_keys_in(p, {"type", "radius_m"}, "gait.path");
    const std::string type = p.value("type", "straight");
    if (type == "straight") {
      s.path.type = PathSpec::Type::kStraight;
    } else if (type == "circular") {
      s.path.type = PathSpec::Type::kCircular;
      s.path.radius = jsonu::get_number(p, "radius_m", "gait.path");
    } else {
      throw InvalidInput("gait.path.type must be straight or circular");
    }
  }
  s.deformation_amplitude =
      jsonu::get_number_or(j, "deformation_amplitude_rad", 0.0);
  s.stance_yaw_slip =
      jsonu::get_number_or(j, "stance_yaw_slip_rad", s.stance_yaw_slip);
  s.sole_compliance =
      jsonu::get_number_or(j, "sole_compliance_rad", s.sole_compliance);
  s.duty = jsonu::get_number_or(j, "duty", s.duty);
  s.step_height = jsonu::get_number_or(j, "step_height_m", s.step_height);
  s.sway = jsonu::get_number_or(j, "sway_m", s.sway);
  s.bob = jsonu::get_number_or(j, "bob_m", s.bob);
  s.stance_width = jsonu::get_number_or(j, "stance_width_m", s.stance_width);
  s.pelvis_height = jsonu::get_number_or(j, "pelvis_height_m", 0.0);
  s.total_weight = jsonu::get_number_or(j, "total_weight_n", s.total_weight);
  return s;
}

nlohmann::json GaitSpec::to_json() const {
  nlohmann::json p;
  if (path.type == PathSpec::Type::kStraight) {
    p = {{"type", "straight"}};
  } else {
    p = {{"type", "circular"}, {"radius_m", path.radius}};
  }
  return {{"speed_mps", speed},
          {"stance_yaw_slip_rad", stance_yaw_slip},
          {"sole_compliance_rad", sole_compliance},
          {"step_length_m", step_length},
          {"step_duration_s", step_duration},
          {"heel_toe_roll_rad", heel_toe_roll},
          {"duration_s", duration},
          {"sample_rate_hz", sample_rate},
          {"path", p},
          {"deformation_amplitude_rad", deformation_amplitude},
          {"duty", duty},
          {"step_height_m", step_height},
          {"sway_m", sway},
          {"bob_m", bob},
          {"stance_width_m", stance_width},
          {"pelvis_height_m", pelvis_height},
          {"total_weight_n", total_weight}};
}

GaitGenerator::GaitGenerator(GaitSpec spec, KinematicChain chain)
    : spec_(spec), chain_(std::move(chain)) {
  if (spec_.duration <= 0 || spec_.sample_rate <= 0 || spec_.step_duration <= 0 ||
      spec_.speed < 0 || spec_.heel_toe_roll < 0) {
    throw InvalidInput("gait: durations, rates and amplitudes must be positive");
  }
  if (spec_.duty <= 0.5 || spec_.duty >= 0.9) {
    throw InvalidInput("gait: duty must lie in (0.5, 0.9)");
  }
  const double derived_step = spec_.speed * spec_.step_duration;
  if (spec_.step_length == 0.0) {
    spec_.step_length = derived_step;
  } else if (std::abs(spec_.step_length - derived_step) > 1e-9) {
    throw InvalidInput("gait: step_length_m conflicts with speed * step_duration");
  }
  if (chain_.feet().size() != 2) {
    throw InvalidInput("gait: the robot must describe both feet");
  }

  t_cycle_ = 2.0 * spec_.step_duration;
  t_stance_ = spec_.duty * t_cycle_;
  t_swing_ = t_cycle_ - t_stance_;

  // Identify the two legs by walking up six joints from each foot and
  // checking the canonical z-x-y-y-y-x revolute layout.
  int legs_found = 0;
  for (const auto& foot : chain_.feet()) {
    int link = foot.link;
    std::vector<int> joints;
    for (int k = 0; k < 6; ++k) {
      const int ji = chain_.joint_of_link(link);
      if (ji < 0) throw InvalidInput("gait: foot chain too short");
      joints.push_back(ji);
      link = chain_.joints()[ji].parent;
    }
    if (link != chain_.root_link()) {
      throw InvalidInput("gait: legs must hang from the root link");
    }
    const std::array<Vec3, 6> expected_axes = {
        Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitY(),
        Vec3::UnitY(), Vec3::UnitX(), Vec3::UnitZ()};
    for (int k = 0; k < 6; ++k) {
      if ((chain_.joints()[joints[k]].axis - expected_axes[k]).norm() > 1e-12) {
        throw InvalidInput("gait: leg joints must follow the z-x-y-y-y-x layout");
      }
    }
    const int hip_yaw = joints[5];
    const int side = chain_.joints()[hip_yaw].offset_translation.y() > 0 ? 0 : 1;
    hip_yaw_joint_[side] = hip_yaw;
    foot_link_[side] = foot.link;
    hip_offset_[side] = chain_.joints()[hip_yaw].offset_translation;
    shank_ = std::abs(chain_.joints()[joints[1]].offset_translation.z());
    thigh_ = std::abs(chain_.joints()[joints[2]].offset_translation.z());
    sole_height_ = -foot.force_sensors[0].z();
    cop_heel_ = foot.force_sensors[2].x() + kCopInset;
    cop_toe_ = foot.force_sensors[0].x() - kCopInset;
    ++legs_found;
  }
  if (legs_found != 2 || thigh_ <= 0 || shank_ <= 0 || sole_height_ <= 0) {
    throw InvalidInput("gait: could not extract the leg geometry");
  }
  if (spec_.pelvis_height == 0.0) {
    spec_.pelvis_height = sole_height_ + 0.94 * (thigh_ + shank_);
  }
  validate();
}

int GaitGenerator::ticks() const {
  return static_cast<int>(std::llround(spec_.duration * spec_.sample_rate)) + 1;
}

void GaitGenerator::path_point(double s, Eigen::Vector2d& xy,
                               double& heading) const {
  if (spec_.path.type == PathSpec::Type::kStraight) {
    xy = {s, 0.0};
    heading = 0.0;
  } else {
    const double rho = spec_.path.radius;
    const double lambda = s / rho;
    xy = {rho * std::sin(lambda), rho * (1.0 - std::cos(lambda))};
    heading = lambda;
  }
}

Pose GaitGenerator::pelvis_pose(double t) const {
  Pose pose;
  Eigen::Vector2d xy;
  double heading;
  if (spec_.speed == 0.0) {
    path_point(0.0, xy, heading);
    pose.rotation = rot_z(heading);
    pose.position = Vec3(xy.x(), xy.y(), spec_.pelvis_height);
    return pose;
  }
  path_point(spec_.speed * t, xy, heading);
  pose.rotation = rot_z(heading);
  const Vec3 lateral(-std::sin(heading), std::cos(heading), 0.0);
  const double sway = spec_.sway * std::sin(2.0 * M_PI * t / t_cycle_ - 0.6);
  const double bob = spec_.bob * std::sin(4.0 * M_PI * t / t_cycle_);
  pose.position = Vec3(xy.x(), xy.y(), spec_.pelvis_height + bob) +
                  sway * lateral;
  return pose;
}

GaitGenerator::FootPose GaitGenerator::foot_pose(int leg, double t) const {
  const double side = (leg == 0) ? 1.0 : -1.0;
  const double lead = spec_.speed * t_stance_ / 2.0;
  const double alpha = spec_.heel_toe_roll;
  const double t_ds = t_stance_ - spec_.step_duration;  // double support
  const double sole = sole_height_;

  auto station = [&](double strike_time, Eigen::Vector2d& xy, double& psi) {
    Eigen::Vector2d path_xy;
    path_point(spec_.speed * strike_time + lead, path_xy, psi);
    const Eigen::Vector2d lateral(-std::sin(psi), std::cos(psi));
    xy = path_xy + side * (spec_.stance_width / 2.0) * lateral;
  };
  auto pivot_pose = [&](const Eigen::Vector2d& xy, double psi, double pitch,
                        double pivot_x) {
    const Mat3 r = rot_z(psi) * rot_y(pitch);
    const Vec3 pivot_world =
        Vec3(xy.x(), xy.y(), 0.0) + rot_z(psi) * Vec3(pivot_x, 0, 0);
    const Vec3 pivot_local(pivot_x, 0.0, -sole);
    return std::pair<Mat3, Vec3>(r, pivot_world - r * pivot_local);
  };

  FootPose out;
  if (spec_.speed == 0.0) {
    Eigen::Vector2d xy;
    double psi;
    station(0.0, xy, psi);
    const auto [r, p] = pivot_pose(xy, psi, 0.0, 0.0);
    out.rotation = r;
    out.position = p;
    out.contact = true;
    out.cop_x = 0.5 * (cop_heel_ + cop_toe_);
    out.share = 0.5;
    out.pitch = 0.0;
    return out;
  }

  const double phase = (leg == 0) ? 0.0 : spec_.step_duration;
  const double tt = t - phase;
  const double n = std::floor(tt / t_cycle_);
  const double tau = tt - n * t_cycle_;
  const double strike = phase + n * t_cycle_;

  Eigen::Vector2d xy;
  double psi;
  station(strike, xy, psi);

  if (tau < t_stance_) {
    out.contact = true;
    // Torsional slip: a C2 twist about the support pivot that dies out by
    // stance end, with a per-step pseudo-random magnitude.
    const double slip_mix = std::sin(2.4 * n + 1.7 * leg + 0.9);
    psi += spec_.stance_yaw_slip * slip_mix * bump3(tau / t_stance_);
    const double heel_end = kHeelPivotFraction * t_stance_;
    const double toe_start = (1.0 - kToePivotFraction) * t_stance_;
    double pitch, pivot_x;
    if (tau < heel_end) {
      pitch = -alpha * (1.0 - smoothstep5(tau / heel_end));
      pivot_x = cop_heel_;
      out.cop_x = cop_heel_;
    } else if (tau < toe_start) {
      pitch = 0.0;
      pivot_x = 0.0;
      out.cop_x = cop_heel_ + (cop_toe_ - cop_heel_) * (tau - heel_end) /
                                  (toe_start - heel_end);
    } else {
      pitch = alpha * smoothstep5((tau - toe_start) / (t_stance_ - toe_start));
      pivot_x = cop_toe_;
      out.cop_x = cop_toe_;
    }
    const auto [r, p] = pivot_pose(xy, psi, pitch, pivot_x);
    out.rotation = r;
    out.position = p;
    out.pitch = pitch;
    if (tau < t_ds) {
      out.share = std::max(kShareFloor, smoothstep5(tau / t_ds));
    } else if (tau > spec_.step_duration) {
      out.share = std::max(
          kShareFloor,
          1.0 - smoothstep5((tau - spec_.step_duration) / t_ds));
    } else {
      out.share = 1.0;
    }
    return out;
  }

  // Swing: from the toe-off pose at this station to the heel-strike pose at
  // the next one, with a C2 vertical clearance bump.
  out.contact = false;
  out.share = 0.0;
  out.cop_x = 0.0;
  out.pitch = 0.0;
  Eigen::Vector2d xy2;
  double psi2;
  station(strike + t_cycle_, xy2, psi2);
  const auto [r1, p1] = pivot_pose(xy, psi, alpha, cop_toe_);
  const auto [r2, p2] = pivot_pose(xy2, psi2, -alpha, cop_heel_);
  (void)r1;
  (void)r2;
  const double sigma = (tau - t_stance_) / t_swing_;
  const double blend = smoothstep5(sigma);
  const double pitch = alpha + blend * (-2.0 * alpha);
  const double yaw = psi + blend * (psi2 - psi);
  out.rotation = rot_z(yaw) * rot_y(pitch);
  out.position = p1 + blend * (p2 - p1) +
                 Vec3(0, 0, spec_.step_height * bump3(sigma));
  return out;
}

std::vector<Mat3> GaitGenerator::true_deformations(double t) const {
  std::vector<Mat3> defs(chain_.n_deformations(), Mat3::Identity());
  const double amp = spec_.deformation_amplitude;
  if (amp == 0.0) return defs;
  // The structure flexes mostly under load (consistent sign every stance),
  // with a smaller slow oscillation on top.
  const double load[2] = {foot_pose(0, t).share, foot_pose(1, t).share};
  for (int d = 0; d < chain_.n_deformations(); ++d) {
    const int joint = chain_.deformation_frames()[d].joint;
    double angle;
    Vec3 axis;
    if (joint == hip_yaw_joint_[0]) {
      axis = Vec3::UnitY();
      angle = amp * (0.75 * load[0] + 0.25 * std::sin(2.0 * M_PI * t / 2.7));
    } else if (joint == hip_yaw_joint_[1]) {
      axis = Vec3::UnitX();
      angle = amp * (0.75 * load[1] +
                     0.25 * std::sin(2.0 * M_PI * t / 2.7 + 1.3));
    } else if (chain_.joints()[joint].child == foot_link_[0]) {
      axis = Vec3::UnitY();
      angle = amp * (0.75 * load[0] +
                     0.25 * std::sin(2.0 * M_PI * t / 1.9 + 2.1));
    } else if (chain_.joints()[joint].child == foot_link_[1]) {
      axis = Vec3::UnitY();
      angle = amp * (0.75 * load[1] +
                     0.25 * std::sin(2.0 * M_PI * t / 1.9 + 0.7));
    } else {
      continue;  // frames outside the hips/ankles stay rigid
    }
    defs[d] = so3::exp(angle * axis);
  }
  return defs;
}

GaitGenerator::Kinematics GaitGenerator::solve_kinematics(double t) const {
  const Pose pelvis = pelvis_pose(t);
  Kinematics kin;
  kin.angles = VecX::Zero(chain_.n_joints());
  kin.deformations = true_deformations(t);

  for (int leg = 0; leg < 2; ++leg) {
    const FootPose foot = foot_pose(leg, t);
    LegIkInput in;
    in.pelvis_rotation = pelvis.rotation;
    in.pelvis_position = pelvis.position;
    in.hip_offset = hip_offset_[leg];
    in.thigh = thigh_;
    in.shank = shank_;
    in.foot_rotation = foot.rotation;
    in.foot_position = foot.position;
    in.hip_deformation = Mat3::Identity();
    in.ankle_deformation = Mat3::Identity();
    for (int d = 0; d < chain_.n_deformations(); ++d) {
      const auto& frame = chain_.deformation_frames()[d];
      if (frame.joint == hip_yaw_joint_[leg]) {
        in.hip_deformation = kin.deformations[d];
      } else if (chain_.joints()[frame.joint].child == foot_link_[leg]) {
        in.ankle_deformation = kin.deformations[d];
      }
    }
    const LegAngles q = leg_ik(in);

    int link = foot_link_[leg];
    const double values[6] = {q.ankle_roll, q.ankle_pitch, q.knee,
                              q.hip_pitch, q.hip_roll, q.hip_yaw};
    for (int k = 0; k < 6; ++k) {
      const int ji = chain_.joint_of_link(link);
      kin.angles[ji] = values[k];
      link = chain_.joints()[ji].parent;
    }
  }
  return kin;
}

TruthSample GaitGenerator::at(double t) const {
  auto world_frames = [&](double time) {
    const Kinematics kin = solve_kinematics(time);
    JointState q;
    q.angles = kin.angles;
    q.deformations = kin.deformations;
    const std::vector<Pose> poses = link_poses(chain_, q);
    const Pose pelvis = pelvis_pose(time);
    std::vector<Pose> frames;
    for (const auto& imu : chain_.imus()) {
      Pose local = frame_pose(chain_, poses, imu.link);
      Pose world;
      world.rotation = pelvis.rotation * local.rotation;
      world.position = pelvis.position + pelvis.rotation * local.position;
      frames.push_back(world);
    }
    return std::pair<std::vector<Pose>, Kinematics>(frames, kin);
  };

  const auto [frames0, kin0] = world_frames(t);
  const auto [frames_p, kin_p] = world_frames(t + kFdStep);
  const auto [frames_m, kin_m] = world_frames(t - kFdStep);
  (void)kin_p;
  (void)kin_m;

  TruthSample s;
  s.t = t;
  s.joint_angles = kin0.angles;
  s.deformations = kin0.deformations;
  for (size_t k = 0; k < frames0.size(); ++k) {
    LinkTruth link;
    link.rotation = frames0[k].rotation;
    link.position = frames0[k].position;
    link.velocity =
        (frames_p[k].position - frames_m[k].position) / (2.0 * kFdStep);
    link.angular_velocity =
        (so3::log(frames0[k].rotation.transpose() * frames_p[k].rotation) -
         so3::log(frames0[k].rotation.transpose() * frames_m[k].rotation)) /
        (2.0 * kFdStep);
    link.acceleration = (frames_p[k].position - 2.0 * frames0[k].position +
                         frames_m[k].position) /
                        (kFdStep * kFdStep);
    s.links.push_back(link);
  }

  for (size_t f = 0; f < chain_.feet().size(); ++f) {
    const int leg = (chain_.feet()[f].link == foot_link_[0]) ? 0 : 1;
    const FootPose foot = foot_pose(leg, t);
    s.contact.push_back(foot.contact);
    const auto& sensors = chain_.feet()[f].force_sensors;
    FootForces forces;
    Vec3 cop = Vec3::Zero();
    if (foot.contact) {
      const double x_front = sensors[0].x();
      const double x_back = sensors[2].x();
      double u = (foot.cop_x - x_back) / (x_front - x_back);
      if (spec_.sole_compliance > 0.0) {
        // Compliant rubber spreads load toward the unloaded pair while the
        // rigid sole still pivots on its edge.
        const double settle =
            std::max(0.0, 1.0 - std::abs(foot.pitch) / spec_.sole_compliance);
        u += 0.4 * settle * (0.5 - u);
      }
      const double w = foot.share * spec_.total_weight;
      forces.newtons = {w * u / 2.0, w * u / 2.0, w * (1.0 - u) / 2.0,
                        w * (1.0 - u) / 2.0};
      cop = Vec3(foot.cop_x, 0.0, sensors[0].z());
    }
    s.forces.push_back(forces);
    s.cop.push_back(cop);
  }

  if (spec_.speed > 0.0) {
    int steps = 0;
    steps += std::max(0, static_cast<int>(std::floor(t / t_cycle_ + 1e-12)));
    if (t >= spec_.step_duration - 1e-12) {
      steps += static_cast<int>(
                   std::floor((t - spec_.step_duration) / t_cycle_ + 1e-12)) +
               1;
    }
    s.steps = steps;
  }
  return s;
}

int GaitGenerator::total_steps() const { return at(spec_.duration).steps; }

void GaitGenerator::validate() const {
  const double reach_limit = 0.995 * (thigh_ + shank_);
  const double scan_dt = 0.005;
  const double scan_end = std::min(spec_.duration, 4.0 * t_cycle_ + 1.0);
  for (double t = 0.0; t <= scan_end; t += scan_dt) {
    const Pose pelvis = pelvis_pose(t);
    for (int leg = 0; leg < 2; ++leg) {
      const FootPose foot = foot_pose(leg, t);
      LegIkInput in;
      in.pelvis_rotation = pelvis.rotation;
      in.pelvis_position = pelvis.position;
      in.hip_offset = hip_offset_[leg];
      in.thigh = thigh_;
      in.shank = shank_;
      in.foot_rotation = foot.rotation;
      in.foot_position = foot.position;
      in.hip_deformation = Mat3::Identity();
      in.ankle_deformation = Mat3::Identity();
      const LegAngles q = leg_ik(in);
      if (q.reach > reach_limit) {
        throw InvalidInput(
            "gait infeasible: step length exceeds the leg reach (reach " +
            std::to_string(q.reach) + " m of " + std::to_string(reach_limit) +
            " m)");
      }
      if (std::abs(q.hip_roll) > 1.3) {
        throw InvalidInput("gait infeasible: hip roll out of range");
      }
    }
  }
}

SensorSynthesizer::SensorSynthesizer(const GaitGenerator& gait,
                                     NoiseConfig noise, uint64_t seed)
    : gait_(gait), noise_(std::move(noise)), rng_(seed) {
  for (size_t k = 0; k < gait_.chain().imus().size(); ++k) {
    gyro_bias_.push_back(draw3(noise_.initial_gyro_bias_std));
    accel_bias_.push_back(draw3(noise_.initial_accel_bias_std));
  }
}

Vec3 SensorSynthesizer::draw3(double std) {
  // Always consume three draws so the stream layout is noise-independent.
  const Vec3 raw(gauss_(rng_), gauss_(rng_), gauss_(rng_));
  return std * raw;
}

SensorFrame SensorSynthesizer::frame(int k) {
  if (k != next_k_) {
    throw std::logic_error("SensorSynthesizer::frame must be called in order");
  }
  ++next_k_;
  const double dt = gait_.dt();
  const double t = k * dt;
  if (!prev_) prev_ = gait_.at(t - dt);
  const TruthSample cur = gait_.at(t);
  const TruthSample& prev = *prev_;
  const Vec3 gravity(0.0, 0.0, kGravityZ);
  const auto& imus = gait_.chain().imus();

  SensorFrame f;
  f.t = t;
  const double sqrt_dt = std::sqrt(dt);
  for (size_t i = 0; i < imus.size(); ++i) {
    const ImuNoise& n = noise_.for_imu(imus[i].name);
    ImuSample s;
    s.gyro = so3::log(prev.links[i].rotation.transpose() *
                      cur.links[i].rotation) /
                 dt +
             gyro_bias_[i] + draw3(n.gyro_density / sqrt_dt);
    s.accel = prev.links[i].rotation.transpose() *
                  ((cur.links[i].velocity - prev.links[i].velocity) / dt -
                   gravity) +
              accel_bias_[i] + draw3(n.accel_density / sqrt_dt);
    f.imu.push_back(s);
    gyro_bias_[i] += draw3(n.gyro_walk * sqrt_dt);
    accel_bias_[i] += draw3(n.accel_walk * sqrt_dt);
  }

  for (size_t i = 0; i < imus.size(); ++i) {
    const Vec3 tilt = cur.links[i].rotation.transpose() * Vec3::UnitZ();
    const Vec2 nu(noise_.tilt_std * gauss_(rng_), noise_.tilt_std * gauss_(rng_));
    f.tilt.push_back(s2::oplus(tilt, nu));
  }

  f.joint_angles = cur.joint_angles;
  for (Eigen::Index j = 0; j < f.joint_angles.size(); ++j) {
    f.joint_angles[j] += noise_.encoder_std * gauss_(rng_);
  }

  for (const auto& forces : cur.forces) {
    std::array<double, 4> raw{};
    for (int i = 0; i < 4; ++i) {
      raw[i] = forces.newtons[i] + noise_.force_std * gauss_(rng_);
    }
    f.forces.push_back(FootForces::clamped(raw));
  }

  prev_ = cur;
  return f;
}

std::vector<SensorFrame> synthesize_sensors(const GaitGenerator& gait,
                                            const NoiseConfig& noise,
                                            uint64_t seed) {
  SensorSynthesizer synth(gait, noise, seed);
  std::vector<SensorFrame> frames;
  frames.reserve(gait.ticks());
  for (int k = 0; k < gait.ticks(); ++k) frames.push_back(synth.frame(k));
  return frames;
}

std::vector<TruthSample> generate_gait(const GaitGenerator& gait) {
  std::vector<TruthSample> out;
  out.reserve(gait.ticks());
  for (int k = 0; k < gait.ticks(); ++k) out.push_back(gait.at(k * gait.dt()));
  return out;
}

}  // namespace mimu
