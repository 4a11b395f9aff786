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

#include "mimu/estimator.hpp"
#include "mimu/gait_sim.hpp"
#include "mimu/json_util.hpp"

using namespace mimu;

namespace {

KinematicChain biped() {
  static KinematicChain chain = KinematicChain::from_json_file(
      std::string(MIMU_SOURCE_DIR) + "/configs/biped.json");
  return chain;
}

GaitSpec straight_spec(double speed = 0.15, double duration = 20.0) {
  GaitSpec spec;
  spec.speed = speed;
  spec.duration = duration;
  return spec;
}

}  // namespace

TEST_SUITE_BEGIN("gait_sim");

TEST_CASE("zero speed: permanent double contact at rest") {
  GaitSpec spec = straight_spec(0.0, 2.0);
  const GaitGenerator gait(spec, biped());
  for (double t : {0.0, 0.5, 1.7}) {
    const TruthSample s = gait.at(t);
    CHECK(s.contact[0]);
    CHECK(s.contact[1]);
    CHECK(s.steps == 0);
    for (const auto& link : s.links) {
      CHECK(link.velocity.norm() < 1e-9);
      CHECK(link.angular_velocity.norm() < 1e-9);
    }
  }
}

TEST_CASE("straight walk covers speed times duration") {
  const GaitGenerator gait(straight_spec(), biped());
  const TruthSample start = gait.at(0.0);
  const TruthSample end = gait.at(20.0);
  const double displacement =
      (end.links[0].position - start.links[0].position).norm();
  CHECK(std::abs(displacement - 3.0) < 0.05);
  CHECK(gait.total_steps() == doctest::Approx(25).epsilon(0.11));
}

TEST_CASE("circular path heading winds by 2 pi per loop") {
  GaitSpec spec = straight_spec(0.4, 21.0);
  spec.step_duration = 0.6;
  spec.path.type = PathSpec::Type::kCircular;
  spec.path.radius = 1.22;
  const GaitGenerator gait(spec, biped());

  const double t_loop = 2.0 * M_PI * spec.path.radius / spec.speed;
  REQUIRE(t_loop < spec.duration);
  double wound = 0.0;
  const double dt = 0.01;
  Mat3 prev = gait.at(0.0).links[0].rotation;
  for (double t = dt; t <= t_loop + 1e-9; t += dt) {
    const Mat3 cur = gait.at(t).links[0].rotation;
    wound += so3::log(prev.transpose() * cur).z();
    prev = cur;
  }
  // The pelvis sways about the path heading; compare against the heading
  // wound at the matching phase of the final cycle.
  CHECK(std::abs(wound - 2.0 * M_PI) < 0.05);
}

TEST_CASE("ground truth is kinematically consistent to 1e-9") {
  GaitSpec spec = straight_spec();
  spec.deformation_amplitude = 0.02;
  const GaitGenerator gait(spec, biped());
  const KinematicChain chain = biped();
  const auto links = chain.instrumented_links();

  for (double t = 0.0; t < 4.0; t += 0.097) {
    const TruthSample s = gait.at(t);
    JointState q;
    q.angles = s.joint_angles;
    q.deformations = s.deformations;
    for (size_t a = 0; a < links.size(); ++a) {
      for (size_t b = a + 1; b < links.size(); ++b) {
        const RelativePose rel = forward_kinematics(chain, q, links[a], links[b]);
        const Mat3 rel_rot =
            s.links[a].rotation.transpose() * s.links[b].rotation;
        const Vec3 rel_pos = s.links[a].rotation.transpose() *
                             (s.links[b].position - s.links[a].position);
        CHECK((rel.rotation - rel_rot).norm() < 1e-9);
        CHECK((rel.translation - rel_pos).norm() < 1e-9);
      }
    }
  }
}

TEST_CASE("finite differences of pose match stored velocities") {
  const GaitGenerator gait(straight_spec(), biped());
  const double dt = gait.dt();
  for (double t = 0.05; t < 3.0; t += 0.251) {
    const TruthSample a = gait.at(t - dt);
    const TruthSample b = gait.at(t + dt);
    const TruthSample mid = gait.at(t);
    for (size_t k = 0; k < mid.links.size(); ++k) {
      const Vec3 fd = (b.links[k].position - a.links[k].position) / (2.0 * dt);
      CHECK((fd - mid.links[k].velocity).norm() < 10.0 * dt);
    }
  }
}

TEST_CASE("stationary sensors read gravity and zero rate") {
  const GaitGenerator gait(straight_spec(0.0, 1.0), biped());
  auto frames = synthesize_sensors(gait, NoiseConfig::zero(), 7);
  for (int k : {0, 100, 900}) {
    const TruthSample truth = gait.at(k * gait.dt());
    for (size_t i = 0; i < frames[k].imu.size(); ++i) {
      CHECK(frames[k].imu[i].gyro.norm() < 1e-9);
      const Vec3 expected =
          truth.links[i].rotation.transpose() * Vec3(0, 0, 9.81);
      CHECK((frames[k].imu[i].accel - expected).norm() < 1e-6);
    }
  }
}

TEST_CASE("same seed gives bit-identical logs") {
  const GaitGenerator gait(straight_spec(0.15, 1.0), biped());
  NoiseConfig noise;  // MEMS defaults
  noise.initial_gyro_bias_std = 0.002;
  const auto a = synthesize_sensors(gait, noise, 42);
  const auto b = synthesize_sensors(gait, noise, 42);
  REQUIRE(a.size() == b.size());
  for (size_t k = 0; k < a.size(); ++k) {
    for (size_t i = 0; i < a[k].imu.size(); ++i) {
      CHECK((a[k].imu[i].gyro - b[k].imu[i].gyro).norm() == 0.0);
      CHECK((a[k].imu[i].accel - b[k].imu[i].accel).norm() == 0.0);
      CHECK((a[k].tilt[i] - b[k].tilt[i]).norm() == 0.0);
    }
    CHECK((a[k].joint_angles - b[k].joint_angles).norm() == 0.0);
  }
  const auto c = synthesize_sensors(gait, noise, 43);
  CHECK((a[5].imu[0].gyro - c[5].imu[0].gyro).norm() > 0.0);
}

TEST_CASE("noiseless strapdown reproduces truth within 1e-4 m over 10 s") {
  const GaitGenerator gait(straight_spec(0.15, 10.0), biped());
  SensorSynthesizer synth(gait, NoiseConfig::zero(), 3);
  const Vec3 gravity(0, 0, -9.81);

  const TruthSample t0 = gait.at(0.0);
  std::vector<LinkState> states;
  for (const auto& link : t0.links) {
    LinkState x;
    x.rotation = link.rotation;
    x.position = link.position;
    x.velocity = link.velocity;
    states.push_back(x);
  }
  synth.frame(0);
  for (int k = 1; k < gait.ticks(); ++k) {
    const SensorFrame f = synth.frame(k);
    for (size_t i = 0; i < states.size(); ++i) {
      states[i] = predict_floating(states[i], f.imu[i], gait.dt(), gravity).state;
    }
  }
  const TruthSample end = gait.at(10.0);
  for (size_t i = 0; i < states.size(); ++i) {
    CHECK((states[i].position - end.links[i].position).norm() < 1e-4);
    CHECK(so3::ominus(states[i].rotation, end.links[i].rotation).norm() < 1e-6);
    CHECK((states[i].velocity - end.links[i].velocity).norm() < 1e-5);
  }
}

TEST_CASE("any-sensor detection recovers the true contact schedule exactly") {
  const GaitGenerator gait(straight_spec(0.15, 5.0), biped());
  const auto frames = synthesize_sensors(gait, NoiseConfig::zero(), 5);
  for (int k = 0; k < gait.ticks(); ++k) {
    const TruthSample truth = gait.at(k * gait.dt());
    for (int f = 0; f < 2; ++f) {
      CHECK(detect_contact(frames[k].forces[f], ContactMode::kAnySensor, 20.0) ==
            truth.contact[f]);
    }
  }
}

TEST_CASE("heel-toe gait: flat-only intervals are strict subsets") {
  const GaitGenerator gait(straight_spec(0.15, 5.0), biped());
  const auto frames = synthesize_sensors(gait, NoiseConfig::zero(), 5);
  int any_only_ticks = 0;
  for (const auto& frame : frames) {
    for (int f = 0; f < 2; ++f) {
      const bool any = detect_contact(frame.forces[f], ContactMode::kAnySensor, 20.0);
      const bool flat = detect_contact(frame.forces[f], ContactMode::kFlatOnly, 20.0);
      if (flat) CHECK(any);
      if (any && !flat) ++any_only_ticks;
    }
  }
  CHECK(any_only_ticks > 500);  // the pivot phases are exploitable
}

TEST_CASE("infeasible steps are rejected") {
  GaitSpec spec = straight_spec(1.2, 2.0);  // 0.96 m steps: beyond reach
  CHECK_THROWS_AS(GaitGenerator(spec, biped()), InvalidInput);

  GaitSpec conflict = straight_spec();
  conflict.step_length = 0.5;  // speed * step_duration = 0.12
  CHECK_THROWS_AS(GaitGenerator(conflict, biped()), InvalidInput);
}

TEST_CASE("zero-noise filter run: innovations stay near zero") {
  const GaitGenerator gait(straight_spec(0.15, 2.0), biped());
  SensorSynthesizer synth(gait, NoiseConfig::zero(), 11);

  const TruthSample t0 = gait.at(0.0);
  std::vector<LinkState> init;
  for (const auto& link : t0.links) {
    LinkState x;
    x.rotation = link.rotation;
    x.position = link.position;
    x.velocity = link.velocity;
    init.push_back(x);
  }
  FilterConfig config;
  MultiImuEkf filter(biped(), config);
  const SensorFrame f0 = synth.frame(0);
  filter.initialize_at(0.0, init, &f0);
  double worst = 0.0;
  for (int k = 1; k < gait.ticks(); ++k) {
    const StepInfo info = filter.step(synth.frame(k));
    if (info.relpose_applied) {
      worst = std::max(worst, info.relpose.innovation_before);
    }
  }
  CHECK(worst < 1e-4);

  const TruthSample end = gait.at(2.0);
  for (size_t i = 0; i < init.size(); ++i) {
    CHECK((filter.belief().links[i].position - end.links[i].position).norm() <
          1e-3);
  }
}

TEST_SUITE_END();
