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

#include "mimu/sensors.hpp"

#include "mimu/json_util.hpp"

namespace mimu {

const ImuNoise& NoiseConfig::for_imu(const std::string& name) const {
  const auto it = imu_overrides.find(name);
  return it == imu_overrides.end() ? imu : it->second;
}

NoiseConfig NoiseConfig::zero() {
  NoiseConfig n;
  n.imu = ImuNoise{0.0, 0.0, 0.0, 0.0};
  n.tilt_std = 0.0;
  n.encoder_std = 0.0;
  n.deformation_std = 0.0;
  n.slippage_std = 0.0;
  n.force_std = 0.0;
  return n;
}

namespace {

ImuNoise imu_noise_from_json(const nlohmann::json& j, const ImuNoise& base,
                             const std::string& context) {
  jsonu::require_keys_in(j,
                         {"gyro_noise_density", "accel_noise_density",
                          "gyro_bias_walk", "accel_bias_walk"},
                         context);
  ImuNoise n = base;
  n.gyro_density = jsonu::get_number_or(j, "gyro_noise_density", n.gyro_density);
  n.accel_density =
      jsonu::get_number_or(j, "accel_noise_density", n.accel_density);
  n.gyro_walk = jsonu::get_number_or(j, "gyro_bias_walk", n.gyro_walk);
  n.accel_walk = jsonu::get_number_or(j, "accel_bias_walk", n.accel_walk);
  return n;
}

}  // namespace

NoiseConfig NoiseConfig::from_json(const nlohmann::json& j,
                                   const std::string& context) {
  jsonu::require_keys_in(
      j,
      {"gyro_noise_density", "accel_noise_density", "gyro_bias_walk",
       "accel_bias_walk", "tilt_noise_std", "encoder_noise_std",
       "deformation_noise_std", "slippage_noise_std", "force_noise_std",
       "initial_gyro_bias_std", "initial_accel_bias_std", "per_imu"},
      context);
  NoiseConfig n;
  n.imu.gyro_density =
      jsonu::get_number_or(j, "gyro_noise_density", n.imu.gyro_density);
  n.imu.accel_density =
      jsonu::get_number_or(j, "accel_noise_density", n.imu.accel_density);
  n.imu.gyro_walk = jsonu::get_number_or(j, "gyro_bias_walk", n.imu.gyro_walk);
  n.imu.accel_walk =
      jsonu::get_number_or(j, "accel_bias_walk", n.imu.accel_walk);
  n.tilt_std = jsonu::get_number_or(j, "tilt_noise_std", n.tilt_std);
  n.encoder_std = jsonu::get_number_or(j, "encoder_noise_std", n.encoder_std);
  n.deformation_std =
      jsonu::get_number_or(j, "deformation_noise_std", n.deformation_std);
  n.slippage_std =
      jsonu::get_number_or(j, "slippage_noise_std", n.slippage_std);
  n.force_std = jsonu::get_number_or(j, "force_noise_std", n.force_std);
  n.initial_gyro_bias_std =
      jsonu::get_number_or(j, "initial_gyro_bias_std", n.initial_gyro_bias_std);
  n.initial_accel_bias_std = jsonu::get_number_or(j, "initial_accel_bias_std",
                                                  n.initial_accel_bias_std);
  if (j.contains("per_imu")) {
    for (const auto& item : j.at("per_imu").items()) {
      n.imu_overrides[item.key()] =
          imu_noise_from_json(item.value(), n.imu, context + ".per_imu");
    }
  }
  return n;
}

nlohmann::json NoiseConfig::to_json() const {
  nlohmann::json j{{"gyro_noise_density", imu.gyro_density},
                   {"accel_noise_density", imu.accel_density},
                   {"gyro_bias_walk", imu.gyro_walk},
                   {"accel_bias_walk", imu.accel_walk},
                   {"tilt_noise_std", tilt_std},
                   {"encoder_noise_std", encoder_std},
                   {"deformation_noise_std", deformation_std},
                   {"slippage_noise_std", slippage_std},
                   {"force_noise_std", force_std},
                   {"initial_gyro_bias_std", initial_gyro_bias_std},
                   {"initial_accel_bias_std", initial_accel_bias_std}};
  if (!imu_overrides.empty()) {
    nlohmann::json per;
    for (const auto& [name, n] : imu_overrides) {
      per[name] = {{"gyro_noise_density", n.gyro_density},
                   {"accel_noise_density", n.accel_density},
                   {"gyro_bias_walk", n.gyro_walk},
                   {"accel_bias_walk", n.accel_walk}};
    }
    j["per_imu"] = per;
  }
  return j;
}

}  // namespace mimu
