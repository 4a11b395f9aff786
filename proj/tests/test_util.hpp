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

#ifndef MIMU_TESTS_TEST_UTIL_HPP
#define MIMU_TESTS_TEST_UTIL_HPP

#include <random>

#include "mimu/manifold.hpp"

namespace mimu::testutil {

inline Vec3 random_vec3(std::mt19937& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  return Vec3(n(rng), n(rng), n(rng));
}

inline Vec3 random_unit(std::mt19937& rng) {
  Vec3 v = random_vec3(rng);
  while (v.norm() < 1e-6) v = random_vec3(rng);
  return v.normalized();
}

inline Mat3 random_rotation(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 3.0);
  return so3::exp(u(rng) * random_unit(rng));
}

inline VecX random_vecx(std::mt19937& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  VecX v(n);
  for (int i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

inline MatX random_matx(std::mt19937& rng, int rows, int cols,
                        double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  MatX m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = d(rng);
  return m;
}

inline MatX random_psd(std::mt19937& rng, int n, double scale = 1.0) {
  const MatX a = random_matx(rng, n, n, scale);
  return a * a.transpose() + 1e-9 * MatX::Identity(n, n);
}

}  // namespace mimu::testutil

#endif  // MIMU_TESTS_TEST_UTIL_HPP
