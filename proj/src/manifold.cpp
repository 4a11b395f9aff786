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

#include "mimu/manifold.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace mimu {
namespace so3 {

Mat3 hat(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return m;
}

Vec3 vee(const Mat3& m) {
  const double asym = (m + m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-9) {
    throw std::invalid_argument("vee: matrix is not skew-symmetric (defect " +
                                std::to_string(asym) + ")");
  }
  return Vec3(m(2, 1), m(0, 2), m(1, 0));
}

Mat3 exp(const Vec3& delta) {
  const double theta = delta.norm();
  double a, b;  // sin(t)/t and (1-cos(t))/t^2
  if (theta < kSmallAngle) {
    const double t2 = theta * theta;
    a = 1.0 - t2 / 6.0;
    b = 0.5 - t2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / (theta * theta);
  }
  const Mat3 s = hat(delta);
  return Mat3::Identity() + a * s + b * s * s;
}

Vec3 log(const Mat3& rotation) {
  const double cos_theta =
      std::clamp((rotation.trace() - 1.0) * 0.5, -1.0, 1.0);
  const double theta = std::acos(cos_theta);
  if (theta > M_PI - 1e-6) {
    throw std::domain_error("so3::log: rotation angle within 1e-6 of pi");
  }
  const Vec3 axis_raw(rotation(2, 1) - rotation(1, 2),
                      rotation(0, 2) - rotation(2, 0),
                      rotation(1, 0) - rotation(0, 1));
  if (theta < kSmallAngle) {
    // axis_raw = 2 sin(theta) * axis; the 1/2 factor is exact to O(theta^2).
    return 0.5 * axis_raw;
  }
  return (0.5 * theta / std::sin(theta)) * axis_raw;
}

double orthonormality_defect(const Mat3& m) {
  return (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
}

Mat3 project(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Mat3 flip = Mat3::Identity();
    flip(2, 2) = -1.0;
    r = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return r;
}

Mat3 oplus(const Mat3& rotation, const Vec3& delta) {
  Mat3 r = rotation * exp(delta);
  if (orthonormality_defect(r) > kOrthonormalityTol) {
    r = project(r);
  }
  return r;
}

Vec3 ominus(const Mat3& r1, const Mat3& r2) {
  return log(r2.transpose() * r1);
}

}  // namespace so3

namespace s2 {

Mat32 tangent_basis(const Vec3& u) {
  if (std::abs(u.norm() - 1.0) > 1e-6) {
    throw std::invalid_argument("tangent_basis: input is not unit norm");
  }
  int k = 0;
  for (int i = 1; i < 3; ++i) {
    if (std::abs(u[i]) < std::abs(u[k])) k = i;
  }
  const Vec3 seed = Vec3::Unit(k);
  const Vec3 b1 = (seed - seed.dot(u) * u).normalized();
  const Vec3 b2 = u.cross(b1);
  Mat32 basis;
  basis.col(0) = b1;
  basis.col(1) = b2;
  return basis;
}

Mat3 rot_between(const Vec3& u, const Vec3& v) {
  const double c = 1.0 + u.dot(v);
  if (c < kAntipodalTol) {
    throw std::domain_error(
        "rot_between: undefined rotation between antipodal directions");
  }
  const Mat3 s = so3::hat(u.cross(v));
  return Mat3::Identity() + s + (1.0 / c) * s * s;
}

Vec3 oplus(const Vec3& u, const Vec2& delta, const Mat32& basis) {
  return so3::exp(basis * delta) * u;
}

Vec3 oplus(const Vec3& u, const Vec2& delta) {
  return oplus(u, delta, tangent_basis(u));
}

Vec2 ominus(const Vec3& v, const Vec3& u, const Mat32& basis) {
  return basis.transpose() * so3::log(rot_between(u, v));
}

Vec2 ominus(const Vec3& v, const Vec3& u) {
  return ominus(v, u, tangent_basis(u));
}

}  // namespace s2
}  // namespace mimu
