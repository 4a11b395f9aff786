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

#ifndef MIMU_MANIFOLD_HPP
#define MIMU_MANIFOLD_HPP

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace mimu {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat32 = Eigen::Matrix<double, 3, 2>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Perturbation calculus on SO(3): rotations stored as 3x3 orthonormal
/// matrices, tangent vectors in radians.
namespace so3 {

/// Angle below which exp/log coefficients switch to their Taylor series.
inline constexpr double kSmallAngle = 1e-6;
/// Orthonormality defect above which results are re-projected onto SO(3).
inline constexpr double kOrthonormalityTol = 1e-9;

/// Skew-symmetric matrix of v, so that hat(v) * w == v.cross(w).
Mat3 hat(const Vec3& v);

/// Inverse of hat. Throws std::invalid_argument if m is not
/// skew-symmetric within 1e-9.
Vec3 vee(const Mat3& m);

/// Rodrigues exponential map.
Mat3 exp(const Vec3& delta);

/// Principal logarithm. Throws std::domain_error for rotation angles
/// within 1e-6 of pi (outside the principal branch).
Vec3 log(const Mat3& rotation);

/// R * Exp(delta), re-orthonormalized when the defect exceeds 1e-9.
Mat3 oplus(const Mat3& rotation, const Vec3& delta);

/// Log(r2^T * r1), the tangent vector taking r2 to r1.
Vec3 ominus(const Mat3& r1, const Mat3& r2);

/// Nearest rotation matrix in the Frobenius sense (polar projection).
Mat3 project(const Mat3& m);

/// max|R^T R - I|, used to decide when to re-project.
double orthonormality_defect(const Mat3& m);

}  // namespace so3

/// Perturbation calculus on the unit sphere S^2. Tangent vectors are
/// 2-dimensional, expressed in a basis orthogonal to the anchor point.
namespace s2 {

/// Tolerance on 1 + u.dot(v) below which two directions count as antipodal.
inline constexpr double kAntipodalTol = 1e-8;

/// Deterministic 3x2 basis with orthonormal columns orthogonal to u
/// (Householder-style completion anchored on the smallest component of u).
/// Throws std::invalid_argument if u is not unit norm within 1e-6.
Mat32 tangent_basis(const Vec3& u);

/// Minimal rotation taking u to v (axis orthogonal to both). Throws
/// std::domain_error for antipodal inputs, where no minimal rotation exists.
Mat3 rot_between(const Vec3& u, const Vec3& v);

/// Exp(B(u) * delta) * u with the deterministic basis.
Vec3 oplus(const Vec3& u, const Vec2& delta);
/// Same, with a caller-supplied basis at u.
Vec3 oplus(const Vec3& u, const Vec2& delta, const Mat32& basis);

/// B(u)^T * Log(rot_between(u, v)) with the deterministic basis.
Vec2 ominus(const Vec3& v, const Vec3& u);
/// Same, with a caller-supplied basis at u.
Vec2 ominus(const Vec3& v, const Vec3& u, const Mat32& basis);

}  // namespace s2

}  // namespace mimu

#endif  // MIMU_MANIFOLD_HPP
