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

#ifndef MIMU_FILTER_CORE_HPP
#define MIMU_FILTER_CORE_HPP

#include <utility>

#include "mimu/manifold.hpp"

namespace mimu {

/// Continuous-time error dynamics d(dx)/dt = F dx + G eta, with eta white
/// noise of power spectral density H, to be discretized over dt seconds.
struct LinearizedDynamics {
  MatX F;
  MatX G;
  MatX H;
  double dt{};
};

/// First-order discrete transition: A = I + F dt, Q = G H G^T dt.
struct DiscreteTransition {
  MatX A;
  MatX Q;
};

/// Throws std::invalid_argument on dt <= 0 or inconsistent shapes.
DiscreteTransition discretize(const LinearizedDynamics& dyn);

/// A P A^T + Q, symmetrized.
MatX predict_covariance(const MatX& P, const MatX& A, const MatX& Q);

/// Linearized measurement: innovation = y (-) y_hat, modeled as
/// C dx + D nu with nu ~ N(0, R).
struct LinearizedMeasurement {
  MatX C;
  MatX D;
  MatX R;
  VecX innovation;
};

struct CorrectionResult {
  bool applied{false};   // false when S carries no usable information
  VecX delta;            // K * innovation; tangent-space mean update
  MatX covariance;       // (I - K C) P, symmetrized; input P when skipped
  double condition{0.0}; // condition number of the retained range of S
};

/// Kalman correction on the error state. The innovation covariance
/// S = C P C^T + D R D^T is inverted through a symmetric eigenvalue
/// factorization restricted to its informative range: eigenvalues below
/// max(S) / max_condition receive zero gain. Stacked measurements that share
/// noise terms make S structurally rank-deficient (closed kinematic loops),
/// so the null directions are dropped rather than the whole update. A
/// non-positive S skips the correction entirely.
CorrectionResult kalman_correct(const MatX& P, const LinearizedMeasurement& m,
                                double max_condition = 1e12);

/// Gaussian distribution on a manifold: mean point plus covariance of the
/// tangent-space perturbation.
template <typename State>
struct GaussianBelief {
  State mean;
  MatX covariance;
};

/// Full correction step: error-state Kalman update followed by mean
/// injection through the caller's oplus.
template <typename State, typename OplusFn>
GaussianBelief<State> correct(const GaussianBelief<State>& belief,
                              const LinearizedMeasurement& m, OplusFn&& oplus,
                              double max_condition = 1e12) {
  CorrectionResult r = kalman_correct(belief.covariance, m, max_condition);
  if (!r.applied) {
    return belief;
  }
  return {oplus(belief.mean, r.delta), std::move(r.covariance)};
}

inline void symmetrize(MatX& m) { m = ((m + m.transpose()) * 0.5).eval(); }

}  // namespace mimu

#endif  // MIMU_FILTER_CORE_HPP
