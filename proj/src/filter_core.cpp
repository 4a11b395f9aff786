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

#include "mimu/filter_core.hpp"

#include <Eigen/Eigenvalues>
#include <stdexcept>

namespace mimu {

DiscreteTransition discretize(const LinearizedDynamics& dyn) {
  if (dyn.dt <= 0.0) {
    throw std::invalid_argument("discretize: dt must be positive");
  }
  const auto n = dyn.F.rows();
  if (dyn.F.cols() != n || dyn.G.rows() != n || dyn.G.cols() != dyn.H.rows() ||
      dyn.H.rows() != dyn.H.cols()) {
    throw std::invalid_argument("discretize: inconsistent matrix shapes");
  }
  DiscreteTransition out;
  out.A = MatX::Identity(n, n) + dyn.F * dyn.dt;
  out.Q = dyn.G * dyn.H * dyn.G.transpose() * dyn.dt;
  symmetrize(out.Q);
  return out;
}

MatX predict_covariance(const MatX& P, const MatX& A, const MatX& Q) {
  MatX out = A * P * A.transpose() + Q;
  symmetrize(out);
  return out;
}

CorrectionResult kalman_correct(const MatX& P, const LinearizedMeasurement& m,
                                double max_condition) {
  const auto n = P.rows();
  CorrectionResult out;
  out.covariance = P;
  out.delta = VecX::Zero(n);
  if (m.C.rows() == 0) {
    out.applied = true;  // nothing to do; belief unchanged
    return out;
  }
  if (m.C.cols() != n || m.innovation.size() != m.C.rows() ||
      m.D.rows() != m.C.rows() || m.D.cols() != m.R.rows() ||
      m.R.rows() != m.R.cols()) {
    throw std::invalid_argument("kalman_correct: inconsistent matrix shapes");
  }

  const MatX PCt = P * m.C.transpose();
  MatX S = m.C * PCt + m.D * m.R * m.D.transpose();
  symmetrize(S);
  Eigen::SelfAdjointEigenSolver<MatX> eig(S);
  const VecX& ev = eig.eigenvalues();
  const double ev_max = ev.maxCoeff();
  if (!(ev_max > 0.0)) {
    out.condition = std::numeric_limits<double>::infinity();
    return out;  // no information at all; skip
  }

  // Rank-deficient S is expected when stacked measurements share noise (the
  // joint relative-pose update closes kinematic loops exactly). Invert on
  // the informative range: eigenvalues below ev_max / max_condition carry no
  // usable signal and get zero gain.
  const double floor = ev_max / max_condition;
  double ev_min_kept = ev_max;
  VecX inv = VecX::Zero(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] > floor) {
      inv[i] = 1.0 / ev[i];
      ev_min_kept = std::min(ev_min_kept, ev[i]);
    }
  }
  out.condition = ev_max / ev_min_kept;

  const MatX S_inv =
      eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
  const MatX K = PCt * S_inv;
  out.delta = K * m.innovation;
  // (I - K C) P = P - K (P C^T)^T for symmetric P.
  out.covariance = P - K * PCt.transpose();
  symmetrize(out.covariance);
  out.applied = true;
  return out;
}

}  // namespace mimu
