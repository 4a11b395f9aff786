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

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "mimu/filter_core.hpp"
#include "test_util.hpp"

using namespace mimu;
using testutil::random_matx;
using testutil::random_psd;
using testutil::random_vecx;

namespace {

double min_eigenvalue(const MatX& m) {
  Eigen::SelfAdjointEigenSolver<MatX> eig(m);
  return eig.eigenvalues().minCoeff();
}

}  // namespace

TEST_SUITE_BEGIN("filter_core");

TEST_CASE("discretize trivial cases") {
  LinearizedDynamics dyn;
  dyn.F = MatX::Zero(3, 3);
  dyn.G = MatX::Zero(3, 3);
  dyn.H = MatX::Zero(3, 3);
  dyn.dt = 0.001;
  auto d = discretize(dyn);
  CHECK((d.A - MatX::Identity(3, 3)).norm() == 0.0);
  CHECK(d.Q.norm() == 0.0);

  dyn.G = MatX::Identity(3, 3);
  dyn.H = MatX::Identity(3, 3);
  d = discretize(dyn);
  CHECK((d.A - MatX::Identity(3, 3)).norm() == 0.0);
  CHECK((d.Q - 0.001 * MatX::Identity(3, 3)).norm() < 1e-15);

  dyn.dt = 0.0;
  CHECK_THROWS_AS(discretize(dyn), std::invalid_argument);
}

TEST_CASE("first-order A stays within the matrix exponential bound") {
  std::mt19937 rng(43);
  const double dt = 0.001;
  for (int i = 0; i < 50; ++i) {
    LinearizedDynamics dyn;
    dyn.F = random_matx(rng, 6, 6, 20.0);
    dyn.G = MatX::Zero(6, 1);
    dyn.H = MatX::Zero(1, 1);
    dyn.dt = dt;
    const auto d = discretize(dyn);
    const MatX exact = (dyn.F * dt).exp();  // scaling-and-squaring oracle
    const double f_norm = dyn.F.norm();
    const double bound = f_norm * f_norm * dt * dt * std::exp(f_norm * dt);
    CHECK((d.A - exact).norm() <= bound);
  }
}

TEST_CASE("predict_covariance") {
  std::mt19937 rng(47);
  const MatX P = random_psd(rng, 5);
  const MatX Q = random_psd(rng, 5, 0.1);

  CHECK((predict_covariance(P, MatX::Identity(5, 5), MatX::Zero(5, 5)) - P)
            .norm() < 1e-15);
  CHECK((predict_covariance(MatX::Zero(5, 5), random_matx(rng, 5, 5), Q) - Q)
            .norm() < 1e-15);

  for (int i = 0; i < 50; ++i) {
    const MatX out = predict_covariance(random_psd(rng, 5),
                                        random_matx(rng, 5, 5),
                                        random_psd(rng, 5, 0.1));
    CHECK((out - out.transpose()).norm() < 1e-12);
    CHECK(min_eigenvalue(out) >= -1e-10);
  }
}

TEST_CASE("correct: no measurement rows leaves the belief unchanged") {
  GaussianBelief<VecX> belief{VecX::Zero(4), MatX::Identity(4, 4)};
  LinearizedMeasurement m;
  m.C = MatX::Zero(0, 4);
  m.D = MatX::Zero(0, 0);
  m.R = MatX::Zero(0, 0);
  m.innovation = VecX::Zero(0);
  const auto out = correct(belief, m,
                           [](const VecX& x, const VecX& d) -> VecX { return x + d; });
  CHECK((out.mean - belief.mean).norm() == 0.0);
  CHECK((out.covariance - belief.covariance).norm() == 0.0);
}

TEST_CASE("correct: scalar system hand evaluation") {
  GaussianBelief<double> belief{0.0, MatX::Ones(1, 1)};
  LinearizedMeasurement m;
  m.C = MatX::Ones(1, 1);
  m.D = MatX::Ones(1, 1);
  m.R = MatX::Ones(1, 1);
  m.innovation = VecX::Ones(1);
  const auto out =
      correct(belief, m, [](double x, const VecX& d) { return x + d[0]; });
  CHECK(out.mean == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(out.covariance(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("correct: zero innovation keeps the mean, still contracts") {
  std::mt19937 rng(53);
  const MatX P = random_psd(rng, 6);
  LinearizedMeasurement m;
  m.C = random_matx(rng, 2, 6);
  m.D = MatX::Identity(2, 2);
  m.R = 0.01 * MatX::Identity(2, 2);
  m.innovation = VecX::Zero(2);
  const auto r = kalman_correct(P, m);
  REQUIRE(r.applied);
  CHECK(r.delta.norm() == 0.0);
  CHECK(r.covariance.trace() <= P.trace() + 1e-12);
}

TEST_CASE("correct never increases the trace when D R D^T is PSD") {
  std::mt19937 rng(59);
  for (int i = 0; i < 50; ++i) {
    const MatX P = random_psd(rng, 6);
    LinearizedMeasurement m;
    m.C = random_matx(rng, 3, 6);
    m.D = random_matx(rng, 3, 3);
    m.R = random_psd(rng, 3, 0.2);
    m.innovation = random_vecx(rng, 3);
    const auto r = kalman_correct(P, m);
    if (!r.applied) continue;
    CHECK(r.covariance.trace() <= P.trace() + 1e-10);
    CHECK(min_eigenvalue(r.covariance) >= -1e-10);
  }
}

TEST_CASE("ill-conditioned innovation covariance skips the correction") {
  const MatX P = MatX::Identity(2, 2);
  LinearizedMeasurement m;
  m.C = MatX::Zero(2, 2);  // S = D R D^T = 0: degenerate
  m.D = MatX::Zero(2, 2);
  m.R = MatX::Identity(2, 2);
  m.innovation = VecX::Ones(2);
  const auto r = kalman_correct(P, m);
  CHECK_FALSE(r.applied);
  CHECK((r.covariance - P).norm() == 0.0);
}

TEST_CASE("exact full-state measurement zeroes the error in one correction") {
  std::mt19937 rng(61);
  const int n = 5;
  const VecX truth = random_vecx(rng, n);
  const VecX estimate = random_vecx(rng, n);
  GaussianBelief<VecX> belief{estimate, random_psd(rng, n)};
  LinearizedMeasurement m;
  m.C = MatX::Identity(n, n);
  m.D = MatX::Identity(n, n);
  m.R = MatX::Zero(n, n);  // noiseless measurement of the full state
  m.innovation = truth - estimate;
  const auto out = correct(belief, m,
                           [](const VecX& x, const VecX& d) -> VecX { return x + d; });
  CHECK((out.mean - truth).norm() < 1e-12 * truth.norm());
  CHECK(out.covariance.norm() < 1e-10);
}

TEST_CASE("covariance stays symmetric PSD over predict/correct interleavings") {
  std::mt19937 rng(67);
  MatX P = random_psd(rng, 8);
  for (int step = 0; step < 200; ++step) {
    if (step % 2 == 0) {
      const MatX A = MatX::Identity(8, 8) + 0.01 * random_matx(rng, 8, 8);
      P = predict_covariance(P, A, random_psd(rng, 8, 0.05));
    } else {
      LinearizedMeasurement m;
      m.C = random_matx(rng, 3, 8);
      m.D = MatX::Identity(3, 3);
      m.R = random_psd(rng, 3, 0.1);
      m.innovation = random_vecx(rng, 3);
      const auto r = kalman_correct(P, m);
      if (r.applied) P = r.covariance;
    }
    CHECK((P - P.transpose()).norm() < 1e-9);
    CHECK(min_eigenvalue(P) >= -1e-10);
  }
}

TEST_SUITE_END();
