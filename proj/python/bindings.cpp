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

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mimu/json_util.hpp"
#include "mimu/pipeline.hpp"

namespace py = pybind11;
using namespace mimu;

namespace {

KinematicChain chain_from_file(const std::string& path) {
  return KinematicChain::from_json_file(path);
}

JointState make_joint_state(const KinematicChain& chain, const VecX& angles,
                            const std::vector<Mat3>& deformations) {
  JointState q = chain.identity_joint_state();
  if (angles.size() != chain.n_joints()) {
    throw std::invalid_argument("angles size does not match the chain");
  }
  q.angles = angles;
  if (!deformations.empty()) {
    if (static_cast<int>(deformations.size()) != chain.n_deformations()) {
      throw std::invalid_argument("deformation count does not match the chain");
    }
    q.deformations = deformations;
  }
  return q;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "multi-IMU legged-robot state estimation core";

  py::register_exception<InvalidInput>(m, "InvalidInput");

  // Manifold operations.
  m.def("hat", &so3::hat, py::arg("v"));
  m.def("vee", &so3::vee, py::arg("m"));
  m.def("so3_exp", &so3::exp, py::arg("delta"));
  m.def("so3_log", &so3::log, py::arg("rotation"));
  m.def("so3_oplus", &so3::oplus, py::arg("rotation"), py::arg("delta"));
  m.def("so3_ominus", &so3::ominus, py::arg("r1"), py::arg("r2"));
  m.def("tangent_basis", &s2::tangent_basis, py::arg("u"));
  m.def("rot_between", &s2::rot_between, py::arg("u"), py::arg("v"));
  m.def("s2_oplus",
        py::overload_cast<const Vec3&, const Vec2&>(&s2::oplus),
        py::arg("u"), py::arg("delta"));
  m.def("s2_ominus",
        py::overload_cast<const Vec3&, const Vec3&>(&s2::ominus),
        py::arg("v"), py::arg("u"));

  // Filter core.
  m.def(
      "discretize",
      [](const MatX& F, const MatX& G, const MatX& H, double dt) {
        const auto d = discretize({F, G, H, dt});
        return py::make_tuple(d.A, d.Q);
      },
      py::arg("F"), py::arg("G"), py::arg("H"), py::arg("dt"));
  m.def("predict_covariance", &predict_covariance, py::arg("P"), py::arg("A"),
        py::arg("Q"));
  m.def(
      "kalman_correct",
      [](const MatX& P, const MatX& C, const MatX& D, const MatX& R,
         const VecX& innovation, double max_condition) {
        LinearizedMeasurement meas{C, D, R, innovation};
        const auto r = kalman_correct(P, meas, max_condition);
        py::dict out;
        out["applied"] = r.applied;
        out["delta"] = r.delta;
        out["covariance"] = r.covariance;
        out["condition"] = r.condition;
        return out;
      },
      py::arg("P"), py::arg("C"), py::arg("D"), py::arg("R"),
      py::arg("innovation"), py::arg("max_condition") = 1e12);

  // Robot model.
  py::class_<KinematicChain>(m, "KinematicChain")
      .def_static("from_file", &chain_from_file, py::arg("path"))
      .def_property_readonly("n_links", &KinematicChain::n_links)
      .def_property_readonly("n_joints", &KinematicChain::n_joints)
      .def_property_readonly("n_deformations", &KinematicChain::n_deformations)
      .def_property_readonly("dof", &KinematicChain::dof)
      .def("link_index", &KinematicChain::link_index, py::arg("name"))
      .def("link_name", &KinematicChain::link_name, py::arg("link"))
      .def_property_readonly("imu_names", [](const KinematicChain& c) {
        std::vector<std::string> names;
        for (const auto& imu : c.imus()) names.push_back(imu.name);
        return names;
      })
      .def_property_readonly("instrumented_links",
                             &KinematicChain::instrumented_links);

  m.def(
      "forward_kinematics",
      [](const KinematicChain& chain, const VecX& angles,
         const std::vector<Mat3>& deformations, int link_i, int link_j) {
        const auto rel = forward_kinematics(
            chain, make_joint_state(chain, angles, deformations), link_i,
            link_j);
        return py::make_tuple(rel.rotation, rel.translation);
      },
      py::arg("chain"), py::arg("angles"), py::arg("deformations"),
      py::arg("link_i"), py::arg("link_j"));
  m.def(
      "kinematic_jacobians",
      [](const KinematicChain& chain, const VecX& angles,
         const std::vector<Mat3>& deformations, int link_i, int link_j) {
        const auto jac = kinematic_jacobians(
            chain, make_joint_state(chain, angles, deformations), link_i,
            link_j);
        return py::make_tuple(jac.rotation, jac.position);
      },
      py::arg("chain"), py::arg("angles"), py::arg("deformations"),
      py::arg("link_i"), py::arg("link_j"));
  m.def(
      "estimate_deformations",
      [](const KinematicChain& chain, const VecX& angles,
         const std::map<int, Vec3>& tilts, int stance_foot) {
        const auto est = estimate_deformations(
            chain, make_joint_state(chain, angles, {}), tilts, stance_foot);
        return est.q.deformations;
      },
      py::arg("chain"), py::arg("angles"), py::arg("tilts"),
      py::arg("stance_foot"));

  // Contact.
  py::enum_<ContactMode>(m, "ContactMode")
      .value("ANY_SENSOR", ContactMode::kAnySensor)
      .value("FLAT_ONLY", ContactMode::kFlatOnly);
  m.def(
      "detect_contact",
      [](const std::array<double, 4>& forces, ContactMode mode,
         double threshold) {
        return detect_contact(FootForces::clamped(forces), mode, threshold);
      },
      py::arg("forces"), py::arg("mode"), py::arg("threshold"));
  m.def(
      "center_of_pressure",
      [](const std::array<double, 4>& forces,
         const std::array<Vec3, 4>& positions) {
        return center_of_pressure(FootForces::clamped(forces), positions);
      },
      py::arg("forces"), py::arg("positions"));

  // Metrics over aligned arrays.
  auto records = [](const VecX& t, const MatX& positions) {
    if (positions.rows() != t.size() || positions.cols() != 3) {
      throw std::invalid_argument("positions must be len(t) x 3");
    }
    std::vector<TrajectoryRecord> out(t.size());
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      out[i].t = t[i];
      out[i].position = positions.row(i).transpose();
    }
    return out;
  };
  m.def(
      "ate",
      [records](const VecX& t_est, const MatX& p_est, const VecX& t_truth,
                const MatX& p_truth) {
        return metrics::ate(records(t_est, p_est), records(t_truth, p_truth));
      },
      py::arg("t_est"), py::arg("p_est"), py::arg("t_truth"),
      py::arg("p_truth"));
  m.def(
      "rpe",
      [records](const VecX& t_est, const MatX& p_est, const VecX& t_truth,
                const MatX& p_truth, double window) {
        return metrics::rpe(records(t_est, p_est), records(t_truth, p_truth),
                            window);
      },
      py::arg("t_est"), py::arg("p_est"), py::arg("t_truth"),
      py::arg("p_truth"), py::arg("window") = 0.5);
  m.def(
      "avds_mm",
      [records](const VecX& t_est, const MatX& p_est, const VecX& t_truth,
                const MatX& p_truth, int steps) {
        return metrics::avds_mm(records(t_est, p_est),
                                records(t_truth, p_truth), steps);
      },
      py::arg("t_est"), py::arg("p_est"), py::arg("t_truth"),
      py::arg("p_truth"), py::arg("steps"));

  // Pipeline.
  m.def(
      "simulate",
      [](const std::string& spec_path, const std::string& log_path,
         const std::string& truth_path, std::optional<uint64_t> seed) {
        const auto outcome = run_simulate(
            SimulationSpec::from_json_file(spec_path), log_path, truth_path,
            seed);
        py::dict out;
        out["rows"] = outcome.rows;
        out["steps"] = outcome.steps;
        return out;
      },
      py::arg("spec_path"), py::arg("log_path"), py::arg("truth_path"),
      py::arg("seed") = std::nullopt);
  m.def(
      "estimate",
      [](const std::string& config_path, const std::string& log_path,
         const std::string& truth_path, const std::string& out_path,
         const std::string& filter) {
        RunConfig config = RunConfig::from_json_file(config_path);
        if (!filter.empty()) config.filter = filter;
        const auto outcome =
            run_estimate(config, log_path, truth_path, out_path);
        py::dict out;
        out["rows"] = outcome.rows;
        out["wall_seconds"] = outcome.wall_seconds;
        out["mean_tick_ms"] = outcome.mean_tick_ms;
        return out;
      },
      py::arg("config_path"), py::arg("log_path"), py::arg("truth_path"),
      py::arg("out_path"), py::arg("filter") = "");
  m.def(
      "evaluate",
      [](const std::string& estimate_path, const std::string& truth_path,
         const std::string& link, double window) {
        const auto report =
            run_evaluate(estimate_path, truth_path, link, window);
        py::dict out;
        out["ate_cm"] = report.ate_cm;
        out["rpe_cm"] = report.rpe_cm;
        out["avds_mm"] = report.avds_mm;
        out["yaw_drift_deg"] = report.yaw_drift_deg;
        out["rot_rmse_deg"] = report.rot_rmse_deg;
        out["steps"] = report.steps;
        return out;
      },
      py::arg("estimate_path"), py::arg("truth_path"), py::arg("link") = "",
      py::arg("window") = 0.5);
}
