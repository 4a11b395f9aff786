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

#include "mimu/log_io.hpp"

#include <charconv>
#include <cmath>

#include "mimu/json_util.hpp"

namespace mimu {
namespace {

void append_number(std::string& buffer, double value) {
  char tmp[32];
  const auto res = std::to_chars(tmp, tmp + sizeof(tmp), value);
  buffer.append(tmp, res.ptr);
}

double parse_number(const std::string_view token, const std::string& path,
                    int line) {
  double value{};
  const auto res =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw InvalidInput(path + ":" + std::to_string(line) +
                       ": malformed number \"" + std::string(token) + "\"");
  }
  return value;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

void quaternion_of(const Mat3& r, double out[4]) {
  const Eigen::Quaterniond q(r);
  out[0] = q.w();
  out[1] = q.x();
  out[2] = q.y();
  out[3] = q.z();
}

}  // namespace

Mat3 quaternion_to_rotation(double w, double x, double y, double z) {
  Eigen::Quaterniond q(w, x, y, z);
  q.normalize();
  return q.toRotationMatrix();
}

CsvWriter::CsvWriter(const std::string& path,
                     const std::vector<std::string>& header)
    : out_(path), columns_(header.size()) {
  if (!out_) {
    throw InvalidInput("cannot open for writing: " + path);
  }
  for (size_t i = 0; i < header.size(); ++i) {
    if (i) out_ << ',';
    out_ << header[i];
  }
  out_ << '\n';
}

void CsvWriter::write_row(const std::vector<double>& values) {
  if (values.size() != columns_) {
    throw std::logic_error("CsvWriter: row width does not match the header");
  }
  buffer_.clear();
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) buffer_.push_back(',');
    append_number(buffer_, values[i]);
  }
  buffer_.push_back('\n');
  out_.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
  ++rows_;
}

CsvReader::CsvReader(const std::string& path) : in_(path), path_(path) {
  if (!in_) {
    throw InvalidInput("cannot open file: " + path);
  }
  std::string line;
  if (!std::getline(in_, line)) {
    throw InvalidInput(path + ": empty file");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  header_ = split_csv(line);
}

bool CsvReader::has_column(const std::string& name) const {
  for (const auto& h : header_) {
    if (h == name) return true;
  }
  return false;
}

int CsvReader::column(const std::string& name) const {
  for (size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == name) return static_cast<int>(i);
  }
  throw InvalidInput(path_ + ": missing column \"" + name + "\"");
}

std::optional<std::vector<double>> CsvReader::next_row() {
  std::string line;
  if (!std::getline(in_, line)) return std::nullopt;
  ++line_;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto tokens = split_csv(line);
  if (tokens.size() != header_.size()) {
    throw InvalidInput(path_ + ":" + std::to_string(line_) + ": expected " +
                       std::to_string(header_.size()) + " columns, found " +
                       std::to_string(tokens.size()));
  }
  std::vector<double> out(tokens.size());
  for (size_t i = 0; i < tokens.size(); ++i) {
    out[i] = parse_number(tokens[i], path_, line_);
  }
  return out;
}

// --- sensor logs -----------------------------------------------------------

std::vector<std::string> sensor_log_header(const KinematicChain& chain,
                                           bool with_tilt) {
  std::vector<std::string> h{"t"};
  for (const auto& imu : chain.imus()) {
    for (const char* axis : {"gx", "gy", "gz"}) h.push_back(imu.name + "_" + axis);
    for (const char* axis : {"ax", "ay", "az"}) h.push_back(imu.name + "_" + axis);
  }
  for (int j = 1; j <= chain.n_joints(); ++j) {
    h.push_back("q" + std::to_string(j));
  }
  for (const auto& foot : chain.feet()) {
    for (int s = 1; s <= 4; ++s) {
      h.push_back(chain.link_name(foot.link) + "_f" + std::to_string(s));
    }
  }
  if (with_tilt) {
    for (const auto& imu : chain.imus()) {
      for (const char* axis : {"x", "y", "z"}) {
        h.push_back(imu.name + "_tilt_" + axis);
      }
    }
  }
  return h;
}

void append_sensor_row(CsvWriter& writer, const KinematicChain& chain,
                       const SensorFrame& frame, bool with_tilt) {
  std::vector<double> row{frame.t};
  for (size_t i = 0; i < chain.imus().size(); ++i) {
    for (int k = 0; k < 3; ++k) row.push_back(frame.imu[i].gyro[k]);
    for (int k = 0; k < 3; ++k) row.push_back(frame.imu[i].accel[k]);
  }
  for (int j = 0; j < chain.n_joints(); ++j) row.push_back(frame.joint_angles[j]);
  for (size_t f = 0; f < chain.feet().size(); ++f) {
    for (int s = 0; s < 4; ++s) row.push_back(frame.forces[f].newtons[s]);
  }
  if (with_tilt) {
    for (size_t i = 0; i < chain.imus().size(); ++i) {
      for (int k = 0; k < 3; ++k) row.push_back(frame.tilt[i][k]);
    }
  }
  writer.write_row(row);
}

SensorLogReader::SensorLogReader(const std::string& path,
                                 const KinematicChain& chain)
    : reader_(path), chain_(chain) {
  t_col_ = reader_.column("t");
  for (const auto& imu : chain.imus()) {
    gyro_.push_back(reader_.column(imu.name + "_gx"));
    accel_.push_back(reader_.column(imu.name + "_ax"));
  }
  for (int j = 1; j <= chain.n_joints(); ++j) {
    angle_.push_back(reader_.column("q" + std::to_string(j)));
  }
  for (const auto& foot : chain.feet()) {
    const std::string base = chain.link_name(foot.link);
    force_.push_back({reader_.column(base + "_f1"), reader_.column(base + "_f2"),
                      reader_.column(base + "_f3"), reader_.column(base + "_f4")});
  }
  has_tilt_ = reader_.has_column(chain.imus()[0].name + "_tilt_x");
  if (has_tilt_) {
    for (const auto& imu : chain.imus()) {
      tilt_.push_back(reader_.column(imu.name + "_tilt_x"));
    }
  }
}

std::optional<SensorFrame> SensorLogReader::next() {
  const auto row = reader_.next_row();
  if (!row) return std::nullopt;
  SensorFrame f;
  f.t = (*row)[t_col_];
  for (size_t i = 0; i < gyro_.size(); ++i) {
    ImuSample s;
    for (int k = 0; k < 3; ++k) s.gyro[k] = (*row)[gyro_[i] + k];
    for (int k = 0; k < 3; ++k) s.accel[k] = (*row)[accel_[i] + k];
    f.imu.push_back(s);
  }
  f.joint_angles.resize(static_cast<Eigen::Index>(angle_.size()));
  for (size_t j = 0; j < angle_.size(); ++j) {
    f.joint_angles[static_cast<Eigen::Index>(j)] = (*row)[angle_[j]];
  }
  for (const auto& cols : force_) {
    FootForces forces;
    for (int s = 0; s < 4; ++s) forces.newtons[s] = (*row)[cols[s]];
    f.forces.push_back(forces);
  }
  if (has_tilt_) {
    for (size_t i = 0; i < tilt_.size(); ++i) {
      f.tilt.push_back(
          Vec3((*row)[tilt_[i]], (*row)[tilt_[i] + 1], (*row)[tilt_[i] + 2]));
    }
  }
  return f;
}

// --- ground truth ----------------------------------------------------------

std::vector<std::string> truth_header(const KinematicChain& chain) {
  std::vector<std::string> h{"t"};
  for (const auto& imu : chain.imus()) {
    for (const char* c : {"px", "py", "pz", "qw", "qx", "qy", "qz", "vx", "vy",
                          "vz"}) {
      h.push_back(imu.name + "_" + c);
    }
  }
  for (const auto& foot : chain.feet()) {
    const std::string base = chain.link_name(foot.link);
    h.push_back(base + "_contact");
    for (const char* c : {"x", "y", "z"}) h.push_back(base + "_cop_" + c);
  }
  h.push_back("steps");
  return h;
}

void append_truth_row(CsvWriter& writer, const KinematicChain& chain,
                      const TruthSample& sample) {
  std::vector<double> row{sample.t};
  for (size_t i = 0; i < chain.imus().size(); ++i) {
    const auto& link = sample.links[i];
    for (int k = 0; k < 3; ++k) row.push_back(link.position[k]);
    double q[4];
    quaternion_of(link.rotation, q);
    for (int k = 0; k < 4; ++k) row.push_back(q[k]);
    for (int k = 0; k < 3; ++k) row.push_back(link.velocity[k]);
  }
  for (size_t f = 0; f < chain.feet().size(); ++f) {
    row.push_back(sample.contact[f] ? 1.0 : 0.0);
    for (int k = 0; k < 3; ++k) row.push_back(sample.cop[f][k]);
  }
  row.push_back(static_cast<double>(sample.steps));
  writer.write_row(row);
}

TruthReader::TruthReader(const std::string& path, const KinematicChain& chain)
    : reader_(path), chain_(chain) {
  t_col_ = reader_.column("t");
  steps_col_ = reader_.column("steps");
  for (const auto& imu : chain.imus()) {
    std::array<int, 10> cols{};
    const char* names[10] = {"px", "py", "pz", "qw", "qx",
                             "qy", "qz", "vx", "vy", "vz"};
    for (int k = 0; k < 10; ++k) {
      cols[k] = reader_.column(imu.name + "_" + names[k]);
    }
    pose_.push_back(cols);
  }
  for (const auto& foot : chain.feet()) {
    contact_.push_back(reader_.column(chain.link_name(foot.link) + "_contact"));
  }
}

std::optional<TruthRow> TruthReader::next() {
  const auto row = reader_.next_row();
  if (!row) return std::nullopt;
  TruthRow out;
  out.t = (*row)[t_col_];
  out.steps = static_cast<int>(std::llround((*row)[steps_col_]));
  for (const auto& cols : pose_) {
    LinkState x;
    x.position = Vec3((*row)[cols[0]], (*row)[cols[1]], (*row)[cols[2]]);
    x.rotation = quaternion_to_rotation((*row)[cols[3]], (*row)[cols[4]],
                                        (*row)[cols[5]], (*row)[cols[6]]);
    x.velocity = Vec3((*row)[cols[7]], (*row)[cols[8]], (*row)[cols[9]]);
    out.links.push_back(x);
  }
  for (int col : contact_) {
    out.contact.push_back((*row)[col] != 0.0);
  }
  return out;
}

// --- estimates -------------------------------------------------------------

std::vector<std::string> estimate_header(const KinematicChain& chain,
                                         const std::vector<int>& imu_indices) {
  std::vector<std::string> h{"t"};
  for (int i : imu_indices) {
    const std::string& name = chain.imus()[i].name;
    for (const char* c :
         {"px", "py", "pz", "qw", "qx", "qy", "qz", "vx", "vy", "vz",
          "srot_x", "srot_y", "srot_z", "spos_x", "spos_y", "spos_z",
          "svel_x", "svel_y", "svel_z"}) {
      h.push_back(name + "_" + c);
    }
  }
  for (const auto& foot : chain.feet()) {
    h.push_back(chain.link_name(foot.link) + "_contact");
  }
  return h;
}

namespace {

void append_link_columns(std::vector<double>& row, const LinkState& x,
                         const MatX& covariance, int offset) {
  for (int k = 0; k < 3; ++k) row.push_back(x.position[k]);
  double q[4];
  quaternion_of(x.rotation, q);
  for (int k = 0; k < 4; ++k) row.push_back(q[k]);
  for (int k = 0; k < 3; ++k) row.push_back(x.velocity[k]);
  for (int k = 0; k < 3; ++k) {
    row.push_back(std::sqrt(std::max(0.0, covariance(offset + kTheta + k,
                                                     offset + kTheta + k))));
  }
  for (int k = 0; k < 3; ++k) {
    row.push_back(std::sqrt(
        std::max(0.0, covariance(offset + kPos + k, offset + kPos + k))));
  }
  for (int k = 0; k < 3; ++k) {
    row.push_back(std::sqrt(
        std::max(0.0, covariance(offset + kVel + k, offset + kVel + k))));
  }
}

}  // namespace

void append_estimate_row(CsvWriter& writer, const FilterBelief& belief,
                         const StepInfo* info) {
  std::vector<double> row{belief.t};
  for (size_t i = 0; i < belief.links.size(); ++i) {
    append_link_columns(row, belief.links[i], belief.covariance,
                        static_cast<int>(i) * kLinkDim);
  }
  for (size_t f = 0; f < belief.feet.size(); ++f) {
    const bool flag =
        info ? info->foot_contacts[f] : belief.feet[f].in_contact;
    row.push_back(flag ? 1.0 : 0.0);
  }
  writer.write_row(row);
}

void append_estimate_row(CsvWriter& writer, const SingleImuEkf& filter,
                         const SingleImuEkf::Info* info) {
  std::vector<double> row{filter.time()};
  append_link_columns(row, filter.base(), filter.covariance(), 0);
  for (size_t f = 0; f < filter.feet().size(); ++f) {
    const bool flag = info ? info->foot_contacts[f] : filter.feet()[f].active;
    row.push_back(flag ? 1.0 : 0.0);
  }
  writer.write_row(row);
}

std::vector<TrajectoryRecord> load_trajectory(const std::string& path,
                                              const std::string& link) {
  CsvReader reader(path);
  const int t_col = reader.column("t");
  const int px = reader.column(link + "_px");
  const int qw = reader.column(link + "_qw");
  std::vector<TrajectoryRecord> out;
  while (auto row = reader.next_row()) {
    TrajectoryRecord r;
    r.t = (*row)[t_col];
    r.position = Vec3((*row)[px], (*row)[px + 1], (*row)[px + 2]);
    r.rotation = quaternion_to_rotation((*row)[qw], (*row)[qw + 1],
                                        (*row)[qw + 2], (*row)[qw + 3]);
    out.push_back(r);
  }
  return out;
}

std::string first_trajectory_link(const std::string& path) {
  CsvReader reader(path);
  for (const auto& name : reader.header()) {
    const size_t pos = name.rfind("_px");
    if (pos != std::string::npos && pos + 3 == name.size()) {
      return name.substr(0, pos);
    }
  }
  throw InvalidInput(path + ": no trajectory columns found");
}

int read_step_count(const std::string& path) {
  CsvReader reader(path);
  const int col = reader.column("steps");
  double last = 0.0;
  while (auto row = reader.next_row()) last = (*row)[col];
  return static_cast<int>(std::llround(last));
}

}  // namespace mimu
