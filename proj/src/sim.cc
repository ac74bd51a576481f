// Copyright 2026 The coinsert Authors
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

#include "coinsert/sim.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace coinsert {

namespace {

bool Finite(double v) { return std::isfinite(v); }

// Rotation about world Y applied to a board-frame vector.
Vec3 RotateY(double theta, const Vec3& v) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {c * v.x() + s * v.z(), v.y(), -s * v.x() + c * v.z()};
}

void CheckInterval(const Interval& iv, const char* name) {
  if (!Finite(iv.lo) || !Finite(iv.hi) || iv.lo > iv.hi) {
    throw ConfigError(std::string("invalid interval for ") + name);
  }
}

}  // namespace

Pose4 Geometry::TargetPose() const {
  return {frame_center.x, frame_center.y + target_depth, frame_center.z, 0.0};
}

Vec3 Geometry::BoardPointWorld(const Pose4& pose,
                               const Vec3& offset_board) const {
  return Vec3(pose.x, pose.y, pose.z) + RotateY(pose.theta_y, offset_board);
}

void Geometry::Validate() const {
  if (!(clearance > 0.0)) throw ConfigError("clearance must be positive");
  if (!(slot_depth > 0.0)) throw ConfigError("slot_depth must be positive");
  for (int i = 0; i < 3; ++i) {
    if (!(board_half_extents[i] > 0.0)) {
      throw ConfigError("board half extents must be positive");
    }
  }
  if (frame_center.theta_y != 0.0) {
    throw ConfigError("frame must be axis aligned (frame theta_y = 0)");
  }
  // The inserted pose must itself be a success pose.
  const double trailing = target_depth - board_half_extents.y();
  const double leading = target_depth + board_half_extents.y();
  if (trailing < Thickness() || leading > slot_depth) {
    throw ConfigError("target_depth does not seat the board inside the slot");
  }
}

void EnvParams::Validate() const {
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(f_max > 0.0) || !(t_max > 0.0)) {
    throw ConfigError("safety thresholds must be positive");
  }
  CheckInterval(k_board, "k_board");
  CheckInterval(k_frame, "k_frame");
  if (!(k_board.lo > 0.0) || !(k_frame.lo > 0.0)) {
    throw ConfigError("contact stiffness must be positive");
  }
  CheckInterval(start_x, "start_x");
  CheckInterval(start_y, "start_y");
  CheckInterval(start_z, "start_z");
  CheckInterval(start_theta, "start_theta");
  if (!(timeout > 0.0)) throw ConfigError("timeout must be positive");
  if (force_noise_sigma < 0.0 || torque_noise_sigma < 0.0) {
    throw ConfigError("noise sigmas must be nonnegative");
  }
  if (!(limits.v_max > 0.0) || !(limits.w_max > 0.0)) {
    throw ConfigError("velocity limits must be positive");
  }
  if (!(board_mass > 0.0)) throw ConfigError("board_mass must be positive");
}

std::string_view StatusName(Status s) {
  switch (s) {
    case Status::kRunning: return "running";
    case Status::kSuccess: return "success";
    case Status::kViolationForce: return "violation_force";
    case Status::kViolationTorque: return "violation_torque";
    case Status::kTimeout: return "timeout";
  }
  return "unknown";
}

Status StatusFromName(std::string_view name) {
  for (Status s : {Status::kRunning, Status::kSuccess, Status::kViolationForce,
                   Status::kViolationTorque, Status::kTimeout}) {
    if (StatusName(s) == name) return s;
  }
  throw ConfigError("unknown status '" + std::string(name) + "'");
}

ObservationNormalizer::ObservationNormalizer(const EnvParams& params,
                                             const Geometry& geometry) {
  const Pose4 target = geometry.TargetPose();
  auto half = [](const Interval& iv, double floor) {
    return std::max(std::max(std::abs(iv.lo), std::abs(iv.hi)), floor);
  };
  const double y_lo = std::min(params.start_y.lo, target.y);
  const double y_hi = std::max(params.start_y.hi, target.y);
  center_ << target.x, 0.5 * (y_lo + y_hi), target.z, 0.0,  //
      0.0, 0.0, 0.0, 0.0,                                    //
      0.0, 0.0, 0.0, 0.0;
  scale_ << half({params.start_x.lo - target.x, params.start_x.hi - target.x},
                 0.01),
      std::max(0.5 * (y_hi - y_lo), 0.01),
      half({params.start_z.lo - target.z, params.start_z.hi - target.z}, 0.01),
      half(params.start_theta, 0.01),  //
      params.limits.v_max, params.limits.v_max, params.limits.v_max,
      params.limits.w_max,  //
      params.f_max, params.f_max, params.f_max, params.t_max;
}

void ObservationNormalizer::Set(const ObsVector& center,
                                const ObsVector& scale) {
  if ((scale.array() == 0.0).any()) {
    throw ConfigError("normalizer scale must be nonzero");
  }
  center_ = center;
  scale_ = scale;
}

ObsVector ObservationNormalizer::Normalize(const Observation& obs) const {
  ObsVector raw;
  raw << obs.x_r.AsVector(), obs.xdot_r.AsVector(), obs.f_meas.AsVector();
  return (raw - center_).cwiseQuotient(scale_);
}

Observation ObservationNormalizer::Denormalize(const ObsVector& v) const {
  const ObsVector raw = v.cwiseProduct(scale_) + center_;
  Observation obs;
  obs.x_r = Pose4::FromVector(raw.segment<4>(0));
  obs.xdot_r = Twist4::FromVector(raw.segment<4>(4));
  obs.f_meas = Wrench4::FromVector(raw.segment<4>(8));
  return obs;
}

std::vector<ContactForce> ContactForces(const Pose4& pose, const Twist4& twist,
                                        const Geometry& geometry, double k_eff,
                                        double c_contact) {
  std::vector<ContactForce> out;
  const double hy = geometry.board_half_extents.y();
  const double front = geometry.frame_center.y;
  const double back = front + geometry.slot_depth;
  // Depth of the board's Y-extent inside the slot interval, measured from
  // whichever face of the frame it entered through.
  const double into_front = pose.y + hy - front;
  const double into_back = back - (pose.y - hy);
  if (into_front <= 0.0 || into_back <= 0.0) return out;
  const bool from_front = into_front <= into_back;
  const double axial_depth = from_front ? into_front : into_back;
  const Vec3 axial_normal(0.0, from_front ? -1.0 : 1.0, 0.0);

  const Vec3 center(pose.x, pose.y, pose.z);
  const Vec3 omega(0.0, twist.wy, 0.0);
  const Vec3 v_center(twist.vx, twist.vy, twist.vz);
  const double slot_x = geometry.SlotHalfX();
  const double slot_z = geometry.SlotHalfZ();
  const double hx = geometry.board_half_extents.x();
  const double hz = geometry.board_half_extents.z();

  for (double sx : {-1.0, 1.0}) {
    for (double sz : {-1.0, 1.0}) {
      const Vec3 corner =
          geometry.BoardPointWorld(pose, Vec3(sx * hx, 0.0, sz * hz));
      const Vec3 rel = corner - center;
      const Vec3 v_corner = v_center + omega.cross(rel);
      const double lx = corner.x() - geometry.frame_center.x;
      const double lz = corner.z() - geometry.frame_center.z;

      // Side walls the corner overlaps: (lateral depth, inward wall normal).
      const std::array<std::pair<double, Vec3>, 2> walls = {
          std::make_pair(std::abs(lx) - slot_x,
                         Vec3(lx > 0.0 ? -1.0 : 1.0, 0.0, 0.0)),
          std::make_pair(std::abs(lz) - slot_z,
                         Vec3(0.0, 0.0, lz > 0.0 ? -1.0 : 1.0))};
      const double deepest = std::max(walls[0].first, walls[1].first);
      if (deepest <= 0.0) continue;

      auto emit = [&](double depth, const Vec3& normal) {
        // Penetration grows when the corner moves against the normal.
        const double depth_rate = -normal.dot(v_corner);
        const double magnitude =
            std::max(0.0, k_eff * depth + c_contact * depth_rate);
        out.push_back({corner, magnitude * normal, normal, depth});
      };
      if (deepest > axial_depth) {
        // Corner is held off by the frame face.
        emit(axial_depth, axial_normal);
        continue;
      }
      for (const auto& [lateral_depth, wall_normal] : walls) {
        if (lateral_depth > 0.0) emit(lateral_depth, wall_normal);
      }
    }
  }
  return out;
}

Wrench4 SensorRead(const HumanWrench& human,
                   const std::vector<ContactForce>& contacts,
                   const Pose4& pose, const Geometry& geometry,
                   const SensorNoise& noise, Rng& rng) {
  const Vec3 sensor = geometry.BoardPointWorld(pose, geometry.sensor_offset_board);
  Vec3 force = human.force;
  Vec3 torque = (human.point - sensor).cross(human.force);
  torque.y() += human.torque_y;
  for (const ContactForce& c : contacts) {
    force += c.force;
    torque += (c.point - sensor).cross(c.force);
  }
  Wrench4 w{force.x(), force.y(), force.z(), torque.y()};
  if (noise.force_sigma > 0.0 || noise.torque_sigma > 0.0) {
    std::normal_distribution<double> n01(0.0, 1.0);
    w.fx += noise.force_sigma * n01(rng);
    w.fy += noise.force_sigma * n01(rng);
    w.fz += noise.force_sigma * n01(rng);
    w.ty += noise.torque_sigma * n01(rng);
  }
  return w;
}

double NormalizedWrenchNorm(const Wrench4& w, const EnvParams& params) {
  const double fx = w.fx / params.f_max, fy = w.fy / params.f_max;
  const double fz = w.fz / params.f_max, ty = w.ty / params.t_max;
  return std::sqrt(fx * fx + fy * fy + fz * fz + ty * ty);
}

double Reward(Status status, const Wrench4& f_meas, const EnvParams& params) {
  double kappa = 0.0;
  if (status == Status::kSuccess) {
    kappa = params.kappa_success;
  } else if (IsViolation(status)) {
    kappa = params.kappa_violation;
  }
  return params.omega1 * kappa -
         params.omega2 * NormalizedWrenchNorm(f_meas, params);
}

bool BoardInserted(const Pose4& pose, const Geometry& geometry) {
  const double hx = geometry.board_half_extents.x();
  const double hz = geometry.board_half_extents.z();
  for (double sx : {-1.0, 1.0}) {
    for (double sz : {-1.0, 1.0}) {
      const Vec3 corner =
          geometry.BoardPointWorld(pose, Vec3(sx * hx, 0.0, sz * hz));
      if (std::abs(corner.x() - geometry.frame_center.x) > geometry.SlotHalfX() ||
          std::abs(corner.z() - geometry.frame_center.z) > geometry.SlotHalfZ()) {
        return false;
      }
    }
  }
  const double trailing = pose.y - geometry.board_half_extents.y();
  // Small slack absorbs rounding when the pose sits exactly on the threshold.
  return trailing >= geometry.frame_center.y + geometry.Thickness() - 1e-12;
}

Status CheckTermination(const EnvState& state, const Wrench4& f_meas,
                        const Geometry& geometry, const EnvParams& params) {
  if (f_meas.ForceNorm() > params.f_max) return Status::kViolationForce;
  if (std::abs(f_meas.ty) > params.t_max) return Status::kViolationTorque;
  if (BoardInserted(state.pose, geometry)) return Status::kSuccess;
  if (state.time >= params.timeout - 1e-9) return Status::kTimeout;
  return Status::kRunning;
}

double SeriesStiffness(double k_board, double k_frame) {
  return k_board * k_frame / (k_board + k_frame);
}

InsertionEnv::InsertionEnv(EnvParams params, Geometry geometry)
    : params_(std::move(params)), geometry_(std::move(geometry)) {
  params_.Validate();
  geometry_.Validate();
  normalizer_ = ObservationNormalizer(params_, geometry_);
}

Pose4 InsertionEnv::SampleStartPose(const EnvParams& params, Rng& rng) {
  auto draw = [&rng](const Interval& iv) {
    if (iv.Width() == 0.0) return iv.lo;
    return std::uniform_real_distribution<double>(iv.lo, iv.hi)(rng);
  };
  Pose4 p;
  p.x = draw(params.start_x);
  p.y = draw(params.start_y);
  p.z = draw(params.start_z);
  p.theta_y = draw(params.start_theta);
  return p;
}

Observation InsertionEnv::Reset(std::uint64_t seed) {
  state_ = EnvState{};
  state_.rng.seed(seed);
  auto draw = [this](const Interval& iv) {
    if (iv.Width() == 0.0) return iv.lo;
    return std::uniform_real_distribution<double>(iv.lo, iv.hi)(state_.rng);
  };
  const double k_board = draw(params_.k_board);
  const double k_frame = draw(params_.k_frame);
  state_.k_eff = SeriesStiffness(k_board, k_frame);
  const double payload = params_.board_mass;
  state_.c_contact = params_.c_contact >= 0.0
                         ? params_.c_contact
                         : 2.0 * params_.contact_damping_ratio *
                                   std::sqrt(state_.k_eff * payload);

  int attempt = 0;
  for (;; ++attempt) {
    if (attempt > params_.max_start_retries) {
      throw ConfigError("start pose range always interpenetrates the frame");
    }
    state_.pose = SampleStartPose(params_, state_.rng);
    if (ContactForces(state_.pose, Twist4{}, geometry_, state_.k_eff, 0.0)
            .empty()) {
      break;
    }
  }
  state_.start_pose = state_.pose;
  state_.status = Status::kRunning;
  return CurrentObservation();
}

Observation InsertionEnv::CurrentObservation() const {
  return {state_.pose, state_.twist, state_.f_meas, state_.start_pose};
}

StepResult InsertionEnv::Step(const Twist4& action, const HumanWrench& human) {
  Advance(action);
  return Finish(human);
}

StepResult InsertionEnv::Step(const Twist4& action, const ForceSource& human) {
  Advance(action);
  return Finish(human.Act(state_, geometry_));
}

void InsertionEnv::Advance(const Twist4& action) {
  if (state_.status != Status::kRunning) {
    throw UsageError("step called after episode terminated with status " +
                     std::string(StatusName(state_.status)));
  }
  const Twist4 cmd = params_.limits.Clamp(action);
  const double dt = params_.dt;
  state_.pose.x += cmd.vx * dt;
  state_.pose.y += cmd.vy * dt;
  state_.pose.z += cmd.vz * dt;
  state_.pose.theta_y += cmd.wy * dt;
  state_.twist = cmd;
  state_.time += dt;
  ++state_.steps;
}

StepResult InsertionEnv::Finish(const HumanWrench& human) {
  const std::vector<ContactForce> contacts = ContactForces(
      state_.pose, state_.twist, geometry_, state_.k_eff, state_.c_contact);
  state_.contact_count = static_cast<int>(contacts.size());
  if (!contacts.empty() && !state_.first_contact_time) {
    state_.first_contact_time = state_.time;
  }
  state_.f_meas = SensorRead(
      human, contacts, state_.pose, geometry_,
      {params_.force_noise_sigma, params_.torque_noise_sigma}, state_.rng);
  state_.status = CheckTermination(state_, state_.f_meas, geometry_, params_);

  StepResult result;
  result.status = state_.status;
  result.reward = Reward(state_.status, state_.f_meas, params_);
  result.obs = CurrentObservation();
  return result;
}

}  // namespace coinsert
