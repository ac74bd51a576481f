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

#ifndef COINSERT_SIM_H_
#define COINSERT_SIM_H_

#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "coinsert/types.h"

namespace coinsert {

inline constexpr int kObsDim = 12;
inline constexpr int kActDim = 4;
using ObsVector = Eigen::Matrix<double, kObsDim, 1>;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double Width() const { return hi - lo; }
  double Mid() const { return 0.5 * (lo + hi); }
};

// Board, slot and sensor layout. The frame opening lies in the world XZ
// plane at frame_center.y; insertion runs along +Y.
struct Geometry {
  // Board-local half extents: width (X), thickness (Y), height (Z).
  Vec3 board_half_extents{0.200, 0.0075, 0.100};
  double clearance = 0.001;   // m per side
  double slot_depth = 0.05;   // m along +Y from the front plane
  Pose4 frame_center{};       // center of the opening on the front plane
  Vec3 sensor_offset_board{0.0, 0.0, 0.1};
  Vec3 grasp_offset_board{0.05, 0.0, 0.0};
  // Board-center depth past the front plane at the inserted target pose.
  double target_depth = 0.03;

  double SlotHalfX() const { return board_half_extents.x() + clearance; }
  double SlotHalfZ() const { return board_half_extents.z() + clearance; }
  double Thickness() const { return 2.0 * board_half_extents.y(); }

  // The inserted pose x_f.
  Pose4 TargetPose() const;

  // Board-frame offset rotated into the world and translated to the pose.
  Vec3 BoardPointWorld(const Pose4& pose, const Vec3& offset_board) const;

  void Validate() const;
};

struct EnvParams {
  double dt = 0.002;       // s
  Interval k_board{1e5, 1.5e5};  // N/m, sampled per episode
  Interval k_frame{1e5, 1.5e5};  // N/m, sampled per episode
  // Contact damping in kg/s; negative selects
  // 2*contact_damping_ratio*sqrt(k_eff*board_mass) per episode.
  double c_contact = -1.0;
  double contact_damping_ratio = 0.3;
  double f_max = 80.0;     // N
  double t_max = 8.0;      // N*m
  double omega1 = 1.0;
  double omega2 = 0.02;
  double kappa_success = 200.0;
  double kappa_violation = -10.0;
  double timeout = 30.0;   // s
  double force_noise_sigma = 0.25;          // N, sqrt(1/16)
  double torque_noise_sigma = 0.036514837;  // N*m, sqrt(1/750)
  Interval start_x{-0.05, 0.05};
  Interval start_y{-0.30, -0.20};
  Interval start_z{-0.05, 0.05};
  Interval start_theta{-0.0349065850, 0.0349065850};  // +-2 deg
  double board_mass = 0.714;   // kg
  double vacuum_mass = 0.418;  // kg
  VelocityLimits limits{};
  int max_start_retries = 100;

  void Validate() const;
};

enum class Status { kRunning, kSuccess, kViolationForce, kViolationTorque, kTimeout };

std::string_view StatusName(Status s);
Status StatusFromName(std::string_view name);
inline bool IsViolation(Status s) {
  return s == Status::kViolationForce || s == Status::kViolationTorque;
}

struct Observation {
  Pose4 x_r;
  Twist4 xdot_r;
  Wrench4 f_meas;
  // Pose at the last controller reset. Not part of the network input; lets a
  // stateless admittance guide recover its displacement.
  Pose4 origin;
};

// Fixed affine map between an Observation and the 12 network inputs.
// Positions are scaled by the workspace extent, velocities by the limits and
// forces by the safety thresholds.
class ObservationNormalizer {
 public:
  ObservationNormalizer() = default;
  ObservationNormalizer(const EnvParams& params, const Geometry& geometry);

  ObsVector Normalize(const Observation& obs) const;
  // Inverse of Normalize; origin is not encoded and comes back zero.
  Observation Denormalize(const ObsVector& v) const;

  const ObsVector& center() const { return center_; }
  const ObsVector& scale() const { return scale_; }
  void Set(const ObsVector& center, const ObsVector& scale);

 private:
  ObsVector center_ = ObsVector::Zero();
  ObsVector scale_ = ObsVector::Ones();
};

struct ContactForce {
  Vec3 point;   // world application point
  Vec3 force;   // world force on the board
  Vec3 normal;  // inward unit normal of the touched surface
  double depth = 0.0;
};

// Penalty contact between the four cross-section corners of the board and
// the slot. A corner that overlaps a side wall laterally is pushed either
// back along the wall normal or out along the insertion axis, whichever
// penetration is shallower, so the depth stays continuous as the board
// arrives at the opening.
std::vector<ContactForce> ContactForces(const Pose4& pose, const Twist4& twist,
                                        const Geometry& geometry, double k_eff,
                                        double c_contact);

struct SensorNoise {
  double force_sigma = 0.0;
  double torque_sigma = 0.0;
};

// Wrench seen by the F/T sensor: the human load and every contact force,
// reduced to the sensor origin and projected to (fx, fy, fz, ty). Payload
// gravity is assumed compensated.
Wrench4 SensorRead(const HumanWrench& human,
                   const std::vector<ContactForce>& contacts,
                   const Pose4& pose, const Geometry& geometry,
                   const SensorNoise& noise, Rng& rng);

// Force/torque norm with force scaled by f_max and torque by t_max.
double NormalizedWrenchNorm(const Wrench4& w, const EnvParams& params);

double Reward(Status status, const Wrench4& f_meas, const EnvParams& params);

bool BoardInserted(const Pose4& pose, const Geometry& geometry);

struct EnvState {
  Pose4 pose;
  Twist4 twist;
  double time = 0.0;
  double k_eff = 0.0;
  double c_contact = 0.0;
  std::optional<double> first_contact_time;
  Rng rng;
  Status status = Status::kRunning;
  Pose4 start_pose;
  Wrench4 f_meas;
  int contact_count = 0;
  long steps = 0;

  bool operator==(const EnvState&) const = default;
};

Status CheckTermination(const EnvState& state, const Wrench4& f_meas,
                        const Geometry& geometry, const EnvParams& params);

// Source of the operator's load, queried at the post-motion state of each
// step so limb damping sees the velocity the board is actually moving at.
class ForceSource {
 public:
  virtual ~ForceSource() = default;
  virtual HumanWrench Act(const EnvState& state,
                          const Geometry& geometry) const = 0;
};

struct StepResult {
  Observation obs;
  double reward = 0.0;
  Status status = Status::kRunning;
};

// Fixed-step board/frame/sensor simulation. The robot is an ideal Cartesian
// velocity source, so the board moves exactly by the clamped command; forces
// only reach the world through the sensor reading.
class InsertionEnv {
 public:
  InsertionEnv(EnvParams params, Geometry geometry);

  Observation Reset(std::uint64_t seed);
  // Applies a fixed operator wrench for this step.
  StepResult Step(const Twist4& action, const HumanWrench& human);
  // Evaluates the operator after the board has moved.
  StepResult Step(const Twist4& action, const ForceSource& human);

  Observation CurrentObservation() const;

  const EnvState& state() const { return state_; }
  EnvState& mutable_state() { return state_; }
  const EnvParams& params() const { return params_; }
  const Geometry& geometry() const { return geometry_; }
  const ObservationNormalizer& normalizer() const { return normalizer_; }
  Rng& rng() { return state_.rng; }

  // Zero-width ranges reproduce a fixed start pose.
  static Pose4 SampleStartPose(const EnvParams& params, Rng& rng);

 private:
  void Advance(const Twist4& action);
  StepResult Finish(const HumanWrench& human);

  EnvParams params_;
  Geometry geometry_;
  ObservationNormalizer normalizer_;
  EnvState state_;
};

double SeriesStiffness(double k_board, double k_frame);

}  // namespace coinsert

#endif  // COINSERT_SIM_H_
