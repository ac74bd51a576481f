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

#ifndef COINSERT_TYPES_H_
#define COINSERT_TYPES_H_

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace coinsert {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;

// Every component of the workbench draws from this engine so that a seed
// fully determines an episode.
using Rng = std::mt19937_64;

// Reduced 4-DoF configuration: board-center position and rotation about the
// world Y axis.
struct Pose4 {
  double x = 0.0;        // m
  double y = 0.0;        // m
  double z = 0.0;        // m
  double theta_y = 0.0;  // rad

  Vec4 AsVector() const { return {x, y, z, theta_y}; }
  static Pose4 FromVector(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }
  bool operator==(const Pose4&) const = default;
};

struct Twist4 {
  double vx = 0.0;  // m/s
  double vy = 0.0;  // m/s
  double vz = 0.0;  // m/s
  double wy = 0.0;  // rad/s

  Vec4 AsVector() const { return {vx, vy, vz, wy}; }
  static Twist4 FromVector(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }
  bool operator==(const Twist4&) const = default;
};

struct Wrench4 {
  double fx = 0.0;  // N
  double fy = 0.0;  // N
  double fz = 0.0;  // N
  double ty = 0.0;  // N*m

  Vec4 AsVector() const { return {fx, fy, fz, ty}; }
  static Wrench4 FromVector(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }
  double ForceNorm() const { return std::sqrt(fx * fx + fy * fy + fz * fz); }
  bool operator==(const Wrench4&) const = default;
};

// Velocity limits applied to every commanded twist.
struct VelocityLimits {
  double v_max = 0.1;  // m/s per translational component
  double w_max = 0.3;  // rad/s

  Twist4 Clamp(const Twist4& t) const;
};

// Force applied by whoever holds the board (simulated limb or virtual
// coupling): a world-frame force at a world-frame point, plus a pure torque
// about Y.
struct HumanWrench {
  Vec3 force = Vec3::Zero();
  Vec3 point = Vec3::Zero();
  double torque_y = 0.0;
};

// Invalid configuration or parameters.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Operation called in a state that does not accept it.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline Twist4 VelocityLimits::Clamp(const Twist4& t) const {
  auto clip = [](double v, double lim) {
    return v > lim ? lim : (v < -lim ? -lim : v);
  };
  return {clip(t.vx, v_max), clip(t.vy, v_max), clip(t.vz, v_max),
          clip(t.wy, w_max)};
}

}  // namespace coinsert

#endif  // COINSERT_TYPES_H_
