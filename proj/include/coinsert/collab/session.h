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

#ifndef COINSERT_COLLAB_SESSION_H_
#define COINSERT_COLLAB_SESSION_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "coinsert/checkpoint.h"
#include "coinsert/config.h"
#include "coinsert/episode.h"
#include "coinsert/harness.h"

namespace coinsert::collab {

// Spring-damper link between a pointer target and the board grasp.
struct CouplingParams {
  double k = 200.0;          // N/m
  double d = 20.0;           // kg/s
  double k_rot = 5.0;        // N*m/rad
  double d_rot = 0.5;        // N*m*s/rad
  double force_clamp = 40.0;  // N, on the force norm
  double torque_clamp = 4.0;  // N*m

  void Validate() const;
};

// f = k (target - pose) - d twist on x, y, z and the same law with the
// rotational gains on theta_y; the force norm and the torque are saturated,
// then the force is placed at the grasp point.
HumanWrench CouplingForce(const Pose4& target, const Pose4& pose,
                          const Twist4& twist, const CouplingParams& params,
                          const Geometry& geometry);

struct SessionParams {
  CouplingParams coupling;
  double physics_hz = 100.0;
  double broadcast_hz = 30.0;
  double grace_period = 30.0;  // s a detached session is kept

  void Validate() const;
};

// Reads the serve.* coupling and timing keys.
void ApplySessionConfig(ConfigFile& file, SessionParams* params);

enum class AssistantKind { kAdmittance, kPolicy };

struct AssistantSpec {
  AssistantKind kind = AssistantKind::kAdmittance;
  std::string checkpoint;  // path, policy only
};

// Latest cursor input: lateral/rotation targets and the insertion feed rate.
struct CursorInput {
  double x = 0.0;      // m
  double z = 0.0;      // m
  double theta = 0.0;  // rad
  double feed = 0.0;   // m/s along +Y
};

struct StateSnapshot {
  std::uint64_t tick = 0;
  double time = 0.0;
  Pose4 pose;
  Twist4 twist;
  Wrench4 wrench;
  Twist4 command;     // last assistant command
  Vec3 human_force = Vec3::Zero();
  double human_torque = 0.0;
  double reward = 0.0;  // summed over the frame
  Status status = Status::kRunning;
  bool in_contact = false;
  std::optional<double> first_contact_time;
  bool paused = false;
  std::optional<Pose4> target;
};

// One live episode driven by a remote operator. Not thread-safe; the owner
// serializes calls.
class Session {
 public:
  // Throws ConfigError when a policy checkpoint is missing or malformed.
  Session(std::string id, const TrainConfig& config, AssistantSpec spec,
          SessionParams params, std::uint64_t seed);

  const std::string& id() const { return id_; }
  const AssistantSpec& spec() const { return spec_; }
  const SessionParams& params() const { return params_; }
  std::uint64_t seed() const { return seed_; }
  // Simulation steps per physics frame.
  int substeps() const { return substeps_; }

  void SetCursor(const CursorInput& cursor);
  void SetPaused(bool paused) { paused_ = paused; }
  // New episode; keeps the tick counter running.
  void Reset(std::optional<std::uint64_t> seed = std::nullopt);

  // Advances one physics frame unless paused or terminal and returns the
  // state to broadcast. The tick counter always advances by one.
  const StateSnapshot& Tick();
  const StateSnapshot& latest() const { return latest_; }
  const InsertionEnv& env() const { return env_; }

 private:
  void Snapshot();

  std::string id_;
  TrainConfig config_;
  AssistantSpec spec_;
  SessionParams params_;
  std::uint64_t seed_;
  int substeps_ = 1;
  InsertionEnv env_;
  std::shared_ptr<const Checkpoint> checkpoint_;
  std::unique_ptr<Assistant> assistant_;
  Observation obs_;
  std::optional<CursorInput> cursor_;
  double y_target_ = 0.0;
  bool paused_ = false;
  std::uint64_t tick_ = 0;
  StateSnapshot latest_;
};

}  // namespace coinsert::collab

#endif  // COINSERT_COLLAB_SESSION_H_
