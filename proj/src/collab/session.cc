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

#include "coinsert/collab/session.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "coinsert/human.h"

namespace coinsert::collab {
namespace {

// Evaluates the coupling at the post-motion state of each step.
class CouplingSource : public ForceSource {
 public:
  CouplingSource(const Pose4& target, const CouplingParams& params)
      : target_(target), params_(params) {}
  HumanWrench Act(const EnvState& state,
                  const Geometry& geometry) const override {
    return CouplingForce(target_, state.pose, state.twist, params_, geometry);
  }

 private:
  Pose4 target_;
  CouplingParams params_;
};

class ZeroSource : public ForceSource {
 public:
  HumanWrench Act(const EnvState& state,
                  const Geometry& geometry) const override {
    HumanWrench w;
    w.point = geometry.BoardPointWorld(state.pose, geometry.grasp_offset_board);
    return w;
  }
};

}  // namespace

void CouplingParams::Validate() const {
  if (!(k > 0.0) || !(d > 0.0) || !(k_rot > 0.0) || !(d_rot > 0.0)) {
    throw ConfigError("coupling gains must be positive");
  }
  if (!(force_clamp > 0.0) || !(torque_clamp > 0.0)) {
    throw ConfigError("coupling clamps must be positive");
  }
}

HumanWrench CouplingForce(const Pose4& target, const Pose4& pose,
                          const Twist4& twist, const CouplingParams& params,
                          const Geometry& geometry) {
  Vec3 f(params.k * (target.x - pose.x) - params.d * twist.vx,
         params.k * (target.y - pose.y) - params.d * twist.vy,
         params.k * (target.z - pose.z) - params.d * twist.vz);
  const double norm = f.norm();
  if (norm > params.force_clamp) f *= params.force_clamp / norm;
  const double tau = std::clamp(
      params.k_rot * (target.theta_y - pose.theta_y) - params.d_rot * twist.wy,
      -params.torque_clamp, params.torque_clamp);
  return ApplyAtGrasp({f.x(), f.y(), f.z(), tau}, pose, geometry);
}

void SessionParams::Validate() const {
  coupling.Validate();
  if (!(physics_hz > 0.0)) throw ConfigError("physics_hz must be positive");
  if (!(broadcast_hz >= 30.0)) {
    throw ConfigError("broadcast_hz must be at least 30");
  }
  if (!(grace_period >= 0.0)) throw ConfigError("grace_period must be >= 0");
}

void ApplySessionConfig(ConfigFile& f, SessionParams* p) {
  f.Get("serve.coupling_k", &p->coupling.k);
  f.Get("serve.coupling_d", &p->coupling.d);
  f.Get("serve.coupling_k_rot", &p->coupling.k_rot);
  f.Get("serve.coupling_d_rot", &p->coupling.d_rot);
  f.Get("serve.force_clamp", &p->coupling.force_clamp);
  f.Get("serve.torque_clamp", &p->coupling.torque_clamp);
  f.Get("serve.physics_hz", &p->physics_hz);
  f.Get("serve.broadcast_hz", &p->broadcast_hz);
  f.Get("serve.grace_period", &p->grace_period);
}

Session::Session(std::string id, const TrainConfig& config, AssistantSpec spec,
                 SessionParams params, std::uint64_t seed)
    : id_(std::move(id)),
      config_(config),
      spec_(std::move(spec)),
      params_(params),
      seed_(seed),
      env_(config.env, config.geometry) {
  params_.Validate();
  substeps_ = std::max(
      1, static_cast<int>(std::lround(1.0 / (params_.physics_hz * config.env.dt))));
  if (spec_.kind == AssistantKind::kPolicy) {
    checkpoint_ = std::make_shared<const Checkpoint>(
        LoadCheckpoint(spec_.checkpoint));
    assistant_ = std::make_unique<PolicyAssistant>(
        &checkpoint_->policy, checkpoint_->normalizer, checkpoint_->limits);
  } else {
    assistant_ =
        std::make_unique<AdmittanceAssistant>(config.admittance, config.env.dt);
  }
  Reset(seed);
}

void Session::SetCursor(const CursorInput& cursor) {
  if (!cursor_) y_target_ = env_.state().pose.y;
  cursor_ = cursor;
}

void Session::Reset(std::optional<std::uint64_t> seed) {
  if (seed) seed_ = *seed;
  obs_ = env_.Reset(seed_);
  assistant_->Reset(obs_);
  cursor_.reset();
  y_target_ = env_.state().pose.y;
  Snapshot();
  latest_.reward = 0.0;
}

const StateSnapshot& Session::Tick() {
  ++tick_;
  if (paused_ || env_.state().status != Status::kRunning) {
    Snapshot();
    return latest_;
  }
  double reward = 0.0;
  const double y_cap = env_.geometry().TargetPose().y;
  for (int i = 0; i < substeps_ && env_.state().status == Status::kRunning;
       ++i) {
    const Twist4 action = assistant_->Act(obs_);
    StepResult r;
    if (cursor_) {
      y_target_ = std::min(y_cap, y_target_ + cursor_->feed * config_.env.dt);
      const Pose4 target{cursor_->x, y_target_, cursor_->z, cursor_->theta};
      r = env_.Step(action, CouplingSource(target, params_.coupling));
    } else {
      r = env_.Step(action, ZeroSource());
    }
    reward += r.reward;
    obs_ = r.obs;
    latest_.command = action;
  }
  Snapshot();
  latest_.reward = reward;
  return latest_;
}

void Session::Snapshot() {
  const EnvState& s = env_.state();
  latest_.tick = tick_;
  latest_.time = s.time;
  latest_.pose = s.pose;
  latest_.twist = s.twist;
  latest_.wrench = s.f_meas;
  latest_.status = s.status;
  latest_.in_contact = s.contact_count > 0;
  latest_.first_contact_time = s.first_contact_time;
  latest_.paused = paused_;
  if (cursor_) {
    latest_.target = Pose4{cursor_->x, y_target_, cursor_->z, cursor_->theta};
    const HumanWrench w = CouplingForce(*latest_.target, s.pose, s.twist,
                                        params_.coupling, env_.geometry());
    latest_.human_force = w.force;
    latest_.human_torque = w.torque_y;
  } else {
    latest_.target.reset();
    latest_.human_force.setZero();
    latest_.human_torque = 0.0;
  }
}

}  // namespace coinsert::collab
