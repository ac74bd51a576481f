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

#include "coinsert/human.h"

#include <string>

namespace coinsert {

void HumanBounds::Validate() const {
  for (int i = 0; i < 4; ++i) {
    if (!(damping_lo[i] >= 0.0) || damping_lo[i] > damping_hi[i] ||
        !(stiffness_lo[i] >= 0.0) || stiffness_lo[i] > stiffness_hi[i]) {
      throw ConfigError("invalid human gain bounds at DoF " + std::to_string(i));
    }
  }
  if (!(plan_time.lo > 0.0) || plan_time.lo > plan_time.hi) {
    throw ConfigError("invalid human planning-time range");
  }
}

SplineCoeffs PlanTrajectory(const Pose4& x_i, const Pose4& x_f,
                            const Twist4& v_i, const Twist4& v_f, double T) {
  if (!(T > 0.0)) throw DomainError("planning time T must be positive");
  SplineCoeffs s;
  s.T = T;
  s.x_f = x_f;
  s.c = v_i.AsVector();
  s.d = x_i.AsVector();
  const Vec4 xf = x_f.AsVector();
  const Vec4 vf = v_f.AsVector();
  s.a = (2.0 * (s.d - xf) + (s.c + vf) * T) / (T * T * T);
  s.b = (vf - s.c - 3.0 * s.a * T * T) / (2.0 * T);
  return s;
}

Pose4 DesiredPose(const SplineCoeffs& s, double t) {
  if (t > s.T) return s.x_f;
  return Pose4::FromVector(((s.a * t + s.b) * t + s.c) * t + s.d);
}

Twist4 DesiredVelocity(const SplineCoeffs& s, double t) {
  if (t > s.T) return {};
  return Twist4::FromVector((3.0 * s.a * t + 2.0 * s.b) * t + s.c);
}

Wrench4 HumanForce(const HumanParams& params, const Pose4& x,
                   const Twist4& xdot, const Pose4& x_d) {
  const Vec4 f = -params.damping.cwiseProduct(xdot.AsVector()) +
                 params.stiffness.cwiseProduct(x_d.AsVector() - x.AsVector());
  return Wrench4::FromVector(f);
}

HumanWrench ApplyAtGrasp(const Wrench4& f_h, const Pose4& pose,
                         const Geometry& geometry) {
  HumanWrench w;
  w.force = Vec3(f_h.fx, f_h.fy, f_h.fz);
  w.point = geometry.BoardPointWorld(pose, geometry.grasp_offset_board);
  w.torque_y = f_h.ty;
  return w;
}

HumanParams SampleHumanParams(Rng& rng, const HumanBounds& bounds) {
  auto draw = [&rng](double lo, double hi) {
    if (lo == hi) return lo;
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  HumanParams p;
  for (int i = 0; i < 4; ++i) {
    p.damping[i] = draw(bounds.damping_lo[i], bounds.damping_hi[i]);
  }
  for (int i = 0; i < 4; ++i) {
    p.stiffness[i] = draw(bounds.stiffness_lo[i], bounds.stiffness_hi[i]);
  }
  return p;
}

SimulatedHuman SimulatedHuman::Sample(Rng& rng, const HumanBounds& bounds,
                                      const Pose4& start, const Pose4& target) {
  HumanParams params = SampleHumanParams(rng, bounds);
  double T = bounds.plan_time.lo;
  if (bounds.plan_time.Width() > 0.0) {
    T = std::uniform_real_distribution<double>(bounds.plan_time.lo,
                                               bounds.plan_time.hi)(rng);
  }
  return SimulatedHuman(params,
                        PlanTrajectory(start, target, Twist4{}, Twist4{}, T));
}

HumanWrench SimulatedHuman::Act(const EnvState& state,
                                const Geometry& geometry) const {
  const Pose4 x_d = DesiredPose(plan_, state.time);
  return ApplyAtGrasp(HumanForce(params_, state.pose, state.twist, x_d),
                      state.pose, geometry);
}

}  // namespace coinsert
