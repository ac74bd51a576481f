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

#ifndef COINSERT_HUMAN_H_
#define COINSERT_HUMAN_H_

#include "coinsert/sim.h"
#include "coinsert/types.h"

namespace coinsert {

// Limb damping and stiffness, one gain per DoF (x, y, z, theta_y).
struct HumanParams {
  Vec4 damping = Vec4::Zero();    // kg/s, N*m*s/rad
  Vec4 stiffness = Vec4::Zero();  // N/m, N*m/rad
};

// Per-episode randomization bounds for the simulated operator.
struct HumanBounds {
  Vec4 damping_lo{5.0, 5.0, 5.0, 0.05};
  Vec4 damping_hi{375.0, 375.0, 375.0, 2.0};
  Vec4 stiffness_lo{200.0, 200.0, 200.0, 2.0};
  Vec4 stiffness_hi{1500.0, 1500.0, 1500.0, 10.0};
  Interval plan_time{8.0, 15.0};  // s

  void Validate() const;
};

// Cubic intent x_d(t) = a t^3 + b t^2 + c t + d for t <= T, x_f afterwards.
struct SplineCoeffs {
  Vec4 a = Vec4::Zero();
  Vec4 b = Vec4::Zero();
  Vec4 c = Vec4::Zero();
  Vec4 d = Vec4::Zero();
  double T = 1.0;
  Pose4 x_f;
};

SplineCoeffs PlanTrajectory(const Pose4& x_i, const Pose4& x_f,
                            const Twist4& v_i, const Twist4& v_f, double T);

Pose4 DesiredPose(const SplineCoeffs& coeffs, double t);
Twist4 DesiredVelocity(const SplineCoeffs& coeffs, double t);

// f_h = -D (.) xdot + K (.) (x_d - x), componentwise.
Wrench4 HumanForce(const HumanParams& params, const Pose4& x,
                   const Twist4& xdot, const Pose4& x_d);

// Places a limb wrench on the board: the three force components act at the
// grasp point, the rotational component is a pure torque.
HumanWrench ApplyAtGrasp(const Wrench4& f_h, const Pose4& pose,
                         const Geometry& geometry);

HumanParams SampleHumanParams(Rng& rng, const HumanBounds& bounds);

// Simulated operator for one episode: sampled gains and intent spline.
class SimulatedHuman : public ForceSource {
 public:
  SimulatedHuman() = default;
  SimulatedHuman(HumanParams params, SplineCoeffs plan)
      : params_(params), plan_(plan) {}

  // Samples gains and planning time, then plans from the start pose to the
  // inserted pose with zero boundary velocities.
  static SimulatedHuman Sample(Rng& rng, const HumanBounds& bounds,
                               const Pose4& start, const Pose4& target);

  HumanWrench Act(const EnvState& state,
                  const Geometry& geometry) const override;

  const HumanParams& params() const { return params_; }
  const SplineCoeffs& plan() const { return plan_; }

 private:
  HumanParams params_;
  SplineCoeffs plan_;
};

}  // namespace coinsert

#endif  // COINSERT_HUMAN_H_
