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

#ifndef COINSERT_ADMITTANCE_H_
#define COINSERT_ADMITTANCE_H_

#include "coinsert/sim.h"
#include "coinsert/types.h"

namespace coinsert {

// Diagonal gains of M_d xdd + C_d xd + K_d x = f_meas.
struct AdmittanceParams {
  Vec4 inertia{0.5, 0.5, 0.5, 0.1};     // kg, kg*m^2
  Vec4 damping{12.5, 12.5, 12.5, 1.5};  // kg/s, N*m*s/rad
  Vec4 stiffness{1.5, 1.5, 1.5, 4.5};   // N/m, N*m/rad
  VelocityLimits limits{};

  void Validate() const;
};

struct AdmittanceState {
  Pose4 disp;   // displacement since the last reset
  Twist4 vel;
};

struct AdmittanceOutput {
  AdmittanceState state;
  Twist4 command;
};

AdmittanceState AdmittanceReset(const AdmittanceParams& params);

// One semi-implicit Euler step. The integrated velocity is saturated at the
// velocity limits before it feeds the displacement, so the stored velocity is
// always the command that was actually sent.
AdmittanceOutput AdmittanceStep(const AdmittanceState& state,
                                const Wrench4& f_meas,
                                const AdmittanceParams& params, double dt);

// Stateless guide: rebuilds (disp, vel) from an observation and returns the
// command AdmittanceStep would produce.
Twist4 AdmittanceGuide(const Observation& obs, const AdmittanceParams& params,
                       double dt);

// Spectral radius of the per-DoF discrete update matrix in (disp, vel).
double AdmittanceSpectralRadius(double inertia, double damping,
                                double stiffness, double dt);

// Stateful wrapper used as the baseline assistant.
class AdmittanceController {
 public:
  AdmittanceController(AdmittanceParams params, double dt)
      : params_(params), dt_(dt), state_(AdmittanceReset(params_)) {
    params_.Validate();
  }

  void Reset() { state_ = AdmittanceReset(params_); }
  Twist4 Act(const Wrench4& f_meas) {
    AdmittanceOutput out = AdmittanceStep(state_, f_meas, params_, dt_);
    state_ = out.state;
    return out.command;
  }
  const AdmittanceState& state() const { return state_; }
  const AdmittanceParams& params() const { return params_; }

 private:
  AdmittanceParams params_;
  double dt_;
  AdmittanceState state_;
};

}  // namespace coinsert

#endif  // COINSERT_ADMITTANCE_H_
