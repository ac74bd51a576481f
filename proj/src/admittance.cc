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

#include "coinsert/admittance.h"

#include <algorithm>
#include <cmath>
#include <complex>

namespace coinsert {

void AdmittanceParams::Validate() const {
  for (int i = 0; i < 4; ++i) {
    if (!(inertia[i] > 0.0)) throw ConfigError("admittance inertia must be > 0");
    if (!(damping[i] >= 0.0) || !(stiffness[i] >= 0.0)) {
      throw ConfigError("admittance damping/stiffness must be >= 0");
    }
  }
}

AdmittanceState AdmittanceReset(const AdmittanceParams&) { return {}; }

AdmittanceOutput AdmittanceStep(const AdmittanceState& state,
                                const Wrench4& f_meas,
                                const AdmittanceParams& params, double dt) {
  if (!(dt > 0.0)) throw DomainError("admittance dt must be positive");
  const Vec4 f = f_meas.AsVector();
  if (!f.allFinite()) throw DomainError("non-finite wrench fed to admittance");
  const Vec4 disp = state.disp.AsVector();
  const Vec4 vel = state.vel.AsVector();
  const Vec4 acc = (f - params.damping.cwiseProduct(vel) -
                    params.stiffness.cwiseProduct(disp))
                       .cwiseQuotient(params.inertia);
  const Twist4 next_vel =
      params.limits.Clamp(Twist4::FromVector(vel + acc * dt));
  AdmittanceOutput out;
  out.state.vel = next_vel;
  out.state.disp = Pose4::FromVector(disp + next_vel.AsVector() * dt);
  out.command = next_vel;
  return out;
}

Twist4 AdmittanceGuide(const Observation& obs, const AdmittanceParams& params,
                       double dt) {
  AdmittanceState s;
  s.vel = obs.xdot_r;
  s.disp = Pose4::FromVector(obs.x_r.AsVector() - obs.origin.AsVector());
  return AdmittanceStep(s, obs.f_meas, params, dt).command;
}

double AdmittanceSpectralRadius(double m, double c, double k, double dt) {
  // v' = (1 - dt c/m) v - (dt k/m) x ;  x' = x + dt v'
  const double a11 = 1.0 - dt * dt * k / m, a12 = dt * (1.0 - dt * c / m);
  const double a21 = -dt * k / m, a22 = 1.0 - dt * c / m;
  const double tr = a11 + a22, det = a11 * a22 - a12 * a21;
  const std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr - 4.0 * det));
  const double r1 = std::abs((tr + disc) / 2.0);
  const double r2 = std::abs((tr - disc) / 2.0);
  return std::max(r1, r2);
}

}  // namespace coinsert
