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

#include "coinsert/episode.h"

#include <cmath>

namespace coinsert {

EpisodeOutcome RunEpisode(InsertionEnv& env, const HumanBounds& bounds,
                          Assistant& assistant, std::uint64_t seed,
                          std::vector<StepRecord>* log,
                          const StepObserver& observer) {
  Observation obs = env.Reset(seed);
  const SimulatedHuman human = SimulatedHuman::Sample(
      env.rng(), bounds, env.state().pose, env.geometry().TargetPose());
  assistant.Reset(obs);

  EpisodeOutcome out;
  out.seed = seed;
  while (env.state().status == Status::kRunning) {
    const Twist4 action = assistant.Act(obs);
    const StepResult r = env.Step(action, human);
    out.episode_return += r.reward;
    if (observer) observer(obs, action, r);
    const EnvState& s = env.state();
    if (s.first_contact_time) {
      out.insert_force_norms.push_back(s.f_meas.ForceNorm());
      out.insert_torque_norms.push_back(std::abs(s.f_meas.ty));
    }
    if (log) {
      log->push_back({s.time, s.pose, s.twist, s.f_meas, r.reward, r.status,
                      s.contact_count > 0});
    }
    obs = r.obs;
  }
  const EnvState& s = env.state();
  out.status = s.status;
  out.duration = s.time;
  out.first_contact_time = s.first_contact_time;
  out.steps = s.steps;
  return out;
}

}  // namespace coinsert
