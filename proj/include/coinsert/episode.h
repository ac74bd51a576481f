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

#ifndef COINSERT_EPISODE_H_
#define COINSERT_EPISODE_H_

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "coinsert/admittance.h"
#include "coinsert/human.h"
#include "coinsert/sim.h"

namespace coinsert {

// Anything that turns observations into velocity commands for the robot.
class Assistant {
 public:
  virtual ~Assistant() = default;
  virtual void Reset(const Observation& first) = 0;
  virtual Twist4 Act(const Observation& obs) = 0;
};

class AdmittanceAssistant : public Assistant {
 public:
  AdmittanceAssistant(const AdmittanceParams& params, double dt)
      : controller_(params, dt) {}
  void Reset(const Observation&) override { controller_.Reset(); }
  Twist4 Act(const Observation& obs) override {
    return controller_.Act(obs.f_meas);
  }

 private:
  AdmittanceController controller_;
};

// One logged simulation step.
struct StepRecord {
  double time = 0.0;
  Pose4 pose;
  Twist4 twist;
  Wrench4 wrench;
  double reward = 0.0;
  Status status = Status::kRunning;
  bool in_contact = false;
};

struct EpisodeOutcome {
  std::uint64_t seed = 0;
  Status status = Status::kRunning;
  double duration = 0.0;  // s, time of the terminal step
  std::optional<double> first_contact_time;
  double episode_return = 0.0;
  long steps = 0;
  // Force and torque norms at every step after the first contact.
  std::vector<double> insert_force_norms;
  std::vector<double> insert_torque_norms;
};

// Called after every step with the observation the action was chosen on.
using StepObserver = std::function<void(const Observation& obs,
                                        const Twist4& action,
                                        const StepResult& result)>;

// Runs one seeded episode of the simulated operator with an assistant.
// Episode randomness (start pose, stiffness, operator gains, plan time,
// sensor noise) all comes from the environment's seeded engine.
EpisodeOutcome RunEpisode(InsertionEnv& env, const HumanBounds& bounds,
                          Assistant& assistant, std::uint64_t seed,
                          std::vector<StepRecord>* log = nullptr,
                          const StepObserver& observer = {});

}  // namespace coinsert

#endif  // COINSERT_EPISODE_H_
