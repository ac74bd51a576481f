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

#ifndef COINSERT_HARNESS_H_
#define COINSERT_HARNESS_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "coinsert/admittance.h"
#include "coinsert/episode.h"
#include "coinsert/human.h"
#include "coinsert/pgppo.h"
#include "coinsert/sim.h"

namespace coinsert {

// Everything an experiment needs; loaded from the flat config file.
struct TrainConfig {
  EnvParams env;
  Geometry geometry;
  HumanBounds human;
  AdmittanceParams admittance;
  PgppoConfig pgppo;
  GuidanceConfig guidance;
  int iterations = 75;
  int trajectories_per_iteration = 20;
  int demo_episodes = 10;
  long demo_attempt_budget = 2000;
  std::uint64_t seed = 1;

  void Validate() const;
};

// Deterministic seed for the `index`-th item of stream `stream`.
std::uint64_t DeriveSeed(std::uint64_t base, std::uint64_t stream,
                         std::uint64_t index);

// Independent random streams of one experiment seed.
enum SeedStream : std::uint64_t {
  kInitStream = 1,       // network initialization
  kDemoStream = 2,       // demonstration attempt episodes
  kDemoSetStream = 3,    // seed of the demonstration set built by Train
  kRolloutStream = 4,    // training episodes
  kActionStream = 5,     // exploration noise, per episode
  kEvalStream = 6,       // evaluation episodes
  kOptimizerStream = 7,  // minibatch shuffling
};

// Seed of the j-th rollout of iteration k (1-based k).
std::uint64_t RolloutSeed(std::uint64_t base, int k, int j);

// Policy as a robot assistant. The deterministic variant commands the mean.
class PolicyAssistant : public Assistant {
 public:
  PolicyAssistant(const GaussianPolicy* policy,
                  ObservationNormalizer normalizer, VelocityLimits limits)
      : policy_(policy), normalizer_(normalizer), limits_(limits) {}

  void Reset(const Observation&) override {}
  Twist4 Act(const Observation& obs) override;

 private:
  const GaussianPolicy* policy_;
  ObservationNormalizer normalizer_;
  VelocityLimits limits_;
};

// Successful admittance-control state/action pairs in network units.
struct DemoDataset {
  Matrix obs;
  Matrix actions;
  std::vector<std::uint64_t> episode_seeds;  // successful episodes only
  long attempts = 0;

  Eigen::Index size() const { return obs.cols(); }
};

// Thrown when the attempt budget runs out; carries the partial count.
class DemoBudgetError : public std::runtime_error {
 public:
  DemoBudgetError(int successes, long attempts);
  int successes() const { return successes_; }
  long attempts() const { return attempts_; }

 private:
  int successes_;
  long attempts_;
};

DemoDataset CollectDemos(int n_success, const TrainConfig& config,
                         std::uint64_t seed);

// One stochastic rollout of `policy` with the simulated operator. Also
// records pi_H at each visited state when `with_guide` is set.
Trajectory CollectTrajectory(InsertionEnv& env, const TrainConfig& config,
                             const GaussianPolicy& policy,
                             const ValueFunction& value, std::uint64_t seed,
                             bool with_guide);

struct LearningCurveRecord {
  int iteration = 0;
  double mean_return = 0.0;
  double success_fraction = 0.0;
  double delta = 0.0;  // guidance clip bound used in this iteration
  double wall_time = 0.0;  // s since training start
  long samples = 0;
  double mean_ratio = 1.0;
  double value_loss = 0.0;
  double guide_objective = 0.0;
  double policy_std = 0.0;  // mean exploration std, normalized units
  double approx_kl = 0.0;
  int ppo_updates = 0;
  bool ppo_aborted = false;
};

struct TrainResult {
  GaussianPolicy policy;
  ValueFunction value;
  ObservationNormalizer normalizer;
  std::vector<LearningCurveRecord> curve;
  // Policy parameters after every iteration, when requested.
  std::vector<Vector> policy_history;
  Rng rng;
};

using IterationCallback = std::function<void(const LearningCurveRecord&)>;

// Guided PPO outer loop: collect, improve, guide, fit value, decay delta.
// Fully determined by the config (seed included).
TrainResult Train(const TrainConfig& config,
                  const DemoDataset* demos = nullptr,
                  const IterationCallback& on_iteration = {},
                  bool keep_history = false);

// Summary statistics of a sample.
struct SampleStats {
  long n = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation
};

SampleStats Summarize(const std::vector<double>& xs);

struct EvalReport {
  int n_trials = 0;
  int successes = 0;
  double success_rate = 0.0;
  SampleStats completion_time;  // successes only
  int fail_force = 0;
  int fail_torque = 0;
  int fail_timeout = 0;
  // Shares of each cause among failures, in percent.
  double fail_force_pct = 0.0;
  double fail_torque_pct = 0.0;
  double fail_timeout_pct = 0.0;
  SampleStats approach_duration;  // successful episodes with contact
  SampleStats insert_duration;
  std::vector<double> insert_force_norms;
  std::vector<double> insert_torque_norms;
  std::vector<EpisodeOutcome> episodes;
};

EvalReport MakeReport(const std::vector<EpisodeOutcome>& episodes);

// Returns an empty string when the log obeys the termination semantics:
// nothing after a terminal status and no over-limit step except the last.
std::string CheckSafety(const std::vector<StepRecord>& log,
                        const EnvParams& params);

using EpisodeLogSink =
    std::function<void(const EpisodeOutcome&, const std::vector<StepRecord>&)>;

// Runs the assistant for every seed. When `sink` is set every step is logged
// and handed over after the episode.
EvalReport Evaluate(const TrainConfig& config, Assistant& assistant,
                    const std::vector<std::uint64_t>& seeds,
                    const EpisodeLogSink& sink = {});

std::vector<std::uint64_t> EvalSeeds(std::uint64_t base, int n);

}  // namespace coinsert

#endif  // COINSERT_HARNESS_H_
