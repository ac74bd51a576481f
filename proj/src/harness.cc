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

#include "coinsert/harness.h"

#include <chrono>
#include <cmath>
#include <string>

namespace coinsert {
namespace {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Per-step discount equivalent to `factor` per `interval` seconds.
double PerStep(double factor, double interval, double dt) {
  return std::pow(factor, dt / interval);
}

}  // namespace

void TrainConfig::Validate() const {
  env.Validate();
  geometry.Validate();
  human.Validate();
  admittance.Validate();
  pgppo.Validate();
  guidance.Validate();
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  if (trajectories_per_iteration < 1) {
    throw ConfigError("trajectories_per_iteration must be >= 1");
  }
  if (demo_episodes < 1) throw ConfigError("demo_episodes must be >= 1");
  if (demo_attempt_budget < 1) {
    throw ConfigError("demo_attempt_budget must be >= 1");
  }
}

std::uint64_t DeriveSeed(std::uint64_t base, std::uint64_t stream,
                         std::uint64_t index) {
  return SplitMix64(SplitMix64(SplitMix64(base) ^ stream) ^ index);
}

std::uint64_t RolloutSeed(std::uint64_t base, int k, int j) {
  return DeriveSeed(base, kRolloutStream,
                    static_cast<std::uint64_t>(k) * 100003ULL +
                        static_cast<std::uint64_t>(j));
}

Twist4 PolicyAssistant::Act(const Observation& obs) {
  return DenormalizeAction(policy_->Mean(normalizer_.Normalize(obs)), limits_);
}

DemoBudgetError::DemoBudgetError(int successes, long attempts)
    : std::runtime_error("demonstration budget exhausted after " +
                         std::to_string(attempts) + " attempts with " +
                         std::to_string(successes) + " successes"),
      successes_(successes),
      attempts_(attempts) {}

DemoDataset CollectDemos(int n_success, const TrainConfig& config,
                         std::uint64_t seed) {
  if (n_success < 1) throw DomainError("n_success must be >= 1");
  InsertionEnv env(config.env, config.geometry);
  const ObservationNormalizer& norm = env.normalizer();
  AdmittanceAssistant ac(config.admittance, config.env.dt);

  std::vector<ObsVector> obs_all;
  std::vector<Vec4> act_all;
  DemoDataset out;
  int successes = 0;
  while (successes < n_success) {
    if (out.attempts >= config.demo_attempt_budget) {
      throw DemoBudgetError(successes, out.attempts);
    }
    const std::uint64_t s = DeriveSeed(seed, kDemoStream,
                                       static_cast<std::uint64_t>(out.attempts));
    ++out.attempts;
    std::vector<ObsVector> obs;
    std::vector<Vec4> act;
    const EpisodeOutcome o = RunEpisode(
        env, config.human, ac, s, nullptr,
        [&](const Observation& ob, const Twist4& a, const StepResult&) {
          obs.push_back(norm.Normalize(ob));
          act.push_back(NormalizeAction(a, config.env.limits));
        });
    if (o.status != Status::kSuccess) continue;
    ++successes;
    out.episode_seeds.push_back(s);
    obs_all.insert(obs_all.end(), obs.begin(), obs.end());
    act_all.insert(act_all.end(), act.begin(), act.end());
  }
  const Eigen::Index n = static_cast<Eigen::Index>(obs_all.size());
  out.obs.resize(kObsDim, n);
  out.actions.resize(kActDim, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.obs.col(i) = obs_all[i];
    out.actions.col(i) = act_all[i];
  }
  return out;
}

Trajectory CollectTrajectory(InsertionEnv& env, const TrainConfig& config,
                             const GaussianPolicy& policy,
                             const ValueFunction& value, std::uint64_t seed,
                             bool with_guide) {
  const ObservationNormalizer& norm = env.normalizer();
  const VelocityLimits& limits = config.env.limits;
  Observation obs = env.Reset(seed);
  const SimulatedHuman human = SimulatedHuman::Sample(
      env.rng(), config.human, env.state().pose,
      env.geometry().TargetPose());
  Rng action_rng(DeriveSeed(seed, kActionStream, 0));

  Trajectory traj;
  while (env.state().status == Status::kRunning) {
    const ObsVector o = norm.Normalize(obs);
    const ActionSample a = policy.Sample(o, action_rng);
    if (with_guide) {
      traj.guide_actions.push_back(NormalizeAction(
          AdmittanceGuide(obs, config.admittance, config.env.dt), limits));
    }
    const StepResult r = env.Step(DenormalizeAction(a.action, limits), human);
    traj.obs.push_back(o);
    traj.actions.push_back(a.action);
    traj.logprobs.push_back(a.logprob);
    traj.rewards.push_back(r.reward);
    obs = r.obs;
  }
  traj.status = env.state().status;
  traj.duration = env.state().time;

  const Eigen::Index n = static_cast<Eigen::Index>(traj.obs.size());
  Matrix m(kObsDim, n);
  for (Eigen::Index i = 0; i < n; ++i) m.col(i) = traj.obs[i];
  const Vector v = value.Predict(m);
  traj.values.assign(v.data(), v.data() + n);
  // The time limit is not part of the state, so a timeout is a truncation.
  traj.terminal = traj.status != Status::kTimeout;
  traj.bootstrap_value = traj.terminal ? 0.0 : value.Predict(norm.Normalize(obs));
  return traj;
}

TrainResult Train(const TrainConfig& config, const DemoDataset* demos,
                  const IterationCallback& on_iteration, bool keep_history) {
  config.Validate();
  const auto start = std::chrono::steady_clock::now();
  const GuidanceMode mode = config.guidance.mode;

  DemoDataset own_demos;
  if (UsesDemos(mode) && demos == nullptr) {
    own_demos = CollectDemos(config.demo_episodes, config,
                             DeriveSeed(config.seed, kDemoSetStream, 0));
    demos = &own_demos;
  }
  if (UsesDemos(mode) && demos->size() == 0) {
    throw ConfigError("guidance mode needs a non-empty demonstration set");
  }

  TrainResult out;
  Rng init_rng(DeriveSeed(config.seed, kInitStream, 0));
  out.policy = GaussianPolicy(config.pgppo);
  out.policy.Initialize(init_rng);
  out.value = ValueFunction(config.pgppo);
  out.value.Initialize(init_rng);
  out.rng.seed(DeriveSeed(config.seed, kOptimizerStream, 0));

  InsertionEnv env(config.env, config.geometry);
  out.normalizer = env.normalizer();
  Adam policy_adam(out.policy.num_params(), config.pgppo.policy_lr);
  Adam guide_adam(out.policy.num_params(), config.pgppo.policy_lr);
  Adam value_adam(out.value.net().num_params(), config.pgppo.value_lr);
  const double gamma = PerStep(config.pgppo.gamma,
                               config.pgppo.discount_interval, config.env.dt);
  const double lambda = PerStep(config.pgppo.lambda,
                                config.pgppo.discount_interval, config.env.dt);
  const bool with_guide = UsesGuidePolicy(mode);

  GuidanceData guide_data;
  if (UsesDemos(mode)) {
    guide_data.demo_obs = demos->obs;
    guide_data.demo_actions = demos->actions;
  }

  if (keep_history) out.policy_history.push_back(out.policy.params());
  double delta = config.guidance.delta;
  for (int k = 1; k <= config.iterations; ++k) {
    delta = DecayDelta(delta, config.guidance, k);
    LearningCurveRecord rec;
    rec.iteration = k;
    rec.delta = delta;

    std::vector<Trajectory> trajs;
    trajs.reserve(static_cast<size_t>(config.trajectories_per_iteration));
    int successes = 0;
    double total_return = 0.0;
    for (int j = 0; j < config.trajectories_per_iteration; ++j) {
      const std::uint64_t s = RolloutSeed(config.seed, k, j);
      trajs.push_back(
          CollectTrajectory(env, config, out.policy, out.value, s, with_guide));
      const Trajectory& t = trajs.back();
      if (t.status == Status::kSuccess) ++successes;
      for (double r : t.rewards) total_return += r;
    }
    rec.mean_return = total_return / config.trajectories_per_iteration;
    rec.success_fraction =
        static_cast<double>(successes) / config.trajectories_per_iteration;

    const Batch batch = MakeBatch(trajs, gamma, lambda, with_guide);
    trajs.clear();
    rec.samples = static_cast<long>(batch.size());

    const PpoStats ppo =
        PpoImprove(&out.policy, batch, config.pgppo, &policy_adam, out.rng);
    rec.mean_ratio = ppo.mean_ratio;
    rec.ppo_aborted = ppo.aborted;
    rec.approx_kl = ppo.approx_kl;
    rec.ppo_updates = ppo.updates;

    if (mode != GuidanceMode::kNone && delta >= config.guidance.delta_floor &&
        config.pgppo.guidance_epochs > 0) {
      if (with_guide) {
        guide_data.rollout_obs = batch.obs;
        guide_data.rollout_guide = batch.guide_actions;
      }
      const GuidanceStats g = GuidanceStep(&out.policy, guide_data, mode, delta,
                                           config.pgppo, &guide_adam, out.rng);
      rec.guide_objective = g.objective_f + g.objective_g;
    }

    rec.value_loss = ValueFit(&out.value, batch.obs, batch.returns,
                              config.pgppo, &value_adam, out.rng);
    if (!out.policy.params().allFinite() ||
        !out.value.net().params().allFinite()) {
      throw DomainError("non-finite parameters after iteration " +
                        std::to_string(k));
    }
    rec.policy_std = out.policy.log_std().array().exp().mean();
    rec.wall_time = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - start)
                        .count();
    if (keep_history) out.policy_history.push_back(out.policy.params());
    out.curve.push_back(rec);
    if (on_iteration) on_iteration(rec);
  }
  return out;
}

SampleStats Summarize(const std::vector<double>& xs) {
  SampleStats s;
  s.n = static_cast<long>(xs.size());
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

EvalReport MakeReport(const std::vector<EpisodeOutcome>& episodes) {
  EvalReport r;
  r.n_trials = static_cast<int>(episodes.size());
  std::vector<double> times, approach, insert;
  for (const EpisodeOutcome& e : episodes) {
    switch (e.status) {
      case Status::kSuccess:
        ++r.successes;
        times.push_back(e.duration);
        if (e.first_contact_time) {
          approach.push_back(*e.first_contact_time);
          insert.push_back(e.duration - *e.first_contact_time);
        }
        break;
      case Status::kViolationForce:
        ++r.fail_force;
        break;
      case Status::kViolationTorque:
        ++r.fail_torque;
        break;
      case Status::kTimeout:
      case Status::kRunning:
        ++r.fail_timeout;
        break;
    }
    r.insert_force_norms.insert(r.insert_force_norms.end(),
                                e.insert_force_norms.begin(),
                                e.insert_force_norms.end());
    r.insert_torque_norms.insert(r.insert_torque_norms.end(),
                                 e.insert_torque_norms.begin(),
                                 e.insert_torque_norms.end());
  }
  r.episodes = episodes;
  if (r.n_trials > 0) {
    r.success_rate = static_cast<double>(r.successes) / r.n_trials;
  }
  const int failures = r.n_trials - r.successes;
  if (failures > 0) {
    r.fail_force_pct = 100.0 * r.fail_force / failures;
    r.fail_torque_pct = 100.0 * r.fail_torque / failures;
    r.fail_timeout_pct = 100.0 * r.fail_timeout / failures;
  }
  r.completion_time = Summarize(times);
  r.approach_duration = Summarize(approach);
  r.insert_duration = Summarize(insert);
  return r;
}

std::string CheckSafety(const std::vector<StepRecord>& log,
                        const EnvParams& params) {
  for (size_t i = 0; i < log.size(); ++i) {
    const StepRecord& s = log[i];
    const bool last = i + 1 == log.size();
    if (s.status != Status::kRunning && !last) {
      return "step " + std::to_string(i + 1) + " follows terminal status " +
             std::string(StatusName(s.status));
    }
    const bool over = s.wrench.ForceNorm() > params.f_max ||
                      std::abs(s.wrench.ty) > params.t_max;
    if (over && !last) {
      return "over-limit wrench at non-terminal step " + std::to_string(i);
    }
    if (over && !IsViolation(s.status)) {
      return "over-limit wrench without a violation status at step " +
             std::to_string(i);
    }
  }
  return {};
}

EvalReport Evaluate(const TrainConfig& config, Assistant& assistant,
                    const std::vector<std::uint64_t>& seeds,
                    const EpisodeLogSink& sink) {
  if (seeds.empty()) throw DomainError("evaluation needs at least one trial");
  InsertionEnv env(config.env, config.geometry);
  std::vector<EpisodeOutcome> outcomes;
  outcomes.reserve(seeds.size());
  std::vector<StepRecord> log;
  for (std::uint64_t s : seeds) {
    log.clear();
    outcomes.push_back(RunEpisode(env, config.human, assistant, s,
                                  sink ? &log : nullptr));
    if (sink) sink(outcomes.back(), log);
  }
  return MakeReport(outcomes);
}

std::vector<std::uint64_t> EvalSeeds(std::uint64_t base, int n) {
  std::vector<std::uint64_t> out;
  for (int i = 0; i < n; ++i) {
    out.push_back(DeriveSeed(base, kEvalStream, static_cast<std::uint64_t>(i)));
  }
  return out;
}

}  // namespace coinsert
