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

#ifndef COINSERT_PGPPO_H_
#define COINSERT_PGPPO_H_

#include <string>
#include <string_view>
#include <vector>

#include "coinsert/mlp.h"
#include "coinsert/sim.h"
#include "coinsert/types.h"

namespace coinsert {

enum class GuidanceMode { kNone, kGuidePolicy, kDemos, kBoth };

std::string_view GuidanceModeName(GuidanceMode mode);
// Accepts none, guide, demos, both. Throws ConfigError otherwise.
GuidanceMode GuidanceModeFromName(std::string_view name);

inline bool UsesGuidePolicy(GuidanceMode m) {
  return m == GuidanceMode::kGuidePolicy || m == GuidanceMode::kBoth;
}
inline bool UsesDemos(GuidanceMode m) {
  return m == GuidanceMode::kDemos || m == GuidanceMode::kBoth;
}

struct GuidanceConfig {
  double delta = 0.5;
  double alpha = 0.9;
  int decay_start = 20;     // K
  double delta_floor = 1e-3;  // guidance is skipped below this
  GuidanceMode mode = GuidanceMode::kBoth;

  void Validate() const;
};

struct PgppoConfig {
  std::vector<int> hidden{64, 64};
  double init_log_std = -1.2039728043259361;  // log(0.3)
  double log_std_min = -5.0;
  double log_std_max = 1.0;
  double policy_lr = 3e-4;
  double value_lr = 1e-3;
  int epochs = 10;
  int guidance_epochs = 5;
  int minibatch = 1280;  // 256 samples at a 10 ms step, rescaled to 2 ms
  double gamma = 0.99;
  double lambda = 0.95;
  // gamma and lambda apply per this many seconds; the per-step factors are
  // rescaled to the simulation step.
  double discount_interval = 0.01;
  double clip_epsilon = 0.2;
  // Stops the epochs once the minibatch estimate of KL(old || new) exceeds
  // 1.5 * target_kl. Zero disables the check.
  double target_kl = 0.02;

  void Validate() const;
};

// Commands are learned in units of the velocity limits.
Vec4 ActionScale(const VelocityLimits& limits);
Vec4 NormalizeAction(const Twist4& t, const VelocityLimits& limits);
Twist4 DenormalizeAction(const Vec4& u, const VelocityLimits& limits);

// Adaptive-moment optimizer over a flat parameter vector.
class Adam {
 public:
  Adam() = default;
  Adam(Eigen::Index n, double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);

  // params += step along +grad (ascent) or -grad (descent).
  void Ascend(Vector* params, const Vector& grad);
  void Descend(Vector* params, const Vector& grad);

  double lr() const { return lr_; }
  long steps() const { return t_; }

 private:
  void Update(Vector* params, const Vector& grad, double sign);

  double lr_ = 1e-3, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  long t_ = 0;
  Vector m_, v_;
};

struct ActionSample {
  Vec4 action;  // normalized units, unclamped
  double logprob = 0.0;
};

// Diagonal Gaussian with an MLP mean and a state-independent log-std.
// Flat parameters: mean network followed by the 4 log-stds.
class GaussianPolicy {
 public:
  GaussianPolicy() = default;
  explicit GaussianPolicy(const PgppoConfig& config);

  void Initialize(Rng& rng);

  Eigen::Index num_params() const { return mean_.num_params() + kActDim; }
  Vector params() const;
  void set_params(const Vector& p);
  const Mlp& mean_net() const { return mean_; }
  const Vec4& log_std() const { return log_std_; }
  void set_log_std(const Vec4& v) { log_std_ = v; }
  double log_std_min() const { return log_std_min_; }
  double log_std_max() const { return log_std_max_; }
  // Projects the log-stds back into [min, max].
  void ClampLogStd();

  Vec4 Mean(const ObsVector& obs) const;
  ActionSample Sample(const ObsVector& obs, Rng& rng) const;

  // Columns are samples.
  Vector LogProb(const Matrix& obs, const Matrix& actions) const;
  // Also accumulates into `grad` the gradient of sum_i coef_i * logprob_i.
  Vector LogProb(const Matrix& obs, const Matrix& actions,
                 const Vector& coef, Vector* grad) const;

 private:
  Mlp mean_;
  Vec4 log_std_ = Vec4::Zero();
  double log_std_min_ = -5.0, log_std_max_ = 1.0;
};

double GaussianLogProb(const Vec4& action, const Vec4& mean,
                       const Vec4& log_std);

class ValueFunction {
 public:
  ValueFunction() = default;
  explicit ValueFunction(const PgppoConfig& config);

  void Initialize(Rng& rng);
  const Mlp& net() const { return net_; }
  Mlp& mutable_net() { return net_; }

  double Predict(const ObsVector& obs) const;
  Vector Predict(const Matrix& obs) const;
  // Mean squared error against `targets`; accumulates its gradient when
  // `grad` is not null.
  double Loss(const Matrix& obs, const Vector& targets, Vector* grad) const;

 private:
  Mlp net_;
};

// One rollout, stored in network units.
struct Trajectory {
  std::vector<ObsVector> obs;
  std::vector<Vec4> actions;
  std::vector<Vec4> guide_actions;  // pi_H at each state, when requested
  std::vector<double> logprobs;
  std::vector<double> rewards;
  std::vector<double> values;
  // True when the last step reached a terminal state; false when the episode
  // was cut by the time limit, in which case bootstrap_value is V(s_T).
  bool terminal = true;
  double bootstrap_value = 0.0;
  Status status = Status::kRunning;
  double duration = 0.0;

  size_t size() const { return rewards.size(); }
};

struct GaeResult {
  Vector advantages;
  Vector returns;
};

// Backward generalized advantage recursion; returns = advantages + values.
GaeResult ComputeGae(const Trajectory& traj, double gamma, double lambda);

// Flattened optimization batch; columns are samples.
struct Batch {
  Matrix obs;
  Matrix actions;
  Matrix guide_actions;
  Vector logprobs;
  Vector advantages;
  Vector returns;

  Eigen::Index size() const { return obs.cols(); }
};

Batch MakeBatch(const std::vector<Trajectory>& trajs, double gamma,
                double lambda, bool with_guide);

// Per-sample clipped surrogate min(r A, clip(r, 1-eps, 1+eps) A).
double ClippedSurrogate(double ratio, double advantage, double epsilon);

struct PpoStats {
  double mean_ratio = 1.0;
  double surrogate = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  int updates = 0;
  bool early_stopped = false;
  bool aborted = false;
  std::string diagnostic;
};

// Minibatch ascent on the clipped surrogate with per-update advantage
// normalization and the target_kl early stop. A non-finite loss or gradient restores the incoming
// parameters and reports aborted.
PpoStats PpoImprove(GaussianPolicy* policy, const Batch& batch,
                    const PgppoConfig& config, Adam* adam, Rng& rng);

// Guide-ratio objective mean_i min(pi(a_i|s_i) / pi_ref(a_i|s_i), 1 + delta)
// with pi_ref given by `ref_logprobs`. Accumulates its gradient when `grad`
// is not null.
double GuidanceObjective(const GaussianPolicy& policy, const Matrix& obs,
                         const Matrix& actions, const Vector& ref_logprobs,
                         double delta, Vector* grad);

// States and guide actions for the guidance step.
struct GuidanceData {
  Matrix rollout_obs;      // F: states visited by the current policy
  Matrix rollout_guide;    //    pi_H at those states
  Matrix demo_obs;         // G: demonstration pairs
  Matrix demo_actions;
};

// E[F], E[G] or E[F] + E[G] over the whole of `data` for the mode, with
// reference log-probabilities `ref_f` (rollout) and `ref_g` (demos).
// Accumulates its gradient when `grad` is not null.
double GuidanceModeObjective(const GaussianPolicy& policy,
                             const GuidanceData& data, const Vector& ref_f,
                             const Vector& ref_g, GuidanceMode mode,
                             double delta, Vector* grad);

struct GuidanceStats {
  double objective_f = 0.0;
  double objective_g = 0.0;
  int updates = 0;
};

// Ascent on E[F], E[G] or E[F + G] according to the mode, relative to the
// policy passed in. Throws ConfigError when the mode needs demos and none
// were given.
GuidanceStats GuidanceStep(GaussianPolicy* policy, const GuidanceData& data,
                           GuidanceMode mode, double delta,
                           const PgppoConfig& config, Adam* adam, Rng& rng);

// Minibatch descent on the squared error to the returns; returns the final
// full-batch loss.
double ValueFit(ValueFunction* value, const Matrix& obs, const Vector& returns,
                const PgppoConfig& config, Adam* adam, Rng& rng);

// delta * alpha when k > decay_start, delta otherwise.
double DecayDelta(double delta, const GuidanceConfig& config, int k);

// Random minibatch partition of [0, n).
std::vector<std::vector<Eigen::Index>> Minibatches(Eigen::Index n, int size,
                                                   Rng& rng);

}  // namespace coinsert

#endif  // COINSERT_PGPPO_H_
