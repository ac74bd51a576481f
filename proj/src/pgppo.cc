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

#include "coinsert/pgppo.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace coinsert {
namespace {

constexpr double kLog2Pi = 1.8378770664093453;

Matrix Columns(const Matrix& m, const std::vector<Eigen::Index>& idx) {
  return m(Eigen::all, idx);
}

Vector Entries(const Vector& v, const std::vector<Eigen::Index>& idx) {
  return v(idx);
}

}  // namespace

std::string_view GuidanceModeName(GuidanceMode mode) {
  switch (mode) {
    case GuidanceMode::kNone:
      return "none";
    case GuidanceMode::kGuidePolicy:
      return "guide";
    case GuidanceMode::kDemos:
      return "demos";
    case GuidanceMode::kBoth:
      return "both";
  }
  return "none";
}

GuidanceMode GuidanceModeFromName(std::string_view name) {
  for (GuidanceMode m : {GuidanceMode::kNone, GuidanceMode::kGuidePolicy,
                         GuidanceMode::kDemos, GuidanceMode::kBoth}) {
    if (GuidanceModeName(m) == name) return m;
  }
  throw ConfigError("unknown guidance mode '" + std::string(name) +
                    "' (expected none, guide, demos or both)");
}

void GuidanceConfig::Validate() const {
  if (!(delta >= 0.0)) throw ConfigError("guidance delta must be >= 0");
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ConfigError("guidance alpha must lie in [0, 1]");
  }
  if (decay_start < 0) throw ConfigError("guidance decay_start must be >= 0");
  if (!(delta_floor >= 0.0)) throw ConfigError("delta_floor must be >= 0");
}

void PgppoConfig::Validate() const {
  if (hidden.empty()) throw ConfigError("policy needs a hidden layer");
  for (int h : hidden) {
    if (h <= 0) throw ConfigError("hidden sizes must be positive");
  }
  if (!(log_std_min < log_std_max)) throw ConfigError("bad log-std bounds");
  if (!(policy_lr > 0.0) || !(value_lr > 0.0)) {
    throw ConfigError("learning rates must be positive");
  }
  if (epochs < 1 || guidance_epochs < 0 || minibatch < 1) {
    throw ConfigError("epochs and minibatch must be positive");
  }
  if (!(gamma > 0.0 && gamma <= 1.0) || !(lambda >= 0.0 && lambda <= 1.0)) {
    throw ConfigError("gamma must lie in (0, 1] and lambda in [0, 1]");
  }
  if (!(discount_interval > 0.0)) {
    throw ConfigError("discount_interval must be positive");
  }
  if (!(clip_epsilon > 0.0)) throw ConfigError("clip epsilon must be > 0");
  if (!(target_kl >= 0.0)) throw ConfigError("target_kl must be >= 0");
}

Vec4 ActionScale(const VelocityLimits& limits) {
  return {limits.v_max, limits.v_max, limits.v_max, limits.w_max};
}

Vec4 NormalizeAction(const Twist4& t, const VelocityLimits& limits) {
  return t.AsVector().cwiseQuotient(ActionScale(limits));
}

Twist4 DenormalizeAction(const Vec4& u, const VelocityLimits& limits) {
  return Twist4::FromVector(u.cwiseProduct(ActionScale(limits)));
}

Adam::Adam(Eigen::Index n, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps),
      m_(Vector::Zero(n)), v_(Vector::Zero(n)) {}

void Adam::Ascend(Vector* params, const Vector& grad) {
  Update(params, grad, 1.0);
}

void Adam::Descend(Vector* params, const Vector& grad) {
  Update(params, grad, -1.0);
}

void Adam::Update(Vector* params, const Vector& grad, double sign) {
  if (m_.size() != params->size()) {
    m_ = Vector::Zero(params->size());
    v_ = Vector::Zero(params->size());
  }
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const double step = lr_ * std::sqrt(c2) / c1;
  params->array() +=
      sign * step * m_.array() / (v_.array().sqrt() + eps_ * std::sqrt(c2));
}

double GaussianLogProb(const Vec4& action, const Vec4& mean,
                       const Vec4& log_std) {
  const Vec4 z = (action - mean).cwiseQuotient(log_std.array().exp().matrix());
  return -0.5 * z.squaredNorm() - log_std.sum() - 0.5 * kActDim * kLog2Pi;
}

GaussianPolicy::GaussianPolicy(const PgppoConfig& config)
    : log_std_(Vec4::Constant(config.init_log_std)),
      log_std_min_(config.log_std_min),
      log_std_max_(config.log_std_max) {
  std::vector<int> sizes{kObsDim};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(kActDim);
  mean_ = Mlp(sizes);
  ClampLogStd();
}

void GaussianPolicy::Initialize(Rng& rng) { mean_.Initialize(rng, 0.01); }

Vector GaussianPolicy::params() const {
  Vector p(num_params());
  p << mean_.params(), log_std_;
  return p;
}

void GaussianPolicy::set_params(const Vector& p) {
  if (p.size() != num_params()) throw ConfigError("policy parameter size");
  mean_.mutable_params() = p.head(mean_.num_params());
  log_std_ = p.tail<kActDim>();
}

void GaussianPolicy::ClampLogStd() {
  log_std_ = log_std_.cwiseMax(log_std_min_).cwiseMin(log_std_max_);
}

Vec4 GaussianPolicy::Mean(const ObsVector& obs) const {
  return mean_.Forward(Matrix(obs));
}

ActionSample GaussianPolicy::Sample(const ObsVector& obs, Rng& rng) const {
  const Vec4 mu = Mean(obs);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec4 eps;
  for (int i = 0; i < kActDim; ++i) eps[i] = normal(rng);
  ActionSample s;
  s.action = mu + log_std_.array().exp().matrix().cwiseProduct(eps);
  s.logprob = GaussianLogProb(s.action, mu, log_std_);
  return s;
}

Vector GaussianPolicy::LogProb(const Matrix& obs, const Matrix& actions) const {
  const Matrix mu = mean_.Forward(obs);
  const Vec4 inv_std = (-log_std_).array().exp();
  const Matrix z = (actions - mu).array().colwise() * inv_std.array();
  const double c = -log_std_.sum() - 0.5 * kActDim * kLog2Pi;
  return (-0.5 * z.colwise().squaredNorm().array() + c).matrix().transpose();
}

Vector GaussianPolicy::LogProb(const Matrix& obs, const Matrix& actions,
                               const Vector& coef, Vector* grad) const {
  if (grad->size() != num_params()) *grad = Vector::Zero(num_params());
  Mlp::Cache cache;
  const Matrix mu = mean_.Forward(obs, &cache);
  const Vec4 inv_std = (-log_std_).array().exp();
  const Matrix z = (actions - mu).array().colwise() * inv_std.array();
  const double c = -log_std_.sum() - 0.5 * kActDim * kLog2Pi;
  // d logp / d mu = z / sigma ; d logp / d log_std = z^2 - 1.
  Matrix dmu = z.array().colwise() * inv_std.array();
  dmu.array().rowwise() *= coef.transpose().array();
  Vector mean_grad = grad->head(mean_.num_params());
  mean_.Backward(cache, dmu, &mean_grad);
  grad->head(mean_.num_params()) = mean_grad;
  const Matrix dls = z.array().square() - 1.0;
  grad->tail<kActDim>() += dls * coef;
  return (-0.5 * z.colwise().squaredNorm().array() + c).matrix().transpose();
}

ValueFunction::ValueFunction(const PgppoConfig& config) {
  std::vector<int> sizes{kObsDim};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(1);
  net_ = Mlp(sizes);
}

void ValueFunction::Initialize(Rng& rng) { net_.Initialize(rng, 1.0); }

double ValueFunction::Predict(const ObsVector& obs) const {
  return net_.Forward(Matrix(obs))(0, 0);
}

Vector ValueFunction::Predict(const Matrix& obs) const {
  return net_.Forward(obs).row(0).transpose();
}

double ValueFunction::Loss(const Matrix& obs, const Vector& targets,
                           Vector* grad) const {
  const double n = static_cast<double>(obs.cols());
  if (!grad) {
    return (Predict(obs) - targets).squaredNorm() / n;
  }
  Mlp::Cache cache;
  const Matrix v = net_.Forward(obs, &cache);
  const Vector err = v.row(0).transpose() - targets;
  const Matrix dout = (2.0 / n) * err.transpose();
  net_.Backward(cache, dout, grad);
  return err.squaredNorm() / n;
}

GaeResult ComputeGae(const Trajectory& traj, double gamma, double lambda) {
  const size_t n = traj.size();
  if (n == 0) throw DomainError("advantage estimation on an empty trajectory");
  if (traj.values.size() != n) {
    throw DomainError("trajectory values and rewards differ in length");
  }
  GaeResult out;
  out.advantages.resize(static_cast<Eigen::Index>(n));
  double next_value = traj.terminal ? 0.0 : traj.bootstrap_value;
  double gae = 0.0;
  for (size_t i = n; i-- > 0;) {
    const double delta = traj.rewards[i] + gamma * next_value - traj.values[i];
    gae = delta + gamma * lambda * gae;
    out.advantages[static_cast<Eigen::Index>(i)] = gae;
    next_value = traj.values[i];
  }
  out.returns = out.advantages +
                Eigen::Map<const Vector>(traj.values.data(),
                                         static_cast<Eigen::Index>(n));
  return out;
}

Batch MakeBatch(const std::vector<Trajectory>& trajs, double gamma,
                double lambda, bool with_guide) {
  Eigen::Index n = 0;
  for (const Trajectory& t : trajs) n += static_cast<Eigen::Index>(t.size());
  Batch b;
  b.obs.resize(kObsDim, n);
  b.actions.resize(kActDim, n);
  if (with_guide) b.guide_actions.resize(kActDim, n);
  b.logprobs.resize(n);
  b.advantages.resize(n);
  b.returns.resize(n);
  Eigen::Index col = 0;
  for (const Trajectory& t : trajs) {
    if (t.size() == 0) continue;
    const GaeResult g = ComputeGae(t, gamma, lambda);
    const Eigen::Index m = static_cast<Eigen::Index>(t.size());
    for (Eigen::Index i = 0; i < m; ++i) {
      b.obs.col(col + i) = t.obs[i];
      b.actions.col(col + i) = t.actions[i];
      if (with_guide) b.guide_actions.col(col + i) = t.guide_actions.at(i);
      b.logprobs[col + i] = t.logprobs[i];
    }
    b.advantages.segment(col, m) = g.advantages;
    b.returns.segment(col, m) = g.returns;
    col += m;
  }
  return b;
}

double ClippedSurrogate(double ratio, double advantage, double epsilon) {
  const double clipped = std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon);
  return std::min(ratio * advantage, clipped * advantage);
}

std::vector<std::vector<Eigen::Index>> Minibatches(Eigen::Index n, int size,
                                                   Rng& rng) {
  std::vector<Eigen::Index> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::vector<Eigen::Index>> out;
  for (Eigen::Index i = 0; i < n; i += size) {
    const Eigen::Index end = std::min<Eigen::Index>(n, i + size);
    out.emplace_back(perm.begin() + i, perm.begin() + end);
  }
  return out;
}

PpoStats PpoImprove(GaussianPolicy* policy, const Batch& batch,
                    const PgppoConfig& config, Adam* adam, Rng& rng) {
  PpoStats stats;
  const Eigen::Index n = batch.size();
  if (n == 0) return stats;
  const Vector start = policy->params();

  Vector adv = batch.advantages;
  const double mean = adv.mean();
  const double var =
      n > 1 ? (adv.array() - mean).square().sum() / static_cast<double>(n - 1)
            : 0.0;
  adv = (adv.array() - mean) / (std::sqrt(var) + 1e-8);

  const double eps = config.clip_epsilon;
  Vector params = start;
  for (int epoch = 0; epoch < config.epochs && !stats.early_stopped; ++epoch) {
    for (const auto& idx : Minibatches(n, config.minibatch, rng)) {
      const Matrix obs = Columns(batch.obs, idx);
      const Matrix act = Columns(batch.actions, idx);
      const Vector old_lp = Entries(batch.logprobs, idx);
      const Vector a = Entries(adv, idx);
      const double m = static_cast<double>(idx.size());

      const Vector lp = policy->LogProb(obs, act);
      const Vector ratio = (lp - old_lp).array().exp();
      if (config.target_kl > 0.0) {
        // Nonnegative estimator (r - 1) - log r of KL(old || new).
        const double kl =
            ((ratio.array() - 1.0) - (lp - old_lp).array()).mean();
        if (kl > 1.5 * config.target_kl) {
          stats.early_stopped = true;
          break;
        }
      }
      Vector coef(ratio.size());
      double surrogate = 0.0;
      for (Eigen::Index i = 0; i < ratio.size(); ++i) {
        const double r = ratio[i];
        surrogate += ClippedSurrogate(r, a[i], eps);
        const bool saturated =
            (a[i] >= 0.0 && r > 1.0 + eps) || (a[i] < 0.0 && r < 1.0 - eps);
        coef[i] = saturated ? 0.0 : r * a[i] / m;
      }
      Vector grad = Vector::Zero(policy->num_params());
      policy->LogProb(obs, act, coef, &grad);
      if (!std::isfinite(surrogate) || !grad.allFinite()) {
        policy->set_params(start);
        stats.aborted = true;
        stats.diagnostic = "non-finite surrogate or gradient in epoch " +
                           std::to_string(epoch);
        return stats;
      }
      adam->Ascend(&params, grad);
      policy->set_params(params);
      policy->ClampLogStd();
      params = policy->params();
      ++stats.updates;
    }
  }

  const Vector lp = policy->LogProb(batch.obs, batch.actions);
  const Vector ratio = (lp - batch.logprobs).array().exp();
  stats.approx_kl =
      ((ratio.array() - 1.0) - (lp - batch.logprobs).array()).mean();
  double surrogate = 0.0;
  Eigen::Index clipped = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    surrogate += ClippedSurrogate(ratio[i], adv[i], eps);
    if (std::abs(ratio[i] - 1.0) > eps) ++clipped;
  }
  stats.mean_ratio = ratio.mean();
  stats.surrogate = surrogate / static_cast<double>(n);
  stats.clip_fraction = static_cast<double>(clipped) / static_cast<double>(n);
  if (!std::isfinite(stats.surrogate) || !policy->params().allFinite()) {
    policy->set_params(start);
    stats.aborted = true;
    stats.diagnostic = "non-finite parameters after update";
  }
  return stats;
}

double GuidanceObjective(const GaussianPolicy& policy, const Matrix& obs,
                         const Matrix& actions, const Vector& ref_logprobs,
                         double delta, Vector* grad) {
  const Eigen::Index n = obs.cols();
  if (n == 0) return 0.0;
  const double cap = 1.0 + delta;
  const double inv_n = 1.0 / static_cast<double>(n);
  // The gradient coefficients depend on the ratios, so the gradient pass
  // runs after this one.
  const Vector lp = policy.LogProb(obs, actions);
  const Vector ratio = (lp - ref_logprobs).array().exp();
  double total = 0.0;
  Vector coef(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    total += std::min(ratio[i], cap);
    coef[i] = ratio[i] < cap ? ratio[i] * inv_n : 0.0;
  }
  if (grad) policy.LogProb(obs, actions, coef, grad);
  return total * inv_n;
}

double GuidanceModeObjective(const GaussianPolicy& policy,
                             const GuidanceData& data, const Vector& ref_f,
                             const Vector& ref_g, GuidanceMode mode,
                             double delta, Vector* grad) {
  double total = 0.0;
  if (UsesGuidePolicy(mode)) {
    total += GuidanceObjective(policy, data.rollout_obs, data.rollout_guide,
                               ref_f, delta, grad);
  }
  if (UsesDemos(mode)) {
    total += GuidanceObjective(policy, data.demo_obs, data.demo_actions, ref_g,
                               delta, grad);
  }
  return total;
}

GuidanceStats GuidanceStep(GaussianPolicy* policy, const GuidanceData& data,
                           GuidanceMode mode, double delta,
                           const PgppoConfig& config, Adam* adam, Rng& rng) {
  GuidanceStats stats;
  if (mode == GuidanceMode::kNone) return stats;
  const bool use_f = UsesGuidePolicy(mode);
  const bool use_g = UsesDemos(mode);
  if (use_g && data.demo_obs.cols() == 0) {
    throw ConfigError("guidance mode '" + std::string(GuidanceModeName(mode)) +
                      "' needs a non-empty demonstration set");
  }
  if (use_f && data.rollout_obs.cols() == 0) return stats;

  // Reference probabilities are those of the policy handed in. They are
  // evaluated on each minibatch exactly as the objective evaluates the
  // current policy, so the ratios start at exactly one.
  const GaussianPolicy reference = *policy;

  Vector params = policy->params();
  for (int epoch = 0; epoch < config.guidance_epochs; ++epoch) {
    std::vector<std::vector<Eigen::Index>> mb_f, mb_g;
    if (use_f) mb_f = Minibatches(data.rollout_obs.cols(), config.minibatch, rng);
    if (use_g) mb_g = Minibatches(data.demo_obs.cols(), config.minibatch, rng);
    const size_t steps = std::max(mb_f.size(), mb_g.size());
    for (size_t j = 0; j < steps; ++j) {
      GuidanceData mb;
      Vector mb_ref_f, mb_ref_g;
      if (use_f) {
        const auto& idx = mb_f[j % mb_f.size()];
        mb.rollout_obs = Columns(data.rollout_obs, idx);
        mb.rollout_guide = Columns(data.rollout_guide, idx);
        mb_ref_f = reference.LogProb(mb.rollout_obs, mb.rollout_guide);
      }
      if (use_g) {
        const auto& idx = mb_g[j % mb_g.size()];
        mb.demo_obs = Columns(data.demo_obs, idx);
        mb.demo_actions = Columns(data.demo_actions, idx);
        mb_ref_g = reference.LogProb(mb.demo_obs, mb.demo_actions);
      }
      Vector grad = Vector::Zero(policy->num_params());
      GuidanceModeObjective(*policy, mb, mb_ref_f, mb_ref_g, mode, delta,
                            &grad);
      if (!grad.allFinite()) {
        throw DomainError("non-finite gradient in the guidance step");
      }
      adam->Ascend(&params, grad);
      policy->set_params(params);
      policy->ClampLogStd();
      params = policy->params();
      ++stats.updates;
    }
  }
  if (use_f) {
    stats.objective_f = GuidanceObjective(
        *policy, data.rollout_obs, data.rollout_guide,
        reference.LogProb(data.rollout_obs, data.rollout_guide), delta,
        nullptr);
  }
  if (use_g) {
    stats.objective_g = GuidanceObjective(
        *policy, data.demo_obs, data.demo_actions,
        reference.LogProb(data.demo_obs, data.demo_actions), delta, nullptr);
  }
  return stats;
}

double ValueFit(ValueFunction* value, const Matrix& obs, const Vector& returns,
                const PgppoConfig& config, Adam* adam, Rng& rng) {
  const Eigen::Index n = obs.cols();
  if (n == 0) return 0.0;
  Vector& params = value->mutable_net().mutable_params();
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (const auto& idx : Minibatches(n, config.minibatch, rng)) {
      Vector grad = Vector::Zero(params.size());
      value->Loss(Columns(obs, idx), Entries(returns, idx), &grad);
      if (!grad.allFinite()) {
        throw DomainError("non-finite gradient in the value fit");
      }
      adam->Descend(&params, grad);
    }
  }
  return value->Loss(obs, returns, nullptr);
}

double DecayDelta(double delta, const GuidanceConfig& config, int k) {
  return k > config.decay_start ? config.alpha * delta : delta;
}

}  // namespace coinsert
