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

#include "coinsert/records.h"

#include <cstdio>
#include <iomanip>
#include <istream>

#include "json.hpp"

namespace coinsert {
namespace {

using nlohmann::json;

json Array(const Vec4& v) { return json::array({v[0], v[1], v[2], v[3]}); }

json Stats(const SampleStats& s) {
  return json{{"n", s.n}, {"mean", s.mean}, {"std", s.stddev}};
}

}  // namespace

std::string StepRecordJson(std::uint64_t seed, const StepRecord& s) {
  return json{{"record", "step"},
              {"seed", seed},
              {"t", s.time},
              {"pose", Array(s.pose.AsVector())},
              {"twist", Array(s.twist.AsVector())},
              {"wrench", Array(s.wrench.AsVector())},
              {"reward", s.reward},
              {"status", StatusName(s.status)},
              {"contact", s.in_contact}}
      .dump();
}

std::string EpisodeRecordJson(const EpisodeOutcome& e) {
  json j{{"record", "episode"},
         {"seed", e.seed},
         {"status", StatusName(e.status)},
         {"duration", e.duration},
         {"return", e.episode_return},
         {"steps", e.steps}};
  j["first_contact_time"] =
      e.first_contact_time ? json(*e.first_contact_time) : json(nullptr);
  return j.dump();
}

std::string CurveRecordJson(const LearningCurveRecord& r) {
  return json{{"record", "curve"},
              {"iteration", r.iteration},
              {"mean_return", r.mean_return},
              {"success_fraction", r.success_fraction},
              {"delta", r.delta},
              {"wall_time", r.wall_time},
              {"samples", r.samples},
              {"mean_ratio", r.mean_ratio},
              {"value_loss", r.value_loss},
              {"guide_objective", r.guide_objective},
              {"policy_std", r.policy_std},
              {"approx_kl", r.approx_kl},
              {"ppo_updates", r.ppo_updates},
              {"ppo_aborted", r.ppo_aborted}}
      .dump();
}

std::string ReportRecordJson(const std::string& label, const EvalReport& r) {
  return json{
      {"record", "report"},
      {"label", label},
      {"n_trials", r.n_trials},
      {"successes", r.successes},
      {"success_rate", r.success_rate},
      {"completion_time", Stats(r.completion_time)},
      {"failures",
       {{"force", r.fail_force},
        {"torque", r.fail_torque},
        {"timeout", r.fail_timeout},
        {"force_pct", r.fail_force_pct},
        {"torque_pct", r.fail_torque_pct},
        {"timeout_pct", r.fail_timeout_pct}}},
      {"approach_duration", Stats(r.approach_duration)},
      {"insert_duration", Stats(r.insert_duration)},
      {"insert_force_samples", r.insert_force_norms.size()},
      {"insert_torque_samples", r.insert_torque_norms.size()}}
      .dump();
}

std::string TestRecordJson(const std::string& label,
                           const std::string& statistic, Alternative alt,
                           size_t n_a, size_t n_b,
                           const MannWhitneyResult& result) {
  return json{{"record", "test"},
              {"label", label},
              {"statistic", statistic},
              {"alternative", AlternativeName(alt)},
              {"n_a", n_a},
              {"n_b", n_b},
              {"u", result.u},
              {"p", result.p},
              {"exact", result.exact}}
      .dump();
}

std::string ReportSummaryLine(const std::string& label, const EvalReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "%-12s S.R. %5.1f%%  time %6.2f +- %5.2f s  "
                "failures: force %d, torque %d, timeout %d",
                label.c_str(), 100.0 * r.success_rate, r.completion_time.mean,
                r.completion_time.stddev, r.fail_force, r.fail_torque,
                r.fail_timeout);
  return buf;
}

void WriteDemos(const DemoDataset& demos, std::ostream& os) {
  os << std::setprecision(17);
  os << "coinsert-demos 1 " << demos.size() << ' ' << demos.attempts << ' '
     << demos.episode_seeds.size();
  for (std::uint64_t s : demos.episode_seeds) os << ' ' << s;
  os << '\n';
  for (Eigen::Index i = 0; i < demos.size(); ++i) {
    for (int r = 0; r < kObsDim; ++r) os << demos.obs(r, i) << ' ';
    for (int r = 0; r < kActDim; ++r) {
      os << demos.actions(r, i) << (r + 1 < kActDim ? ' ' : '\n');
    }
  }
}

DemoDataset ReadDemos(std::istream& is) {
  std::string magic;
  int version = 0;
  long n = 0;
  size_t n_seeds = 0;
  DemoDataset d;
  if (!(is >> magic >> version >> n >> d.attempts >> n_seeds) ||
      magic != "coinsert-demos" || version != 1 || n < 0) {
    throw ConfigError("not a version-1 demonstration file");
  }
  d.episode_seeds.resize(n_seeds);
  for (auto& s : d.episode_seeds) {
    if (!(is >> s)) throw ConfigError("truncated demonstration header");
  }
  d.obs.resize(kObsDim, n);
  d.actions.resize(kActDim, n);
  for (long i = 0; i < n; ++i) {
    for (int r = 0; r < kObsDim; ++r) is >> d.obs(r, i);
    for (int r = 0; r < kActDim; ++r) is >> d.actions(r, i);
    if (!is) throw ConfigError("truncated demonstration data");
  }
  return d;
}

}  // namespace coinsert
