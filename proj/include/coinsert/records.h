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

#ifndef COINSERT_RECORDS_H_
#define COINSERT_RECORDS_H_

#include <ostream>
#include <string>

#include "coinsert/episode.h"
#include "coinsert/harness.h"
#include "coinsert/stats.h"

namespace coinsert {

// Line-delimited JSON records. Every record is one object on one line with
// a "record" field naming its kind. Units: seconds, meters, radians,
// newtons, newton-meters.
//
//   step:    episode seed, t, pose[4], twist[4], wrench[4], reward, status,
//            contact
//   episode: seed, status, duration, first_contact_time|null, return, steps
//   curve:   iteration, mean_return, success_fraction, delta, wall_time,
//            samples, mean_ratio, value_loss, guide_objective, policy_std
//   report:  label, n_trials, successes, success_rate, completion_time
//            {n,mean,std}, failures {force,torque,timeout} with percentages,
//            approach/insert duration stats, inserting-phase norm counts
//   test:    label, statistic, alternative, n_a, n_b, u, p, exact
std::string StepRecordJson(std::uint64_t seed, const StepRecord& s);
std::string EpisodeRecordJson(const EpisodeOutcome& e);
std::string CurveRecordJson(const LearningCurveRecord& r);
std::string ReportRecordJson(const std::string& label, const EvalReport& r);
std::string TestRecordJson(const std::string& label,
                           const std::string& statistic, Alternative alt,
                           size_t n_a, size_t n_b,
                           const MannWhitneyResult& result);

// Human-readable table row: label, success rate, time, failure causes.
std::string ReportSummaryLine(const std::string& label, const EvalReport& r);

// Demonstration set as text: header "coinsert-demos 1 <pairs>" and then one
// line per pair with 12 observation and 4 action values.
void WriteDemos(const DemoDataset& demos, std::ostream& os);
DemoDataset ReadDemos(std::istream& is);

}  // namespace coinsert

#endif  // COINSERT_RECORDS_H_
