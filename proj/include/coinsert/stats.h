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

#ifndef COINSERT_STATS_H_
#define COINSERT_STATS_H_

#include <string_view>
#include <vector>

namespace coinsert {

enum class Alternative { kALess, kAGreater, kTwoSided };

std::string_view AlternativeName(Alternative alt);

struct MannWhitneyResult {
  double u = 0.0;  // U statistic of sample a (midranks for ties)
  double p = 1.0;
  bool exact = false;
};

// Largest pooled size for which the p-value is enumerated exactly.
inline constexpr int kMannWhitneyExactMax = 12;

// Rank-sum test. Small samples enumerate every split of the pooled midranks;
// larger ones use the normal approximation with tie and continuity
// corrections. kALess tests whether a tends to be smaller than b. Throws
// DomainError on an empty or non-finite sample.
MannWhitneyResult MannWhitneyU(const std::vector<double>& a,
                               const std::vector<double>& b,
                               Alternative alternative);

// Midranks (1-based) of the values.
std::vector<double> MidRanks(const std::vector<double>& values);

double NormalCdf(double z);

}  // namespace coinsert

#endif  // COINSERT_STATS_H_
