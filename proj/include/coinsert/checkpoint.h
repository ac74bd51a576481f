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

#ifndef COINSERT_CHECKPOINT_H_
#define COINSERT_CHECKPOINT_H_

#include <cstdint>
#include <iosfwd>
#include <string>

#include "coinsert/pgppo.h"
#include "coinsert/sim.h"

namespace coinsert {

inline constexpr int kCheckpointVersion = 1;

// Trained policy plus everything needed to run it on raw observations.
//
// Text layout, one whitespace-separated record per line:
//   coinsert-checkpoint <version>
//   mode <none|guide|demos|both>
//   seed <u64>
//   iterations <int>
//   policy_layers <count> <size>...
//   log_std_bounds <min> <max>
//   policy_params <n>          followed by n values, one per line
//   value_layers <count> <size>...
//   value_params <n>           followed by n values, one per line
//   obs_center 12 <values>
//   obs_scale 12 <values>
//   limits <v_max> <w_max>
//   rng <mt19937_64 state words>
//   end
// Reals are written with 17 significant digits, so a round trip is exact.
struct Checkpoint {
  GaussianPolicy policy;
  ValueFunction value;
  ObservationNormalizer normalizer;
  VelocityLimits limits;
  Rng rng;
  GuidanceMode mode = GuidanceMode::kNone;
  std::uint64_t seed = 0;
  int iterations = 0;
};

void WriteCheckpoint(const Checkpoint& ckpt, std::ostream& os);
// Throws ConfigError on any malformed or inconsistent content.
Checkpoint ReadCheckpoint(std::istream& is);

void SaveCheckpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint LoadCheckpoint(const std::string& path);

}  // namespace coinsert

#endif  // COINSERT_CHECKPOINT_H_
