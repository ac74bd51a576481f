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

#include "coinsert/checkpoint.h"

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace coinsert {
namespace {

void WriteLayers(std::ostream& os, const char* key, const Mlp& net) {
  os << key << ' ' << net.layer_sizes().size();
  for (int s : net.layer_sizes()) os << ' ' << s;
  os << '\n';
}

void WriteParams(std::ostream& os, const char* key, const Vector& p) {
  os << key << ' ' << p.size() << '\n';
  for (Eigen::Index i = 0; i < p.size(); ++i) os << p[i] << '\n';
}

class Reader {
 public:
  explicit Reader(std::istream& is) : is_(is) {}

  void Expect(const std::string& key) {
    std::string word;
    if (!(is_ >> word) || word != key) {
      throw ConfigError("checkpoint: expected '" + key + "', found '" + word +
                        "'");
    }
  }

  template <typename T>
  T Read(const char* what) {
    T v{};
    if (!(is_ >> v)) throw ConfigError(std::string("checkpoint: bad ") + what);
    return v;
  }

  std::vector<int> Layers(const std::string& key) {
    Expect(key);
    const long n = Read<long>("layer count");
    if (n < 2 || n > 64) throw ConfigError("checkpoint: bad layer count");
    std::vector<int> sizes;
    for (long i = 0; i < n; ++i) sizes.push_back(Read<int>("layer size"));
    return sizes;
  }

  Vector Params(const std::string& key, Eigen::Index expected) {
    Expect(key);
    const long n = Read<long>("parameter count");
    if (n != expected) {
      throw ConfigError("checkpoint: " + key + " has " + std::to_string(n) +
                        " values, architecture needs " +
                        std::to_string(expected));
    }
    Vector p(n);
    for (long i = 0; i < n; ++i) p[i] = Read<double>("parameter value");
    if (!p.allFinite()) throw ConfigError("checkpoint: non-finite parameter");
    return p;
  }

  ObsVector Fixed12(const std::string& key) {
    Expect(key);
    if (Read<int>("vector size") != kObsDim) {
      throw ConfigError("checkpoint: " + key + " must have 12 entries");
    }
    ObsVector v;
    for (int i = 0; i < kObsDim; ++i) v[i] = Read<double>(key.c_str());
    return v;
  }

  std::istream& stream() { return is_; }

 private:
  std::istream& is_;
};

PgppoConfig ArchitectureFor(const std::vector<int>& sizes, int out_dim,
                            double log_std_min, double log_std_max) {
  if (sizes.front() != kObsDim || sizes.back() != out_dim) {
    throw ConfigError("checkpoint: network input/output sizes do not match");
  }
  PgppoConfig c;
  c.hidden.assign(sizes.begin() + 1, sizes.end() - 1);
  c.log_std_min = log_std_min;
  c.log_std_max = log_std_max;
  c.init_log_std = log_std_min;
  return c;
}

}  // namespace

void WriteCheckpoint(const Checkpoint& ckpt, std::ostream& os) {
  os << std::setprecision(17);
  os << "coinsert-checkpoint " << kCheckpointVersion << '\n';
  os << "mode " << GuidanceModeName(ckpt.mode) << '\n';
  os << "seed " << ckpt.seed << '\n';
  os << "iterations " << ckpt.iterations << '\n';
  WriteLayers(os, "policy_layers", ckpt.policy.mean_net());
  os << "log_std_bounds " << ckpt.policy.log_std_min() << ' '
     << ckpt.policy.log_std_max() << '\n';
  WriteParams(os, "policy_params", ckpt.policy.params());
  WriteLayers(os, "value_layers", ckpt.value.net());
  WriteParams(os, "value_params", ckpt.value.net().params());
  os << "obs_center " << kObsDim;
  for (int i = 0; i < kObsDim; ++i) os << ' ' << ckpt.normalizer.center()[i];
  os << "\nobs_scale " << kObsDim;
  for (int i = 0; i < kObsDim; ++i) os << ' ' << ckpt.normalizer.scale()[i];
  os << "\nlimits " << ckpt.limits.v_max << ' ' << ckpt.limits.w_max << '\n';
  os << "rng " << ckpt.rng << '\n';
  os << "end\n";
}

Checkpoint ReadCheckpoint(std::istream& is) {
  Reader r(is);
  Checkpoint c;
  r.Expect("coinsert-checkpoint");
  const int version = r.Read<int>("version");
  if (version != kCheckpointVersion) {
    throw ConfigError("checkpoint: unsupported version " +
                      std::to_string(version));
  }
  r.Expect("mode");
  c.mode = GuidanceModeFromName(r.Read<std::string>("mode"));
  r.Expect("seed");
  c.seed = r.Read<std::uint64_t>("seed");
  r.Expect("iterations");
  c.iterations = r.Read<int>("iterations");

  const std::vector<int> policy_layers = r.Layers("policy_layers");
  r.Expect("log_std_bounds");
  const double lo = r.Read<double>("log-std bound");
  const double hi = r.Read<double>("log-std bound");
  const PgppoConfig pc = ArchitectureFor(policy_layers, kActDim, lo, hi);
  pc.Validate();
  c.policy = GaussianPolicy(pc);
  c.policy.set_params(r.Params("policy_params", c.policy.num_params()));

  const std::vector<int> value_layers = r.Layers("value_layers");
  c.value = ValueFunction(ArchitectureFor(value_layers, 1, lo, hi));
  c.value.mutable_net().mutable_params() =
      r.Params("value_params", c.value.net().num_params());

  const ObsVector center = r.Fixed12("obs_center");
  const ObsVector scale = r.Fixed12("obs_scale");
  c.normalizer.Set(center, scale);
  r.Expect("limits");
  c.limits.v_max = r.Read<double>("v_max");
  c.limits.w_max = r.Read<double>("w_max");
  r.Expect("rng");
  if (!(is >> c.rng)) throw ConfigError("checkpoint: bad rng state");
  r.Expect("end");
  return c;
}

void SaveCheckpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write checkpoint '" + path + "'");
  WriteCheckpoint(ckpt, os);
  if (!os) throw ConfigError("failed writing checkpoint '" + path + "'");
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open checkpoint '" + path + "'");
  return ReadCheckpoint(is);
}

}  // namespace coinsert
