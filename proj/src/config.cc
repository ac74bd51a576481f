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

#include "coinsert/config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace coinsert {
namespace {

std::string Trim(const std::string& s) {
  const size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void GetInterval(ConfigFile& f, const std::string& prefix, Interval* out) {
  f.Get(prefix + "_min", &out->lo);
  f.Get(prefix + "_max", &out->hi);
}

}  // namespace

ConfigFile ConfigFile::Parse(std::istream& is, const std::string& source) {
  ConfigFile f;
  f.source_ = source;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    const std::string where = source + ":" + std::to_string(lineno);
    if (eq == std::string::npos) {
      throw ConfigError(where + ": expected 'key = value'");
    }
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (f.entries_.count(key)) {
      throw ConfigError(where + ": duplicate key '" + key + "'");
    }
    f.entries_[key] = Entry{value, where, false};
  }
  return f;
}

ConfigFile ConfigFile::Load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file '" + path + "'");
  return Parse(is, path);
}

void ConfigFile::Set(const std::string& key, const std::string& value) {
  entries_[key] = Entry{Trim(value), "override " + key, false};
}

void ConfigFile::SetAssignment(const std::string& assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override '" + assignment + "' is not key=value");
  }
  Set(Trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

ConfigFile::Entry* ConfigFile::Find(const std::string& key) {
  auto it = entries_.find(key);
  if (it == entries_.end()) return nullptr;
  it->second.used = true;
  return &it->second;
}

std::vector<double> ConfigFile::Numbers(const std::string& key,
                                        const Entry& e) const {
  std::vector<double> out;
  const char* p = e.value.data();
  const char* end = p + e.value.size();
  while (p < end) {
    while (p < end && (*p == ' ' || *p == '\t' || *p == ',')) ++p;
    if (p == end) break;
    double v = 0.0;
    auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc() || (next < end && *next != ' ' && *next != '\t' &&
                              *next != ',')) {
      throw ConfigError(e.where + ": '" + key + "' expects numbers, got '" +
                        e.value + "'");
    }
    if (!std::isfinite(v)) {
      throw ConfigError(e.where + ": '" + key + "' must be finite");
    }
    out.push_back(v);
    p = next;
  }
  return out;
}

void ConfigFile::Get(const std::string& key, double* out) {
  Entry* e = Find(key);
  if (!e) return;
  const std::vector<double> v = Numbers(key, *e);
  if (v.size() != 1) {
    throw ConfigError(e->where + ": '" + key + "' expects one number");
  }
  *out = v[0];
}

void ConfigFile::Get(const std::string& key, long* out) {
  Entry* e = Find(key);
  if (!e) return;
  long v = 0;
  const char* end = e->value.data() + e->value.size();
  auto [next, ec] = std::from_chars(e->value.data(), end, v);
  if (ec != std::errc() || next != end) {
    throw ConfigError(e->where + ": '" + key + "' expects an integer");
  }
  *out = v;
}

void ConfigFile::Get(const std::string& key, int* out) {
  long v = *out;
  Get(key, &v);
  if (v < INT32_MIN || v > INT32_MAX) {
    throw ConfigError("'" + key + "' is out of range");
  }
  *out = static_cast<int>(v);
}

void ConfigFile::Get(const std::string& key, std::uint64_t* out) {
  Entry* e = Find(key);
  if (!e) return;
  std::uint64_t v = 0;
  const char* end = e->value.data() + e->value.size();
  auto [next, ec] = std::from_chars(e->value.data(), end, v);
  if (ec != std::errc() || next != end) {
    throw ConfigError(e->where + ": '" + key +
                      "' expects a non-negative integer");
  }
  *out = v;
}

void ConfigFile::Get(const std::string& key, bool* out) {
  Entry* e = Find(key);
  if (!e) return;
  if (e->value == "true" || e->value == "1") {
    *out = true;
  } else if (e->value == "false" || e->value == "0") {
    *out = false;
  } else {
    throw ConfigError(e->where + ": '" + key + "' expects true or false");
  }
}

void ConfigFile::Get(const std::string& key, std::string* out) {
  Entry* e = Find(key);
  if (e) *out = e->value;
}

void ConfigFile::Get(const std::string& key, Vec3* out) {
  Entry* e = Find(key);
  if (!e) return;
  const std::vector<double> v = Numbers(key, *e);
  if (v.size() != 3) {
    throw ConfigError(e->where + ": '" + key + "' expects 3 numbers");
  }
  *out = Vec3(v[0], v[1], v[2]);
}

void ConfigFile::Get(const std::string& key, Vec4* out) {
  Entry* e = Find(key);
  if (!e) return;
  const std::vector<double> v = Numbers(key, *e);
  if (v.size() != 4) {
    throw ConfigError(e->where + ": '" + key + "' expects 4 numbers");
  }
  *out = Vec4(v[0], v[1], v[2], v[3]);
}

void ConfigFile::Get(const std::string& key, std::vector<int>* out) {
  Entry* e = Find(key);
  if (!e) return;
  std::vector<int> sizes;
  for (double d : Numbers(key, *e)) {
    if (d != std::floor(d)) {
      throw ConfigError(e->where + ": '" + key + "' expects integers");
    }
    sizes.push_back(static_cast<int>(d));
  }
  *out = sizes;
}

void ConfigFile::RequireAllUsed() const {
  std::string unknown;
  for (const auto& [key, e] : entries_) {
    if (e.used) continue;
    if (!unknown.empty()) unknown += ", ";
    unknown += "'" + key + "' (" + e.where + ")";
  }
  if (!unknown.empty()) throw ConfigError("unknown config keys: " + unknown);
}

void ApplyTrainConfig(ConfigFile& f, TrainConfig* c) {
  EnvParams& e = c->env;
  f.Get("env.dt", &e.dt);
  GetInterval(f, "env.k_board", &e.k_board);
  GetInterval(f, "env.k_frame", &e.k_frame);
  f.Get("env.c_contact", &e.c_contact);
  f.Get("env.contact_damping_ratio", &e.contact_damping_ratio);
  f.Get("env.f_max", &e.f_max);
  f.Get("env.t_max", &e.t_max);
  f.Get("env.omega1", &e.omega1);
  f.Get("env.omega2", &e.omega2);
  f.Get("env.kappa_success", &e.kappa_success);
  f.Get("env.kappa_violation", &e.kappa_violation);
  f.Get("env.timeout", &e.timeout);
  f.Get("env.force_noise_sigma", &e.force_noise_sigma);
  f.Get("env.torque_noise_sigma", &e.torque_noise_sigma);
  GetInterval(f, "env.start_x", &e.start_x);
  GetInterval(f, "env.start_y", &e.start_y);
  GetInterval(f, "env.start_z", &e.start_z);
  GetInterval(f, "env.start_theta", &e.start_theta);
  f.Get("env.board_mass", &e.board_mass);
  f.Get("env.vacuum_mass", &e.vacuum_mass);
  f.Get("env.v_max", &e.limits.v_max);
  f.Get("env.w_max", &e.limits.w_max);
  f.Get("env.max_start_retries", &e.max_start_retries);

  Geometry& g = c->geometry;
  f.Get("geometry.board_half_extents", &g.board_half_extents);
  f.Get("geometry.clearance", &g.clearance);
  f.Get("geometry.slot_depth", &g.slot_depth);
  f.Get("geometry.target_depth", &g.target_depth);
  f.Get("geometry.sensor_offset", &g.sensor_offset_board);
  f.Get("geometry.grasp_offset", &g.grasp_offset_board);
  Vec4 frame = g.frame_center.AsVector();
  f.Get("geometry.frame_center", &frame);
  g.frame_center = Pose4::FromVector(frame);

  HumanBounds& h = c->human;
  f.Get("human.damping_min", &h.damping_lo);
  f.Get("human.damping_max", &h.damping_hi);
  f.Get("human.stiffness_min", &h.stiffness_lo);
  f.Get("human.stiffness_max", &h.stiffness_hi);
  GetInterval(f, "human.plan_time", &h.plan_time);

  AdmittanceParams& a = c->admittance;
  f.Get("admittance.inertia", &a.inertia);
  f.Get("admittance.damping", &a.damping);
  f.Get("admittance.stiffness", &a.stiffness);
  a.limits = e.limits;

  PgppoConfig& p = c->pgppo;
  f.Get("pgppo.hidden", &p.hidden);
  double init_std = std::exp(p.init_log_std);
  f.Get("pgppo.init_std", &init_std);
  if (!(init_std > 0.0)) throw ConfigError("pgppo.init_std must be > 0");
  p.init_log_std = std::log(init_std);
  f.Get("pgppo.log_std_min", &p.log_std_min);
  f.Get("pgppo.log_std_max", &p.log_std_max);
  f.Get("pgppo.policy_lr", &p.policy_lr);
  f.Get("pgppo.value_lr", &p.value_lr);
  f.Get("pgppo.epochs", &p.epochs);
  f.Get("pgppo.guidance_epochs", &p.guidance_epochs);
  f.Get("pgppo.minibatch", &p.minibatch);
  f.Get("pgppo.gamma", &p.gamma);
  f.Get("pgppo.lambda", &p.lambda);
  f.Get("pgppo.discount_interval", &p.discount_interval);
  f.Get("pgppo.clip_epsilon", &p.clip_epsilon);
  f.Get("pgppo.target_kl", &p.target_kl);

  GuidanceConfig& gc = c->guidance;
  std::string mode(GuidanceModeName(gc.mode));
  f.Get("guidance.mode", &mode);
  gc.mode = GuidanceModeFromName(mode);
  f.Get("guidance.delta", &gc.delta);
  f.Get("guidance.alpha", &gc.alpha);
  f.Get("guidance.decay_start", &gc.decay_start);
  f.Get("guidance.delta_floor", &gc.delta_floor);

  f.Get("train.iterations", &c->iterations);
  f.Get("train.trajectories", &c->trajectories_per_iteration);
  f.Get("train.demo_episodes", &c->demo_episodes);
  f.Get("train.demo_attempt_budget", &c->demo_attempt_budget);
  f.Get("train.seed", &c->seed);
}

}  // namespace coinsert
