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

#include "coinsert/collab/protocol.h"

#include <cmath>

#include "json.hpp"

namespace coinsert::collab {
namespace {

using nlohmann::json;

json Array(const Vec4& v) { return json::array({v[0], v[1], v[2], v[3]}); }

double Number(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number()) {
    throw ProtocolError(std::string("field '") + key + "' must be a number");
  }
  const double v = it->get<double>();
  if (!std::isfinite(v)) {
    throw ProtocolError(std::string("field '") + key + "' must be finite");
  }
  return v;
}

std::optional<std::uint64_t> OptionalSeed(const json& j) {
  auto it = j.find("seed");
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_unsigned()) {
    throw ProtocolError("field 'seed' must be a non-negative integer");
  }
  return it->get<std::uint64_t>();
}

}  // namespace

std::string_view StatusWireName(Status s) { return StatusName(s); }

ClientMessage ParseClientMessage(std::string_view text) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    throw ProtocolError("message is not a JSON object");
  }
  auto v = j.find("v");
  if (v == j.end() || !v->is_number_integer() ||
      v->get<int>() != kProtocolVersion) {
    throw ProtocolError("unsupported or missing protocol version (expected " +
                        std::to_string(kProtocolVersion) + ")");
  }
  auto t = j.find("type");
  if (t == j.end() || !t->is_string()) {
    throw ProtocolError("missing message type");
  }
  const std::string type = t->get<std::string>();
  if (type == "create") {
    CreateMessage m;
    const std::string kind = j.value("assistant", std::string("admittance"));
    if (kind == "admittance") {
      m.assistant.kind = AssistantKind::kAdmittance;
    } else if (kind == "policy") {
      m.assistant.kind = AssistantKind::kPolicy;
      auto c = j.find("checkpoint");
      if (c == j.end() || !c->is_string()) {
        throw ProtocolError("policy assistant needs a 'checkpoint' path");
      }
      m.assistant.checkpoint = c->get<std::string>();
    } else {
      throw ProtocolError("unknown assistant '" + kind + "'");
    }
    m.seed = OptionalSeed(j);
    return m;
  }
  if (type == "ready") return ReadyMessage{};
  if (type == "set_cursor") {
    CursorMessage m;
    m.cursor.x = Number(j, "x");
    m.cursor.z = Number(j, "z");
    m.cursor.theta = Number(j, "theta");
    m.cursor.feed = j.contains("feed") ? Number(j, "feed") : 0.0;
    return m;
  }
  if (type == "pause") {
    auto p = j.find("paused");
    if (p != j.end() && !p->is_boolean()) {
      throw ProtocolError("field 'paused' must be a boolean");
    }
    return PauseMessage{p == j.end() ? true : p->get<bool>()};
  }
  if (type == "reset") return ResetMessage{OptionalSeed(j)};
  if (type == "resume") {
    auto s = j.find("session");
    if (s == j.end() || !s->is_string()) {
      throw ProtocolError("resume needs a 'session' id");
    }
    return ResumeMessage{s->get<std::string>()};
  }
  throw ProtocolError("unknown message type '" + type + "'");
}

std::string EncodeClientMessage(const ClientMessage& message) {
  json j{{"v", kProtocolVersion}};
  std::visit(
      [&j](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, CreateMessage>) {
          j["type"] = "create";
          const bool policy = m.assistant.kind == AssistantKind::kPolicy;
          j["assistant"] = policy ? "policy" : "admittance";
          if (policy) j["checkpoint"] = m.assistant.checkpoint;
          if (m.seed) j["seed"] = *m.seed;
        } else if constexpr (std::is_same_v<T, ReadyMessage>) {
          j["type"] = "ready";
        } else if constexpr (std::is_same_v<T, CursorMessage>) {
          j["type"] = "set_cursor";
          j["x"] = m.cursor.x;
          j["z"] = m.cursor.z;
          j["theta"] = m.cursor.theta;
          j["feed"] = m.cursor.feed;
        } else if constexpr (std::is_same_v<T, PauseMessage>) {
          j["type"] = "pause";
          j["paused"] = m.paused;
        } else if constexpr (std::is_same_v<T, ResetMessage>) {
          j["type"] = "reset";
          if (m.seed) j["seed"] = *m.seed;
        } else {
          j["type"] = "resume";
          j["session"] = m.session;
        }
      },
      message);
  return j.dump();
}

std::string EncodeSessionInfo(const Session& session) {
  const InsertionEnv& env = session.env();
  const Geometry& g = env.geometry();
  json geometry{
      {"board_half_extents",
       {g.board_half_extents.x(), g.board_half_extents.y(),
        g.board_half_extents.z()}},
      {"clearance", g.clearance},
      {"slot_depth", g.slot_depth},
      {"frame_center", Array(g.frame_center.AsVector())},
  };
  json j{
      {"v", kProtocolVersion},
      {"type", "session_info"},
      {"session", session.id()},
      {"assistant", session.spec().kind == AssistantKind::kPolicy
                        ? "policy"
                        : "admittance"},
      {"seed", session.seed()},
      {"physics_hz", session.params().physics_hz},
      {"broadcast_hz", session.params().broadcast_hz},
      {"dt", env.params().dt},
      {"substeps", session.substeps()},
      {"f_max", env.params().f_max},
      {"t_max", env.params().t_max},
      {"timeout", env.params().timeout},
      {"geometry", geometry},
      {"target", Array(g.TargetPose().AsVector())},
  };
  return j.dump();
}

std::string EncodeState(const std::string& session_id,
                        const StateSnapshot& s) {
  json j{
      {"v", kProtocolVersion},
      {"type", "state"},
      {"session", session_id},
      {"tick", s.tick},
      {"time", s.time},
      {"pose", Array(s.pose.AsVector())},
      {"twist", Array(s.twist.AsVector())},
      {"wrench", Array(s.wrench.AsVector())},
      {"command", Array(s.command.AsVector())},
      {"human_force",
       json::array({s.human_force.x(), s.human_force.y(), s.human_force.z(),
                    s.human_torque})},
      {"reward", s.reward},
      {"status", StatusWireName(s.status)},
      {"in_contact", s.in_contact},
      {"paused", s.paused},
  };
  j["first_contact_time"] =
      s.first_contact_time ? json(*s.first_contact_time) : json(nullptr);
  j["target"] = s.target ? Array(s.target->AsVector()) : json(nullptr);
  return j.dump();
}

std::string EncodeError(std::string_view message) {
  return json{{"v", kProtocolVersion},
              {"type", "error"},
              {"message", std::string(message)}}
      .dump();
}

}  // namespace coinsert::collab
