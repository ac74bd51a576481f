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

#ifndef COINSERT_COLLAB_PROTOCOL_H_
#define COINSERT_COLLAB_PROTOCOL_H_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "coinsert/collab/session.h"

namespace coinsert::collab {

// JSON text frames; every message carries "v" and "type".
//
// Client to server:
//   {"v":1,"type":"create","assistant":"admittance"|"policy",
//    "checkpoint":"<path, policy only>","seed":<u64, optional>}
//   {"v":1,"type":"ready"}                      start streaming states
//   {"v":1,"type":"set_cursor","x":m,"z":m,"theta":rad,"feed":m/s}
//   {"v":1,"type":"pause","paused":true|false}
//   {"v":1,"type":"reset","seed":<u64, optional>}
//   {"v":1,"type":"resume","session":"<id>"}    reattach after a disconnect
//
// Server to client:
//   {"v":1,"type":"session_info","session":id,"assistant":...,"seed":...,
//    "physics_hz":...,"broadcast_hz":...,"dt":...,"f_max":N,"t_max":N*m,
//    "geometry":{...},"target":[x,y,z,theta]}
//   {"v":1,"type":"state","session":id,"tick":n,"time":s,
//    "pose":[x,y,z,theta],"twist":[vx,vy,vz,wy],"wrench":[fx,fy,fz,ty],
//    "command":[...],"human_force":[fx,fy,fz,ty],"reward":r,
//    "status":"running|success|violation_force|violation_torque|timeout",
//    "in_contact":bool,"first_contact_time":s|null,"paused":bool,
//    "target":[x,y,z,theta]|null}
//   {"v":1,"type":"error","message":"..."}
inline constexpr int kProtocolVersion = 1;

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CreateMessage {
  AssistantSpec assistant;
  std::optional<std::uint64_t> seed;
};
struct ReadyMessage {};
struct CursorMessage {
  CursorInput cursor;
};
struct PauseMessage {
  bool paused = true;
};
struct ResetMessage {
  std::optional<std::uint64_t> seed;
};
struct ResumeMessage {
  std::string session;
};

using ClientMessage = std::variant<CreateMessage, ReadyMessage, CursorMessage,
                                   PauseMessage, ResetMessage, ResumeMessage>;

// Throws ProtocolError on malformed JSON, a wrong version, an unknown type
// or missing/mistyped fields.
ClientMessage ParseClientMessage(std::string_view text);

std::string EncodeClientMessage(const ClientMessage& message);

std::string EncodeSessionInfo(const Session& session);
std::string EncodeState(const std::string& session_id,
                        const StateSnapshot& state);
std::string EncodeError(std::string_view message);

std::string_view StatusWireName(Status s);

}  // namespace coinsert::collab

#endif  // COINSERT_COLLAB_PROTOCOL_H_
