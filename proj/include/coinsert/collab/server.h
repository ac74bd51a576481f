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

#ifndef COINSERT_COLLAB_SERVER_H_
#define COINSERT_COLLAB_SERVER_H_

#include <cstddef>
#include <memory>
#include <string>

#include "coinsert/collab/session.h"
#include "coinsert/harness.h"

namespace coinsert::collab {

// WebSocket front end. Each session ticks on its own timer at physics_hz
// and pushes its latest state at broadcast_hz; all handlers run on one
// I/O thread, so a session's messages and ticks never interleave.
class Connection;

class Server {
 public:
  Server(TrainConfig config, SessionParams params);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and serves on a background thread. Port 0 picks a free port;
  // the bound port is returned. Throws std::runtime_error on bind failure.
  unsigned short Start(const std::string& host, unsigned short port);
  // Closes every connection and joins the I/O thread. Idempotent.
  void Stop();
  // Blocks until Stop is called from another thread or a signal handler.
  void Wait();

  size_t session_count() const;

 private:
  friend class Connection;
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

}  // namespace coinsert::collab

#endif  // COINSERT_COLLAB_SERVER_H_
