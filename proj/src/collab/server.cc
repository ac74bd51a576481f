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

#include "coinsert/collab/server.h"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>
#include <utility>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "coinsert/collab/protocol.h"

namespace coinsert::collab {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using Clock = std::chrono::steady_clock;

namespace {

constexpr size_t kMaxQueuedFrames = 256;

std::chrono::nanoseconds Period(double hz) {
  return std::chrono::nanoseconds(static_cast<long long>(1e9 / hz));
}

}  // namespace

class Connection;

// A session plus its timers and the connection it streams to.
struct LiveSession {
  LiveSession(asio::io_context& ioc, std::unique_ptr<Session> s)
      : session(std::move(s)), tick_timer(ioc), broadcast_timer(ioc),
        grace_timer(ioc) {}

  std::unique_ptr<Session> session;
  asio::steady_timer tick_timer;
  asio::steady_timer broadcast_timer;
  asio::steady_timer grace_timer;
  std::weak_ptr<Connection> connection;
  bool streaming = false;
  bool timers_running = false;
  bool closed = false;
  std::uint64_t last_sent_tick = 0;
  Clock::time_point next_tick;
  Clock::time_point next_broadcast;
};

struct Server::Impl : std::enable_shared_from_this<Server::Impl> {
  Impl(TrainConfig c, SessionParams p)
      : config(std::move(c)), params(p), acceptor(ioc) {}

  void Accept();
  std::string NewId();
  void StartTimers(const std::shared_ptr<LiveSession>& live);
  void ScheduleTick(const std::shared_ptr<LiveSession>& live);
  void ScheduleBroadcast(const std::shared_ptr<LiveSession>& live);
  void Park(const std::shared_ptr<LiveSession>& live);
  void Close(const std::shared_ptr<LiveSession>& live);

  TrainConfig config;
  SessionParams params;
  asio::io_context ioc;
  tcp::acceptor acceptor;
  std::thread thread;
  std::map<std::string, std::shared_ptr<LiveSession>> sessions;
  std::vector<std::weak_ptr<Connection>> connections;
  std::atomic<size_t> session_count{0};
  std::uint64_t next_id = 1;
  Rng id_rng{std::random_device{}()};
  std::mutex mu;
  std::condition_variable stopped_cv;
  bool running = false;
};

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, std::shared_ptr<Server::Impl> server)
      : ws_(std::move(socket)), server_(std::move(server)) {}

  void Start() {
    ws_.set_option(
        websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(
        [self = shared_from_this()](beast::error_code ec) {
          if (!ec) self->Read();
        });
  }

  void Send(std::string text, bool droppable) {
    if (closing_) return;
    if (droppable && outbox_.size() >= kMaxQueuedFrames) return;
    outbox_.push_back(std::move(text));
    if (!writing_) Write();
  }

  void Close() {
    if (closing_) return;
    closing_ = true;
    beast::error_code ec;
    ws_.next_layer().socket().shutdown(tcp::socket::shutdown_both, ec);
    ws_.next_layer().socket().close(ec);
  }

  const std::shared_ptr<LiveSession>& live() const { return live_; }

 private:
  void Read() {
    ws_.async_read(buffer_, [self = shared_from_this()](
                                beast::error_code ec, size_t) {
      if (ec) {
        self->OnDisconnect();
        return;
      }
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->OnMessage(text);
      self->Read();
    });
  }

  void Write() {
    writing_ = true;
    ws_.text(true);
    ws_.async_write(asio::buffer(outbox_.front()),
                    [self = shared_from_this()](beast::error_code ec, size_t) {
                      self->outbox_.pop_front();
                      if (ec) {
                        self->writing_ = false;
                        return;
                      }
                      if (self->outbox_.empty()) {
                        self->writing_ = false;
                      } else {
                        self->Write();
                      }
                    });
  }

  void OnDisconnect() {
    closing_ = true;
    if (live_) {
      server_->Park(live_);
      live_.reset();
    }
  }

  void Error(const std::string& message) {
    Send(EncodeError(message), false);
  }

  void Attach(const std::shared_ptr<LiveSession>& live) {
    live_ = live;
    live->connection = weak_from_this();
    live->grace_timer.cancel();
    Send(EncodeSessionInfo(*live->session), false);
    if (live->streaming) server_->StartTimers(live);
  }

  void OnMessage(const std::string& text) {
    ClientMessage msg;
    try {
      msg = ParseClientMessage(text);
    } catch (const ProtocolError& e) {
      Error(e.what());
      return;
    }
    if (auto* m = std::get_if<CreateMessage>(&msg)) {
      std::unique_ptr<Session> session;
      const std::string id = server_->NewId();
      try {
        session = std::make_unique<Session>(
            id, server_->config, m->assistant, server_->params,
            m->seed.value_or(server_->id_rng()));
      } catch (const std::exception& e) {
        Error(std::string("cannot create session: ") + e.what());
        return;
      }
      if (live_) server_->Close(live_);
      auto live = std::make_shared<LiveSession>(server_->ioc, std::move(session));
      server_->sessions[id] = live;
      server_->session_count = server_->sessions.size();
      Attach(live);
      return;
    }
    if (auto* m = std::get_if<ResumeMessage>(&msg)) {
      auto it = server_->sessions.find(m->session);
      if (it == server_->sessions.end()) {
        Error("unknown or expired session '" + m->session + "'");
        return;
      }
      if (it->second->connection.lock()) {
        Error("session '" + m->session + "' is attached elsewhere");
        return;
      }
      if (live_ && live_ != it->second) server_->Close(live_);
      Attach(it->second);
      return;
    }
    if (!live_) {
      Error("no session; send 'create' first");
      return;
    }
    Session& s = *live_->session;
    if (std::holds_alternative<ReadyMessage>(msg)) {
      live_->streaming = true;
      server_->StartTimers(live_);
    } else if (auto* c = std::get_if<CursorMessage>(&msg)) {
      s.SetCursor(c->cursor);
    } else if (auto* p = std::get_if<PauseMessage>(&msg)) {
      s.SetPaused(p->paused);
    } else if (auto* r = std::get_if<ResetMessage>(&msg)) {
      s.Reset(r->seed);
      Send(EncodeSessionInfo(s), false);
    }
  }

  websocket::stream<beast::tcp_stream> ws_;
  std::shared_ptr<Server::Impl> server_;
  beast::flat_buffer buffer_;
  std::deque<std::string> outbox_;
  bool writing_ = false;
  bool closing_ = false;
  std::shared_ptr<LiveSession> live_;
};

void Server::Impl::Accept() {
  acceptor.async_accept([self = shared_from_this()](beast::error_code ec,
                                                    tcp::socket socket) {
    if (ec) return;  // acceptor closed
    auto conn = std::make_shared<Connection>(std::move(socket), self);
    self->connections.push_back(conn);
    conn->Start();
    self->Accept();
  });
}

std::string Server::Impl::NewId() {
  std::ostringstream os;
  os << 's' << next_id++ << '-' << std::hex << (id_rng() & 0xffffffULL);
  return os.str();
}

void Server::Impl::StartTimers(const std::shared_ptr<LiveSession>& live) {
  if (live->timers_running || live->closed) return;
  live->timers_running = true;
  live->next_tick = Clock::now() + Period(params.physics_hz);
  live->next_broadcast = Clock::now() + Period(params.broadcast_hz);
  ScheduleTick(live);
  ScheduleBroadcast(live);
}

void Server::Impl::ScheduleTick(const std::shared_ptr<LiveSession>& live) {
  live->tick_timer.expires_at(live->next_tick);
  live->tick_timer.async_wait(
      [this, live](beast::error_code ec) {
        if (ec || live->closed || !live->connection.lock()) {
          live->timers_running = false;
          return;
        }
        live->session->Tick();
        // Never catch up faster than real time after a stall.
        live->next_tick = std::max(live->next_tick + Period(params.physics_hz),
                                   Clock::now());
        ScheduleTick(live);
      });
}

void Server::Impl::ScheduleBroadcast(
    const std::shared_ptr<LiveSession>& live) {
  live->broadcast_timer.expires_at(live->next_broadcast);
  live->broadcast_timer.async_wait([this, live](beast::error_code ec) {
    if (ec || live->closed) return;
    live->next_broadcast =
        std::max(live->next_broadcast + Period(params.broadcast_hz),
                 Clock::now());
    auto conn = live->connection.lock();
    if (!conn) return;
    const StateSnapshot& s = live->session->latest();
    if (s.tick != live->last_sent_tick) {
      live->last_sent_tick = s.tick;
      conn->Send(EncodeState(live->session->id(), s), true);
    }
    ScheduleBroadcast(live);
  });
}

void Server::Impl::Park(const std::shared_ptr<LiveSession>& live) {
  live->connection.reset();
  live->tick_timer.cancel();
  live->broadcast_timer.cancel();
  live->grace_timer.expires_after(std::chrono::duration_cast<Clock::duration>(
      std::chrono::duration<double>(params.grace_period)));
  live->grace_timer.async_wait([this, live](beast::error_code ec) {
    if (ec) return;  // resumed or shutting down
    Close(live);
  });
}

void Server::Impl::Close(const std::shared_ptr<LiveSession>& live) {
  live->closed = true;
  live->tick_timer.cancel();
  live->broadcast_timer.cancel();
  live->grace_timer.cancel();
  sessions.erase(live->session->id());
  session_count = sessions.size();
}

Server::Server(TrainConfig config, SessionParams params)
    : impl_(std::make_shared<Impl>(std::move(config), params)) {
  impl_->config.Validate();
  impl_->params.Validate();
}

Server::~Server() { Stop(); }

unsigned short Server::Start(const std::string& host, unsigned short port) {
  const tcp::endpoint endpoint(asio::ip::make_address(host), port);
  impl_->acceptor.open(endpoint.protocol());
  impl_->acceptor.set_option(asio::socket_base::reuse_address(true));
  impl_->acceptor.bind(endpoint);
  impl_->acceptor.listen();
  const unsigned short bound = impl_->acceptor.local_endpoint().port();
  {
    std::lock_guard<std::mutex> lock(impl_->mu);
    impl_->running = true;
  }
  impl_->Accept();
  impl_->thread = std::thread([impl = impl_] { impl->ioc.run(); });
  return bound;
}

void Server::Stop() {
  if (!impl_->thread.joinable()) return;
  asio::post(impl_->ioc, [impl = impl_] {
    beast::error_code ec;
    impl->acceptor.close(ec);
    for (auto& w : impl->connections) {
      if (auto c = w.lock()) c->Close();
    }
    for (auto& [id, live] : impl->sessions) {
      live->closed = true;
      live->tick_timer.cancel();
      live->broadcast_timer.cancel();
      live->grace_timer.cancel();
    }
    impl->sessions.clear();
    impl->session_count = 0;
    impl->ioc.stop();
  });
  impl_->thread.join();
  {
    std::lock_guard<std::mutex> lock(impl_->mu);
    impl_->running = false;
  }
  impl_->stopped_cv.notify_all();
}

void Server::Wait() {
  std::unique_lock<std::mutex> lock(impl_->mu);
  impl_->stopped_cv.wait(lock, [this] { return !impl_->running; });
}

size_t Server::session_count() const { return impl_->session_count.load(); }

}  // namespace coinsert::collab
