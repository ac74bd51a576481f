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

#include <chrono>
#include <cmath>
#include <string>
#include <thread>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <gtest/gtest.h>

#include "coinsert/collab/protocol.h"
#include "coinsert/collab/server.h"
#include "coinsert/collab/session.h"
#include "json.hpp"

namespace coinsert::collab {
namespace {

using nlohmann::json;

// ---------------------------------------------------------------- coupling

TEST(CouplingTest, SpringDamperExample) {
  const Geometry g;
  CouplingParams p;
  const Pose4 pose{0.0, -0.1, 0.0, 0.0};
  const Pose4 target{0.01, -0.08, -0.02, 0.1};
  const Twist4 twist{0.1, 0.0, 0.0, 0.2};
  const HumanWrench w = CouplingForce(target, pose, twist, p, g);
  // 200 * 0.01 - 20 * 0.1 = 0, 200 * 0.02 = 4, 200 * -0.02 = -4.
  EXPECT_NEAR(w.force.x(), 0.0, 1e-12);
  EXPECT_NEAR(w.force.y(), 4.0, 1e-12);
  EXPECT_NEAR(w.force.z(), -4.0, 1e-12);
  // The couple 5 * 0.1 - 0.5 * 0.2 = 0.4 plus the moment of the force
  // applied at the grasp offset.
  const HumanWrench at_grasp =
      ApplyAtGrasp({0.0, 4.0, -4.0, 0.4}, pose, g);
  EXPECT_NEAR(w.torque_y, at_grasp.torque_y, 1e-12);
  EXPECT_EQ(w.point, g.BoardPointWorld(pose, g.grasp_offset_board));
}

TEST(CouplingTest, ClampsForceNormAndTorque) {
  const Geometry g;
  CouplingParams p;
  const Pose4 pose{0.0, -0.2, 0.0, 0.0};
  const Pose4 far{1.0, 0.8, 0.0, 3.0};
  const HumanWrench w = CouplingForce(far, pose, Twist4{}, p, g);
  EXPECT_NEAR(w.force.norm(), p.force_clamp, 1e-9);
  EXPECT_NEAR(w.force.x(), w.force.y(), 1e-9);  // direction is kept
  const HumanWrench couple = ApplyAtGrasp(
      {w.force.x(), w.force.y(), w.force.z(), p.torque_clamp}, pose, g);
  EXPECT_NEAR(w.torque_y, couple.torque_y, 1e-12);
}

TEST(CouplingTest, ZeroAtRestOnTarget) {
  const Geometry g;
  const Pose4 pose{0.003, -0.05, 0.001, 0.02};
  const HumanWrench w = CouplingForce(pose, pose, Twist4{}, {}, g);
  EXPECT_EQ(w.force, Vec3::Zero());
  EXPECT_EQ(w.torque_y, 0.0);
}

TEST(SessionParamsTest, Validation) {
  SessionParams p;
  EXPECT_NO_THROW(p.Validate());
  p.broadcast_hz = 29.9;
  EXPECT_THROW(p.Validate(), ConfigError);
  p = {};
  p.coupling.k = 0.0;
  EXPECT_THROW(p.Validate(), ConfigError);
  p = {};
  p.physics_hz = -1.0;
  EXPECT_THROW(p.Validate(), ConfigError);
}

// ----------------------------------------------------------------- session

// Reference force source: the coupling evaluated on the post-motion state.
class OracleCoupling : public ForceSource {
 public:
  OracleCoupling(const Pose4& target, const CouplingParams& p)
      : target_(target), p_(p) {}
  HumanWrench Act(const EnvState& s, const Geometry& g) const override {
    return CouplingForce(target_, s.pose, s.twist, p_, g);
  }

 private:
  Pose4 target_;
  CouplingParams p_;
};

TEST(SessionTest, TickAdvancesOneFrame) {
  const TrainConfig config;
  Session s("a", config, {}, {}, 4);
  EXPECT_EQ(s.substeps(), 5);
  EXPECT_EQ(s.latest().tick, 0u);
  const StateSnapshot& st = s.Tick();
  EXPECT_EQ(st.tick, 1u);
  EXPECT_NEAR(st.time, 5 * config.env.dt, 1e-12);
  EXPECT_FALSE(st.target.has_value());
  EXPECT_EQ(st.human_force, Vec3::Zero());
}

TEST(SessionTest, AdmittanceMatchesDirectSimulation) {
  const TrainConfig config;
  SessionParams params;
  Session s("a", config, {}, params, 21);
  InsertionEnv env(config.env, config.geometry);
  Observation obs = env.Reset(21);
  AdmittanceAssistant ac(config.admittance, config.env.dt);
  ac.Reset(obs);
  EXPECT_EQ(s.latest().pose, env.state().pose);

  // Two frames without a cursor, then a cursor with a feed rate.
  for (int f = 0; f < 2; ++f) {
    s.Tick();
    for (int i = 0; i < s.substeps(); ++i) {
      HumanWrench zero;
      zero.point = config.geometry.BoardPointWorld(
          env.state().pose, config.geometry.grasp_offset_board);
      obs = env.Step(ac.Act(obs), zero).obs;
    }
    ASSERT_EQ(s.latest().pose, env.state().pose);
  }
  const CursorInput cursor{0.002, -0.001, 0.01, 0.02};
  s.SetCursor(cursor);
  double y_target = env.state().pose.y;
  const double y_cap = config.geometry.TargetPose().y;
  for (int f = 0; f < 40; ++f) {
    const StateSnapshot& st = s.Tick();
    for (int i = 0; i < s.substeps() &&
                    env.state().status == Status::kRunning; ++i) {
      y_target = std::min(y_cap, y_target + cursor.feed * config.env.dt);
      const Pose4 target{cursor.x, y_target, cursor.z, cursor.theta};
      obs = env.Step(ac.Act(obs), OracleCoupling(target, params.coupling)).obs;
    }
    ASSERT_EQ(st.pose, env.state().pose) << "frame " << f;
    ASSERT_EQ(st.wrench, env.state().f_meas);
    ASSERT_TRUE(st.target.has_value());
    EXPECT_EQ(st.target->y, y_target);
  }
}

TEST(SessionTest, PauseFreezesTheEpisode) {
  Session s("a", TrainConfig{}, {}, {}, 2);
  s.Tick();
  const double t = s.latest().time;
  s.SetPaused(true);
  const StateSnapshot& st = s.Tick();
  EXPECT_TRUE(st.paused);
  EXPECT_EQ(st.tick, 2u);
  EXPECT_EQ(st.time, t);
  s.SetPaused(false);
  EXPECT_GT(s.Tick().time, t);
}

TEST(SessionTest, TerminalStateIsFrozenAndResetStartsOver) {
  TrainConfig config;
  config.env.timeout = 0.1;
  Session s("a", config, {}, {}, 8);
  for (int i = 0; i < 10; ++i) s.Tick();
  EXPECT_EQ(s.latest().status, Status::kTimeout);
  const Pose4 pose = s.latest().pose;
  const double time = s.latest().time;
  for (int i = 0; i < 5; ++i) s.Tick();
  EXPECT_EQ(s.latest().tick, 15u);
  EXPECT_EQ(s.latest().pose, pose);
  EXPECT_EQ(s.latest().time, time);

  s.Reset(99);
  EXPECT_EQ(s.seed(), 99u);
  EXPECT_EQ(s.latest().status, Status::kRunning);
  EXPECT_EQ(s.latest().time, 0.0);
  InsertionEnv env(config.env, config.geometry);
  env.Reset(99);
  EXPECT_EQ(s.latest().pose, env.state().pose);
}

TEST(SessionTest, PolicyCheckpointIsLoaded) {
  const TrainConfig config;
  AssistantSpec spec{AssistantKind::kPolicy,
                     testing::TempDir() + "/coinsert_missing.ckpt"};
  EXPECT_THROW(Session("p", config, spec, {}, 1), ConfigError);

  PgppoConfig pc;
  pc.hidden = {8};
  Checkpoint c;
  c.policy = GaussianPolicy(pc);
  c.value = ValueFunction(pc);
  Rng rng(1);
  c.policy.Initialize(rng);
  c.value.Initialize(rng);
  c.normalizer = ObservationNormalizer(config.env, config.geometry);
  c.limits = config.env.limits;
  spec.checkpoint = testing::TempDir() + "/coinsert_session.ckpt";
  SaveCheckpoint(c, spec.checkpoint);
  Session s("p", config, spec, {}, 1);
  const StateSnapshot& st = s.Tick();
  EXPECT_EQ(st.tick, 1u);
  EXPECT_LE(std::abs(st.command.vx), config.env.limits.v_max);
  std::remove(spec.checkpoint.c_str());
}

// ---------------------------------------------------------------- protocol

TEST(ProtocolTest, ParsesEveryClientMessage) {
  auto m = ParseClientMessage(R"({"v":1,"type":"create","seed":12})");
  auto* create = std::get_if<CreateMessage>(&m);
  ASSERT_NE(create, nullptr);
  EXPECT_EQ(create->assistant.kind, AssistantKind::kAdmittance);
  EXPECT_EQ(create->seed, 12u);

  m = ParseClientMessage(
      R"({"v":1,"type":"create","assistant":"policy","checkpoint":"a.ckpt"})");
  create = std::get_if<CreateMessage>(&m);
  ASSERT_NE(create, nullptr);
  EXPECT_EQ(create->assistant.kind, AssistantKind::kPolicy);
  EXPECT_EQ(create->assistant.checkpoint, "a.ckpt");
  EXPECT_FALSE(create->seed.has_value());

  EXPECT_TRUE(std::holds_alternative<ReadyMessage>(
      ParseClientMessage(R"({"v":1,"type":"ready"})")));
  m = ParseClientMessage(
      R"({"v":1,"type":"set_cursor","x":0.01,"z":-0.02,"theta":0.1})");
  const auto* cursor = std::get_if<CursorMessage>(&m);
  ASSERT_NE(cursor, nullptr);
  EXPECT_EQ(cursor->cursor.x, 0.01);
  EXPECT_EQ(cursor->cursor.z, -0.02);
  EXPECT_EQ(cursor->cursor.theta, 0.1);
  EXPECT_EQ(cursor->cursor.feed, 0.0);
  m = ParseClientMessage(R"({"v":1,"type":"pause","paused":false})");
  EXPECT_FALSE(std::get<PauseMessage>(m).paused);
  m = ParseClientMessage(R"({"v":1,"type":"reset"})");
  EXPECT_FALSE(std::get<ResetMessage>(m).seed.has_value());
  m = ParseClientMessage(R"({"v":1,"type":"resume","session":"s1"})");
  EXPECT_EQ(std::get<ResumeMessage>(m).session, "s1");
}

TEST(ProtocolTest, EncodeParseRoundTrip) {
  const std::vector<ClientMessage> messages{
      CreateMessage{{AssistantKind::kPolicy, "x.ckpt"}, 7},
      CreateMessage{{}, std::nullopt},
      ReadyMessage{},
      CursorMessage{{0.001, -0.002, 0.03, 0.004}},
      PauseMessage{true},
      ResetMessage{123456789012345ULL},
      ResumeMessage{"s9-abc"}};
  for (const ClientMessage& m : messages) {
    const std::string text = EncodeClientMessage(m);
    const ClientMessage back = ParseClientMessage(text);
    EXPECT_EQ(back.index(), m.index());
    EXPECT_EQ(EncodeClientMessage(back), text);
  }
}

TEST(ProtocolTest, RejectsMalformedMessages) {
  for (const char* bad : {
           "not json",
           "[1,2]",
           R"({"type":"ready"})",
           R"({"v":2,"type":"ready"})",
           R"({"v":1})",
           R"({"v":1,"type":"fly"})",
           R"({"v":1,"type":"create","assistant":"robot"})",
           R"({"v":1,"type":"create","assistant":"policy"})",
           R"({"v":1,"type":"create","seed":-1})",
           R"({"v":1,"type":"set_cursor","x":"a","z":0,"theta":0})",
           R"({"v":1,"type":"set_cursor","z":0,"theta":0})",
           R"({"v":1,"type":"pause","paused":1})",
           R"({"v":1,"type":"resume"})",
       }) {
    EXPECT_THROW(ParseClientMessage(bad), ProtocolError) << bad;
  }
}

TEST(ProtocolTest, StateAndInfoFields) {
  const TrainConfig config;
  Session s("s1", config, {}, {}, 3);
  json info = json::parse(EncodeSessionInfo(s));
  EXPECT_EQ(info["v"], 1);
  EXPECT_EQ(info["type"], "session_info");
  EXPECT_EQ(info["session"], "s1");
  EXPECT_EQ(info["assistant"], "admittance");
  EXPECT_EQ(info["seed"], 3u);
  EXPECT_EQ(info["f_max"].get<double>(), config.env.f_max);
  EXPECT_EQ(info["target"].size(), 4u);

  s.SetCursor({0.0, 0.0, 0.0, 0.01});
  const StateSnapshot& st = s.Tick();
  json state = json::parse(EncodeState("s1", st));
  EXPECT_EQ(state["type"], "state");
  EXPECT_EQ(state["tick"], 1u);
  EXPECT_EQ(state["time"].get<double>(), st.time);
  EXPECT_EQ(state["pose"][1].get<double>(), st.pose.y);
  EXPECT_EQ(state["wrench"][3].get<double>(), st.wrench.ty);
  EXPECT_EQ(state["human_force"][1].get<double>(), st.human_force.y());
  EXPECT_EQ(state["status"], "running");
  EXPECT_TRUE(state["first_contact_time"].is_null());
  EXPECT_EQ(state["target"].size(), 4u);

  json err = json::parse(EncodeError("boom"));
  EXPECT_EQ(err["type"], "error");
  EXPECT_EQ(err["message"], "boom");
  EXPECT_EQ(StatusWireName(Status::kViolationForce), "violation_force");
}

// ------------------------------------------------------------------ server

namespace beast = boost::beast;
namespace asio = boost::asio;

class Client {
 public:
  explicit Client(unsigned short port) : ws_(ioc_) {
    asio::ip::tcp::resolver resolver(ioc_);
    asio::connect(ws_.next_layer(),
                  resolver.resolve("127.0.0.1", std::to_string(port)));
    ws_.handshake("127.0.0.1", "/");
  }

  void Send(const std::string& text) { ws_.write(asio::buffer(text)); }

  json Read() {
    beast::flat_buffer buffer;
    ws_.read(buffer);
    return json::parse(beast::buffers_to_string(buffer.data()));
  }

  // Skips state frames until a message of `type` arrives.
  json ReadType(const std::string& type) {
    for (;;) {
      json j = Read();
      if (j["type"] == type) return j;
    }
  }

  void Close() { ws_.close(beast::websocket::close_code::normal); }

 private:
  asio::io_context ioc_;
  beast::websocket::stream<asio::ip::tcp::socket> ws_;
};

class ServerTest : public testing::Test {
 protected:
  void SetUp() override { port_ = server_.Start("127.0.0.1", 0); }
  void TearDown() override { server_.Stop(); }

  Server server_{TrainConfig{}, SessionParams{}};
  unsigned short port_ = 0;
};

TEST_F(ServerTest, CreateStreamsStatesAtTheBroadcastRate) {
  Client c(port_);
  c.Send(R"({"v":1,"type":"create","seed":5})");
  const json info = c.ReadType("session_info");
  EXPECT_EQ(info["seed"], 5u);
  const std::string id = info["session"];
  EXPECT_EQ(server_.session_count(), 1u);

  c.Send(R"({"v":1,"type":"ready"})");
  json first = c.ReadType("state");
  EXPECT_EQ(first["session"], id);
  const auto start = std::chrono::steady_clock::now();
  std::uint64_t last_tick = first["tick"];
  int frames = 0;
  while (std::chrono::steady_clock::now() - start < std::chrono::seconds(2)) {
    const json s = c.ReadType("state");
    const std::uint64_t tick = s["tick"];
    EXPECT_GT(tick, last_tick);
    last_tick = tick;
    ++frames;
  }
  const double elapsed = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start)
                             .count();
  EXPECT_GE(frames / elapsed, 30.0 * 0.95)
      << frames << " frames in " << elapsed << " s";
  c.Close();
}

TEST_F(ServerTest, CursorDrivesTheBoard) {
  Client c(port_);
  c.Send(R"({"v":1,"type":"create","seed":6})");
  c.ReadType("session_info");
  c.Send(R"({"v":1,"type":"ready"})");
  const json before = c.ReadType("state");
  EXPECT_TRUE(before["target"].is_null());
  c.Send(R"({"v":1,"type":"set_cursor","x":0,"z":0,"theta":0,"feed":0.05})");
  json s;
  do {
    s = c.ReadType("state");
  } while (s["target"].is_null());
  const double y0 = s["pose"][1];
  for (int i = 0; i < 15; ++i) s = c.ReadType("state");
  EXPECT_GT(s["pose"][1].get<double>(), y0);
  EXPECT_NE(s["human_force"][1].get<double>(), 0.0);
}

TEST_F(ServerTest, ErrorsDoNotDropTheConnection) {
  Client c(port_);
  c.Send(R"({"v":1,"type":"ready"})");
  EXPECT_EQ(c.Read()["type"], "error");
  c.Send("garbage");
  EXPECT_EQ(c.Read()["type"], "error");
  c.Send(R"({"v":1,"type":"resume","session":"nope"})");
  EXPECT_EQ(c.Read()["type"], "error");
  c.Send(R"({"v":1,"type":"create","assistant":"policy",)"
         R"("checkpoint":"/nonexistent.ckpt"})");
  EXPECT_EQ(c.Read()["type"], "error");
  c.Send(R"({"v":1,"type":"create"})");
  EXPECT_EQ(c.ReadType("session_info")["type"], "session_info");
}

TEST_F(ServerTest, SessionSurvivesDisconnect) {
  std::string id;
  std::uint64_t tick = 0;
  {
    Client c(port_);
    c.Send(R"({"v":1,"type":"create","seed":7})");
    id = c.ReadType("session_info")["session"];
    c.Send(R"({"v":1,"type":"ready"})");
    for (int i = 0; i < 5; ++i) tick = c.ReadType("state")["tick"];
    c.Close();
  }
  Client again(port_);
  again.Send(json{{"v", 1}, {"type", "resume"}, {"session", id}}.dump());
  const json info = again.ReadType("session_info");
  EXPECT_EQ(info["session"], id);
  EXPECT_EQ(info["seed"], 7u);
  const json s = again.ReadType("state");
  EXPECT_EQ(s["session"], id);
  EXPECT_GT(s["tick"].get<std::uint64_t>(), tick);
  EXPECT_EQ(server_.session_count(), 1u);
}

TEST_F(ServerTest, ConcurrentSessionsAreIndependent) {
  Client a(port_), b(port_);
  a.Send(R"({"v":1,"type":"create","seed":1})");
  b.Send(R"({"v":1,"type":"create","seed":2})");
  const std::string ia = a.ReadType("session_info")["session"];
  const std::string ib = b.ReadType("session_info")["session"];
  EXPECT_NE(ia, ib);
  EXPECT_EQ(server_.session_count(), 2u);
  a.Send(R"({"v":1,"type":"ready"})");
  b.Send(R"({"v":1,"type":"ready"})");
  const json sa = a.ReadType("state");
  const json sb = b.ReadType("state");
  EXPECT_EQ(sa["session"], ia);
  EXPECT_EQ(sb["session"], ib);
  EXPECT_NE(sa["pose"], sb["pose"]);
  // Pausing one session leaves the other running.
  a.Send(R"({"v":1,"type":"pause","paused":true})");
  json pa;
  do {
    pa = a.ReadType("state");
  } while (!pa["paused"].get<bool>());
  const double tb0 = b.ReadType("state")["time"];
  const double tb1 = b.ReadType("state")["time"];
  EXPECT_GT(tb1, tb0);
}

}  // namespace
}  // namespace coinsert::collab
