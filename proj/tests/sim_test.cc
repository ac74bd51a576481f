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

#include "coinsert/sim.h"

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

namespace coinsert {
namespace {

EnvParams QuietParams() {
  EnvParams p;
  p.force_noise_sigma = 0.0;
  p.torque_noise_sigma = 0.0;
  return p;
}

// Corner (sx, sz) of a board rotated by theta about +Y, written out from
// the rotation matrix rather than through Geometry.
Vec3 CornerOracle(const Pose4& pose, double hx, double hz, double sx,
                  double sz) {
  const double c = std::cos(pose.theta_y), s = std::sin(pose.theta_y);
  return {pose.x + c * sx * hx + s * sz * hz, pose.y,
          pose.z - s * sx * hx + c * sz * hz};
}

double TotalForce(const std::vector<ContactForce>& contacts) {
  double sum = 0.0;
  for (const auto& c : contacts) sum += c.force.norm();
  return sum;
}

TEST(SeriesStiffnessTest, EqualSpringsHalve) {
  EXPECT_DOUBLE_EQ(SeriesStiffness(1e5, 1e5), 5e4);
  EXPECT_DOUBLE_EQ(SeriesStiffness(1e5, 1.5e5), 6e4);
}

TEST(GeometryTest, BoardPointMatchesRotationOracle) {
  Geometry g;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const Pose4 pose{u(rng), u(rng), u(rng), u(rng)};
    for (double sx : {-1.0, 1.0}) {
      for (double sz : {-1.0, 1.0}) {
        const Vec3 got = g.BoardPointWorld(pose, Vec3(sx * 0.2, 0.0, sz * 0.1));
        EXPECT_LT((got - CornerOracle(pose, 0.2, 0.1, sx, sz)).norm(), 1e-15);
      }
    }
  }
}

TEST(GeometryTest, InsertedPoseLeavesClearanceOnEverySide) {
  Geometry g;
  const Pose4 target = g.TargetPose();
  EXPECT_TRUE(BoardInserted(target, g));
  for (double sx : {-1.0, 1.0}) {
    for (double sz : {-1.0, 1.0}) {
      const Vec3 c = g.BoardPointWorld(target, Vec3(sx * 0.2, 0.0, sz * 0.1));
      EXPECT_NEAR(g.SlotHalfX() - std::abs(c.x()), g.clearance, 1e-15);
      EXPECT_NEAR(g.SlotHalfZ() - std::abs(c.z()), g.clearance, 1e-15);
    }
  }
  EXPECT_TRUE(ContactForces(target, Twist4{}, g, 1e5, 100.0).empty());
}

TEST(GeometryTest, RejectsTargetThatDoesNotSeat) {
  Geometry g;
  g.target_depth = 0.0;
  EXPECT_THROW(g.Validate(), ConfigError);
  Geometry h;
  h.clearance = 0.0;
  EXPECT_THROW(h.Validate(), ConfigError);
}

TEST(ContactTest, CenteredBoardOutsideSlotHasNoContact) {
  Geometry g;
  EXPECT_TRUE(ContactForces({0.0, -0.2, 0.0, 0.0}, Twist4{}, g, 1e5, 0.0)
                  .empty());
}

// A 10 mm clearance frame lets a single corner touch a side wall.
Geometry WideGeometry() {
  Geometry g;
  g.clearance = 0.01;
  return g;
}

Pose4 SingleCornerPose(const Geometry& g, double depth) {
  const double theta = 0.03;
  Pose4 pose{0.0, 0.03, 0.0, theta};
  const double reach = std::cos(theta) * 0.2 + std::sin(theta) * 0.1;
  pose.x = g.SlotHalfX() + depth - reach;
  return pose;
}

TEST(ContactTest, SingleCornerPenetrationGivesSpringForce) {
  const Geometry g = WideGeometry();
  const Pose4 pose = SingleCornerPose(g, 0.001);
  const auto contacts = ContactForces(pose, Twist4{}, g, 1e5, 1000.0);
  ASSERT_EQ(contacts.size(), 1u);
  EXPECT_NEAR(contacts[0].depth, 0.001, 1e-12);
  EXPECT_NEAR(contacts[0].force.x(), -100.0, 1e-6);
  EXPECT_NEAR(contacts[0].force.y(), 0.0, 1e-12);
  EXPECT_NEAR(contacts[0].force.z(), 0.0, 1e-12);
  const Vec3 corner = CornerOracle(pose, 0.2, 0.1, 1.0, 1.0);
  EXPECT_LT((contacts[0].point - corner).norm(), 1e-15);
}

TEST(ContactTest, FastSeparationClampsToZero) {
  const Geometry g = WideGeometry();
  const Pose4 pose = SingleCornerPose(g, 0.001);
  // Moving away from the +x wall at 1 m/s: 100 N - 1000 kg/s * 1 m/s < 0.
  const auto contacts =
      ContactForces(pose, Twist4{-1.0, 0.0, 0.0, 0.0}, g, 1e5, 1000.0);
  ASSERT_EQ(contacts.size(), 1u);
  EXPECT_EQ(contacts[0].force.norm(), 0.0);
}

TEST(ContactTest, ClosingSpeedAddsDamping) {
  const Geometry g = WideGeometry();
  const Pose4 pose = SingleCornerPose(g, 0.001);
  const auto contacts =
      ContactForces(pose, Twist4{0.01, 0.0, 0.0, 0.0}, g, 1e5, 1000.0);
  ASSERT_EQ(contacts.size(), 1u);
  EXPECT_NEAR(contacts[0].force.x(), -110.0, 1e-6);
}

TEST(ContactTest, ForcesAreNeverAttractive) {
  Geometry g;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ux(-0.01, 0.01), uy(-0.02, 0.06),
      ut(-0.05, 0.05), uv(-0.2, 0.2);
  int touched = 0;
  for (int i = 0; i < 5000; ++i) {
    const Pose4 pose{ux(rng), uy(rng), ux(rng), ut(rng)};
    const Twist4 twist{uv(rng), uv(rng), uv(rng), uv(rng)};
    for (const auto& c : ContactForces(pose, twist, g, 1e5, 300.0)) {
      ++touched;
      EXPECT_GE(c.force.dot(c.normal), 0.0);
      EXPECT_LT(c.force.cross(c.normal).norm(), 1e-9);
      EXPECT_NEAR(c.normal.norm(), 1.0, 1e-15);
      EXPECT_GT(c.depth, 0.0);
    }
  }
  EXPECT_GT(touched, 100);
}

TEST(ContactTest, ForceIsContinuousAtOnsetAndAtWallHandover) {
  Geometry g;
  const double k = 1e5, step = 1e-6;
  // Laterally offset so the +x corners overlap the side wall by 0.5 mm: the
  // contact starts on the frame face and hands over to the wall.
  for (double x : {0.0, 0.0015}) {
    double prev = TotalForce(ContactForces({x, -0.01, 0.0, 0.0}, Twist4{}, g,
                                           k, 0.0));
    for (double y = -0.01 + step; y < 0.0; y += step) {
      const double f =
          TotalForce(ContactForces({x, y, 0.0, 0.0}, Twist4{}, g, k, 0.0));
      EXPECT_LE(std::abs(f - prev), 4.0 * k * step * (1.0 + 1e-6)) << y;
      prev = f;
    }
  }
}

TEST(SensorTest, NoLoadReadsZero) {
  Geometry g;
  Rng rng(1);
  const Wrench4 w = SensorRead(HumanWrench{}, {}, Pose4{}, g, {}, rng);
  EXPECT_EQ(w, Wrench4{});
}

TEST(SensorTest, GraspForceLeverArm) {
  Geometry g;
  Rng rng(1);
  HumanWrench h;
  h.force = Vec3(0.0, 0.0, 10.0);
  h.point = g.BoardPointWorld(Pose4{}, g.grasp_offset_board);
  const Wrench4 w = SensorRead(h, {}, Pose4{}, g, {}, rng);
  // r = grasp - sensor = (0.05, 0, -0.1); tau_y = r_z f_x - r_x f_z.
  EXPECT_DOUBLE_EQ(w.fz, 10.0);
  EXPECT_NEAR(w.ty, -0.5, 1e-12);
}

TEST(SensorTest, NoiseHasConfiguredMoments) {
  Geometry g;
  Rng rng(7);
  const SensorNoise noise{0.25, std::sqrt(1.0 / 750.0)};
  const int n = 10000;
  Vec4 sum = Vec4::Zero(), sq = Vec4::Zero();
  for (int i = 0; i < n; ++i) {
    const Vec4 w = SensorRead(HumanWrench{}, {}, Pose4{}, g, noise, rng)
                       .AsVector();
    sum += w;
    sq += w.cwiseAbs2();
  }
  const Vec4 sigma{0.25, 0.25, 0.25, std::sqrt(1.0 / 750.0)};
  for (int i = 0; i < 4; ++i) {
    const double mean = sum[i] / n;
    const double sd = std::sqrt((sq[i] - n * mean * mean) / (n - 1));
    EXPECT_LT(std::abs(mean), 5.0 * sigma[i] / std::sqrt(double(n))) << i;
    EXPECT_NEAR(sd / sigma[i], 1.0, 0.1) << i;
  }
}

TEST(RewardTest, Examples) {
  const EnvParams p;
  EXPECT_EQ(Reward(Status::kRunning, Wrench4{}, p), 0.0);
  EXPECT_NEAR(Reward(Status::kSuccess, {8.0, 0.0, 0.0, 0.0}, p), 199.998,
              1e-12);
  EXPECT_NEAR(Reward(Status::kViolationForce, {80.0, 0.0, 0.0, 0.0}, p),
              -10.02, 1e-12);
  EXPECT_NEAR(Reward(Status::kTimeout, {0.0, 0.0, 0.0, 0.8}, p), -0.002,
              1e-15);
}

TEST(RewardTest, NonIncreasingInWrenchNorm) {
  const EnvParams p;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (Status s : {Status::kRunning, Status::kSuccess,
                   Status::kViolationForce, Status::kTimeout}) {
    for (int i = 0; i < 500; ++i) {
      const Wrench4 a{u(rng), u(rng), u(rng), u(rng) / 10};
      const Wrench4 b = Wrench4::FromVector(a.AsVector() * 1.5);
      EXPECT_LE(Reward(s, b, p), Reward(s, a, p));
    }
  }
}

TEST(TerminationTest, Examples) {
  const EnvParams p;
  const Geometry g;
  EnvState s;
  s.pose = {0.0, -0.25, 0.0, 0.0};
  EXPECT_EQ(CheckTermination(s, {81.0, 0.0, 0.0, 0.0}, g, p),
            Status::kViolationForce);
  EXPECT_EQ(CheckTermination(s, {0.0, 0.0, 0.0, 8.5}, g, p),
            Status::kViolationTorque);
  EXPECT_EQ(CheckTermination(s, {0.0, 0.0, 0.0, -8.5}, g, p),
            Status::kViolationTorque);
  EXPECT_EQ(CheckTermination(s, {80.0, 0.0, 0.0, 8.0}, g, p),
            Status::kRunning);
  s.time = 30.0;
  EXPECT_EQ(CheckTermination(s, Wrench4{}, g, p), Status::kTimeout);
  s.time = 0.0;
  s.pose = g.TargetPose();
  EXPECT_EQ(CheckTermination(s, Wrench4{}, g, p), Status::kSuccess);
  // Safety wins over success on the same step.
  EXPECT_EQ(CheckTermination(s, {0.0, 90.0, 0.0, 0.0}, g, p),
            Status::kViolationForce);
}

TEST(TerminationTest, SampledStartPosesAreNotInserted) {
  const EnvParams p;
  const Geometry g;
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_FALSE(BoardInserted(InsertionEnv::SampleStartPose(p, rng), g));
  }
}

TEST(StatusTest, NamesRoundTrip) {
  for (Status s : {Status::kRunning, Status::kSuccess, Status::kViolationForce,
                   Status::kViolationTorque, Status::kTimeout}) {
    EXPECT_EQ(StatusFromName(StatusName(s)), s);
  }
}

TEST(NormalizerTest, RoundTrip) {
  const EnvParams p;
  const Geometry g;
  const ObservationNormalizer norm(p, g);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    Observation o;
    o.x_r = {u(rng) * 0.1, u(rng) * 0.3, u(rng) * 0.1, u(rng) * 0.1};
    o.xdot_r = {u(rng) * 0.1, u(rng) * 0.1, u(rng) * 0.1, u(rng) * 0.3};
    o.f_meas = {u(rng) * 80, u(rng) * 80, u(rng) * 80, u(rng) * 8};
    const Observation back = norm.Denormalize(norm.Normalize(o));
    EXPECT_LT((back.x_r.AsVector() - o.x_r.AsVector()).norm(), 1e-12);
    EXPECT_LT((back.xdot_r.AsVector() - o.xdot_r.AsVector()).norm(), 1e-12);
    EXPECT_LT((back.f_meas.AsVector() - o.f_meas.AsVector()).norm(), 1e-12);
  }
}

TEST(NormalizerTest, RejectsZeroScale) {
  ObservationNormalizer norm;
  ObsVector scale = ObsVector::Ones();
  scale[3] = 0.0;
  EXPECT_THROW(norm.Set(ObsVector::Zero(), scale), ConfigError);
}

TEST(EnvTest, ResetIsDeterministic) {
  InsertionEnv a(EnvParams{}, Geometry{}), b(EnvParams{}, Geometry{});
  a.Reset(42);
  b.Reset(42);
  EXPECT_EQ(a.state(), b.state());
  b.Reset(43);
  EXPECT_NE(a.state().pose, b.state().pose);
}

TEST(EnvTest, IdenticalActionsGiveIdenticalTrajectories) {
  InsertionEnv a(EnvParams{}, Geometry{}), b(EnvParams{}, Geometry{});
  a.Reset(7);
  b.Reset(7);
  HumanWrench h;
  h.force = Vec3(1.0, 2.0, -1.0);
  for (int i = 0; i < 2000 && a.state().status == Status::kRunning; ++i) {
    const Twist4 act{0.01 * std::sin(i * 0.01), 0.05, 0.0, 0.01};
    const StepResult ra = a.Step(act, h);
    const StepResult rb = b.Step(act, h);
    ASSERT_EQ(ra.reward, rb.reward);
    ASSERT_EQ(a.state(), b.state());
  }
}

TEST(EnvTest, ZeroWidthRangesGiveFixedEpisode) {
  EnvParams p;
  p.start_x = {0.01, 0.01};
  p.start_y = {-0.25, -0.25};
  p.start_z = {-0.02, -0.02};
  p.start_theta = {0.0, 0.0};
  p.k_board = {1e5, 1e5};
  p.k_frame = {1e5, 1e5};
  InsertionEnv env(p, Geometry{});
  env.Reset(1);
  EXPECT_EQ(env.state().pose, (Pose4{0.01, -0.25, -0.02, 0.0}));
  EXPECT_DOUBLE_EQ(env.state().k_eff, 5e4);
  EXPECT_NEAR(env.state().c_contact, 2.0 * 0.3 * std::sqrt(5e4 * 0.714),
              1e-9);
}

TEST(EnvTest, ZeroActionWithoutContactKeepsPose) {
  InsertionEnv env(QuietParams(), Geometry{});
  env.Reset(3);
  const Pose4 start = env.state().pose;
  const StepResult r = env.Step(Twist4{}, HumanWrench{});
  EXPECT_EQ(env.state().pose, start);
  EXPECT_EQ(r.reward, 0.0);
  EXPECT_EQ(r.status, Status::kRunning);
  EXPECT_EQ(r.obs.f_meas, Wrench4{});
}

TEST(EnvTest, VelocityCommandMovesBoard) {
  EnvParams p = QuietParams();
  p.dt = 0.01;
  InsertionEnv env(p, Geometry{});
  env.Reset(3);
  const double y0 = env.state().pose.y;
  env.Step({0.0, 0.1, 0.0, 0.0}, HumanWrench{});
  EXPECT_NEAR(env.state().pose.y - y0, 0.001, 1e-15);
  // Commands beyond the limit are saturated.
  env.Step({0.0, 5.0, 0.0, -5.0}, HumanWrench{});
  EXPECT_NEAR(env.state().pose.y - y0, 0.002, 1e-15);
  EXPECT_EQ(env.state().twist, (Twist4{0.0, 0.1, 0.0, -0.3}));
}

TEST(EnvTest, RammingTheFrameViolatesAndThenRefusesSteps) {
  EnvParams p = QuietParams();
  p.start_x = {0.05, 0.05};
  p.start_y = {-0.01, -0.01};
  p.start_z = {0.0, 0.0};
  p.start_theta = {0.0, 0.0};
  InsertionEnv env(p, Geometry{});
  env.Reset(1);
  Status status = Status::kRunning;
  int steps = 0;
  while (status == Status::kRunning && steps < 1000) {
    status = env.Step({0.0, 0.1, 0.0, 0.0}, HumanWrench{}).status;
    ++steps;
  }
  EXPECT_EQ(status, Status::kViolationForce);
  EXPECT_GT(env.state().f_meas.ForceNorm(), p.f_max);
  EXPECT_THROW(env.Step(Twist4{}, HumanWrench{}), UsageError);
}

TEST(EnvTest, FirstContactTimeIsRecordedOnce) {
  EnvParams p = QuietParams();
  p.start_x = {0.05, 0.05};
  p.start_y = {-0.0078, -0.0078};
  p.start_z = {0.0, 0.0};
  p.start_theta = {0.0, 0.0};
  InsertionEnv env(p, Geometry{});
  env.Reset(1);
  EXPECT_FALSE(env.state().first_contact_time);
  env.Step({0.0, 0.1, 0.0, 0.0}, HumanWrench{});
  EXPECT_FALSE(env.state().first_contact_time);
  env.Step({0.0, 0.1, 0.0, 0.0}, HumanWrench{});
  ASSERT_TRUE(env.state().first_contact_time);
  const double first = *env.state().first_contact_time;
  env.Step({0.0, -0.1, 0.0, 0.0}, HumanWrench{});
  env.Step(Twist4{}, HumanWrench{});
  EXPECT_EQ(*env.state().first_contact_time, first);
}

TEST(EnvParamsTest, RejectsBadValues) {
  EnvParams p;
  p.dt = 0.0;
  EXPECT_THROW(p.Validate(), ConfigError);
  EnvParams q;
  q.k_board = {2e5, 1e5};
  EXPECT_THROW(q.Validate(), ConfigError);
}

}  // namespace
}  // namespace coinsert
