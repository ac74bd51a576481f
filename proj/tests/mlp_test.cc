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

#include "coinsert/mlp.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

namespace coinsert {
namespace {

Matrix RandomMatrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng,
                    double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

TEST(MlpTest, ParameterCountAndShapes) {
  Mlp net({12, 64, 64, 4});
  EXPECT_EQ(net.num_params(), 12 * 64 + 64 + 64 * 64 + 64 + 64 * 4 + 4);
  EXPECT_EQ(net.input_dim(), 12);
  EXPECT_EQ(net.output_dim(), 4);
  Rng rng(1);
  net.Initialize(rng);
  const Matrix out = net.Forward(Matrix::Zero(12, 7));
  EXPECT_EQ(out.rows(), 4);
  EXPECT_EQ(out.cols(), 7);
}

TEST(MlpTest, FlatLayoutIsColumnMajorWeightsThenBias) {
  Mlp net({3, 2});
  Vector& p = net.mutable_params();
  for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = 0.1 * (i + 1);
  const Vector x = Vector::LinSpaced(3, 1.0, 3.0);
  // W = [[.1 .3 .5] [.2 .4 .6]], b = [.7 .8], linear output layer.
  const Matrix y = net.Forward(Matrix(x));
  EXPECT_NEAR(y(0, 0), 0.1 * 1 + 0.3 * 2 + 0.5 * 3 + 0.7, 1e-15);
  EXPECT_NEAR(y(1, 0), 0.2 * 1 + 0.4 * 2 + 0.6 * 3 + 0.8, 1e-15);
}

TEST(MlpTest, HiddenLayersUseTanh) {
  Mlp net({1, 1, 1});
  net.mutable_params() << 2.0, 0.5, 3.0, -1.0;
  for (double x : {-3.0, -0.2, 0.0, 0.7, 4.0}) {
    const double expect = 3.0 * std::tanh(2.0 * x + 0.5) - 1.0;
    EXPECT_NEAR(net.Forward(Matrix::Constant(1, 1, x))(0, 0), expect, 1e-15);
  }
}

TEST(MlpTest, InitializationRespectsFanInAndGain) {
  Mlp net({12, 64, 4});
  Rng rng(3);
  net.Initialize(rng, 0.01);
  const Vector& p = net.params();
  const double b1 = 1.0 / std::sqrt(12.0), b2 = 0.01 / std::sqrt(64.0);
  const Eigen::Index w1 = 12 * 64, w2 = 64 * 4;
  EXPECT_LE(p.head(w1).cwiseAbs().maxCoeff(), b1);
  EXPECT_EQ(p.segment(w1, 64).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LE(p.segment(w1 + 64, w2).cwiseAbs().maxCoeff(), b2);
  EXPECT_GT(p.segment(w1 + 64, w2).cwiseAbs().maxCoeff(), 0.5 * b2);
  EXPECT_EQ(p.tail(4).cwiseAbs().maxCoeff(), 0.0);
  Rng again(3);
  Mlp twin({12, 64, 4});
  twin.Initialize(again, 0.01);
  EXPECT_EQ(twin.params(), net.params());
}

TEST(MlpTest, BatchedForwardMatchesPerColumn) {
  Mlp net({5, 8, 3});
  Rng rng(4);
  net.Initialize(rng);
  std::mt19937_64 data(5);
  const Matrix x = RandomMatrix(5, 9, data);
  const Matrix y = net.Forward(x);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    EXPECT_LT((net.Forward(Matrix(x.col(j))) - y.col(j)).norm(), 1e-14);
  }
}

// Central differences of the scalar sum(dout .* output) against Backward.
TEST(MlpTest, BackwardMatchesFiniteDifferences) {
  std::mt19937_64 data(6);
  for (int trial = 0; trial < 20; ++trial) {
    Mlp net({6, 10, 7, 3});
    Rng rng(100 + trial);
    net.Initialize(rng);
    const Matrix x = RandomMatrix(6, 5, data);
    const Matrix dout = RandomMatrix(3, 5, data);
    Mlp::Cache cache;
    net.Forward(x, &cache);
    Vector grad = Vector::Zero(net.num_params());
    net.Backward(cache, dout, &grad);

    const double h = 1e-5;
    for (Eigen::Index i = 0; i < net.num_params(); ++i) {
      Mlp probe = net;
      probe.mutable_params()[i] += h;
      const double up = (probe.Forward(x).array() * dout.array()).sum();
      probe.mutable_params()[i] -= 2 * h;
      const double down = (probe.Forward(x).array() * dout.array()).sum();
      const double fd = (up - down) / (2 * h);
      EXPECT_LE(std::abs(grad[i] - fd),
                1e-4 * std::max(std::abs(grad[i]), std::abs(fd)) + 1e-8)
          << "trial " << trial << " param " << i;
    }
  }
}

TEST(MlpTest, BackwardAccumulates) {
  Mlp net({4, 6, 2});
  Rng rng(7);
  net.Initialize(rng);
  std::mt19937_64 data(8);
  const Matrix x = RandomMatrix(4, 3, data);
  const Matrix dout = RandomMatrix(2, 3, data);
  Mlp::Cache cache;
  net.Forward(x, &cache);
  Vector once = Vector::Zero(net.num_params());
  net.Backward(cache, dout, &once);
  Vector twice = once;
  net.Backward(cache, dout, &twice);
  EXPECT_LT((twice - 2.0 * once).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(MlpTest, SaturatedTanhStaysFinite) {
  Mlp net({1, 1, 1});
  net.mutable_params() << 1.0, 0.0, 1.0, 0.0;
  EXPECT_DOUBLE_EQ(net.Forward(Matrix::Constant(1, 1, 1e4))(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(net.Forward(Matrix::Constant(1, 1, -1e4))(0, 0), -1.0);
}

}  // namespace
}  // namespace coinsert
