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
#include <utility>

namespace coinsert {
namespace {

// tanh through the vectorized exp; Eigen only vectorizes tanh for float.
void TanhInPlace(Matrix* z) {
  z->array() = 1.0 - 2.0 / ((2.0 * z->array()).exp() + 1.0);
}

}  // namespace

Mlp::Mlp(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw ConfigError("mlp needs at least two layers");
  Eigen::Index n = 0;
  for (size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] <= 0 || sizes_[l + 1] <= 0) {
      throw ConfigError("mlp layer sizes must be positive");
    }
    offsets_.push_back(n);
    n += static_cast<Eigen::Index>(sizes_[l + 1]) * (sizes_[l] + 1);
  }
  params_ = Vector::Zero(n);
}

void Mlp::Initialize(Rng& rng, double output_gain) {
  const size_t layers = sizes_.size() - 1;
  for (size_t l = 0; l < layers; ++l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    double bound = 1.0 / std::sqrt(static_cast<double>(in));
    if (l + 1 == layers) bound *= output_gain;
    std::uniform_real_distribution<double> u(-bound, bound);
    const Eigen::Index off = offsets_[l];
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(out) * in; ++i) {
      params_[off + i] = u(rng);
    }
    params_.segment(off + static_cast<Eigen::Index>(out) * in, out).setZero();
  }
}

Matrix Mlp::Forward(const Matrix& input) const {
  Matrix h = input;
  const size_t layers = sizes_.size() - 1;
  for (size_t l = 0; l < layers; ++l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    Eigen::Map<const Matrix> w(params_.data() + offsets_[l], out, in);
    Eigen::Map<const Vector> b(params_.data() + offsets_[l] + out * in, out);
    Matrix z = w * h;
    z.colwise() += b;
    if (l + 1 < layers) TanhInPlace(&z);
    h = std::move(z);
  }
  return h;
}

Matrix Mlp::Forward(const Matrix& input, Cache* cache) const {
  cache->activations.resize(sizes_.size());
  cache->activations[0] = input;
  const size_t layers = sizes_.size() - 1;
  for (size_t l = 0; l < layers; ++l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    Eigen::Map<const Matrix> w(params_.data() + offsets_[l], out, in);
    Eigen::Map<const Vector> b(params_.data() + offsets_[l] + out * in, out);
    Matrix& z = cache->activations[l + 1];
    z.noalias() = w * cache->activations[l];
    z.colwise() += b;
    if (l + 1 < layers) TanhInPlace(&z);
  }
  return cache->activations.back();
}

void Mlp::Backward(const Cache& cache, const Matrix& dout,
                   Vector* grad) const {
  if (grad->size() != params_.size()) *grad = Vector::Zero(params_.size());
  Matrix delta = dout;
  for (size_t l = sizes_.size() - 1; l-- > 0;) {
    const int in = sizes_[l], out = sizes_[l + 1];
    Eigen::Map<const Matrix> w(params_.data() + offsets_[l], out, in);
    Eigen::Map<Matrix> gw(grad->data() + offsets_[l], out, in);
    Eigen::Map<Vector> gb(grad->data() + offsets_[l] + out * in, out);
    const Matrix& a = cache.activations[l];
    gw.noalias() += delta * a.transpose();
    gb += delta.rowwise().sum();
    if (l == 0) break;
    Matrix up = w.transpose() * delta;
    // tanh' = 1 - tanh^2 on the cached post-activation.
    delta = up.array() * (1.0 - a.array().square());
  }
}

}  // namespace coinsert
