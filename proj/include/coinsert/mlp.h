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

#ifndef COINSERT_MLP_H_
#define COINSERT_MLP_H_

#include <vector>

#include <Eigen/Core>

#include "coinsert/types.h"

namespace coinsert {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Fully connected network with tanh hidden layers and a linear output layer.
// All weights and biases live in one flat vector so optimizers, checkpoints
// and finite-difference checks can treat the network as a point in R^n.
//
// Flat layout, layer by layer: W (out x in, column-major) then b (out).
class Mlp {
 public:
  // Activations kept from a batched forward pass for the backward pass.
  struct Cache {
    std::vector<Matrix> activations;  // input, hidden..., output
  };

  Mlp() = default;
  explicit Mlp(std::vector<int> layer_sizes);

  // Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), zero biases; the output
  // layer weights are further scaled by `output_gain`.
  void Initialize(Rng& rng, double output_gain = 1.0);

  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  const std::vector<int>& layer_sizes() const { return sizes_; }
  Eigen::Index num_params() const { return params_.size(); }

  const Vector& params() const { return params_; }
  Vector& mutable_params() { return params_; }

  // Columns are samples.
  Matrix Forward(const Matrix& input) const;
  Matrix Forward(const Matrix& input, Cache* cache) const;

  // Accumulates into `grad` the parameter gradient of sum_ij dout(i,j) *
  // output(i,j) for the batch cached by Forward.
  void Backward(const Cache& cache, const Matrix& dout, Vector* grad) const;

 private:
  std::vector<int> sizes_;
  std::vector<Eigen::Index> offsets_;  // start of each layer's W
  Vector params_;
};

}  // namespace coinsert

#endif  // COINSERT_MLP_H_
