// Copyright 2026 The kronprec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef KRONPREC_OPTIM_HPP
#define KRONPREC_OPTIM_HPP

#include <cstdint>
#include <vector>

#include "kronprec/curvature.hpp"
#include "kronprec/matrix.hpp"
#include "kronprec/models.hpp"

namespace kronprec::optim {

enum class OptimizerKind { gd, sgd_momentum, shampoo };

struct TrainConfig {
  OptimizerKind optimizer = OptimizerKind::gd;
  double lr = 0.01;
  double momentum = 0.0;
  double shampoo_ema = 0.99;
  double shampoo_damping = kronalg::kAutoDamping;
  // The update applies sym_power(L, -p/2) G sym_power(R, -p/2), so the
  // default p = 1/2 is the classical L^{-1/4} G R^{-1/4}.
  double shampoo_exponent = 0.5;
  Index batch_size = 0;  // 0 = full batch
  int steps = 25;
  std::uint64_t seed = 0;
  std::vector<int> probe_schedule;  // empty = geometric default
};

// v <- momentum * v + G;  W <- W - lr * v.
void sgd_update_matrix(Matrix& w, const Matrix& g, Matrix& velocity,
                       double lr, double momentum);

// State EMA update, then W <- W - lr * L^{-p/2} G R^{-p/2}.
void shampoo_update_matrix(Matrix& w, const Matrix& g,
                           curvature::ShampooState& state, double lr,
                           double exponent);

// Whole-model steps (one velocity / preconditioner state per weight matrix).
void sgd_step(models::Model& model, const std::vector<Matrix>& grads,
              std::vector<Matrix>& velocity, const TrainConfig& cfg);
void shampoo_step(models::Model& model, const std::vector<Matrix>& grads,
                  std::vector<curvature::ShampooState>& states,
                  const TrainConfig& cfg);

// Geometric probe schedule {0, 1, 2, 4, ...} clipped to steps, plus steps.
std::vector<int> default_probe_schedule(int steps);

}  // namespace kronprec::optim

#endif  // KRONPREC_OPTIM_HPP
