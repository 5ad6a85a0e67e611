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

#include "kronprec/optim.hpp"

#include "kronprec/errors.hpp"
#include "kronprec/kernels.hpp"

namespace kronprec::optim {

void sgd_update_matrix(Matrix& w, const Matrix& g, Matrix& velocity,
                       double lr, double momentum) {
  if (!w.same_shape(g) || !w.same_shape(velocity))
    throw DimensionError("sgd_update_matrix: shape mismatch");
  velocity *= momentum;
  velocity += g;
  kernels::axpy(-lr, velocity.data(), w.data(),
                static_cast<std::size_t>(w.size()));
}

void shampoo_update_matrix(Matrix& w, const Matrix& g,
                           curvature::ShampooState& state, double lr,
                           double exponent) {
  if (!w.same_shape(g))
    throw DimensionError("shampoo_update_matrix: shape mismatch");
  curvature::shampoo_state_update(state, g);
  Matrix pre_l = kronalg::sym_power(state.l, -exponent / 2.0, state.damping);
  Matrix pre_r = kronalg::sym_power(state.r, -exponent / 2.0, state.damping);
  Matrix update = matmul(matmul(pre_l, g), pre_r);
  kernels::axpy(-lr, update.data(), w.data(),
                static_cast<std::size_t>(w.size()));
}

void sgd_step(models::Model& model, const std::vector<Matrix>& grads,
              std::vector<Matrix>& velocity, const TrainConfig& cfg) {
  if (grads.size() != model.weights.size())
    throw DimensionError("sgd_step: gradient count mismatch");
  if (velocity.empty()) {
    for (const Matrix& w : model.weights) velocity.emplace_back(w.rows(), w.cols());
  }
  double beta = cfg.optimizer == OptimizerKind::gd ? 0.0 : cfg.momentum;
  for (std::size_t l = 0; l < grads.size(); ++l)
    sgd_update_matrix(model.weights[l], grads[l], velocity[l], cfg.lr, beta);
}

void shampoo_step(models::Model& model, const std::vector<Matrix>& grads,
                  std::vector<curvature::ShampooState>& states,
                  const TrainConfig& cfg) {
  if (grads.size() != model.weights.size())
    throw DimensionError("shampoo_step: gradient count mismatch");
  if (states.empty()) {
    for (const Matrix& w : model.weights)
      states.push_back(curvature::make_shampoo_state(
          w.rows(), w.cols(), cfg.shampoo_ema, cfg.shampoo_damping));
  }
  for (std::size_t l = 0; l < grads.size(); ++l)
    shampoo_update_matrix(model.weights[l], grads[l], states[l], cfg.lr,
                          cfg.shampoo_exponent);
}

std::vector<int> default_probe_schedule(int steps) {
  std::vector<int> out{0};
  for (int s = 1; s < steps; s *= 2) out.push_back(s);
  if (steps > 0 && out.back() != steps) out.push_back(steps);
  return out;
}

}  // namespace kronprec::optim
