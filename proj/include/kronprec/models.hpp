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

#ifndef KRONPREC_MODELS_HPP
#define KRONPREC_MODELS_HPP

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "kronprec/data.hpp"
#include "kronprec/matrix.hpp"

namespace kronprec::models {

// A fixed zoo of tiny classifiers with hand-derived per-sample cross-entropy
// gradients of one designated weight matrix. No autodiff: the gradient path
// itself is under test (checked against central finite differences).

enum class ModelKind { binary_logistic, multinomial_linear, mlp2 };
enum class Activation { relu, tanh };

struct ModelConfig {
  ModelKind kind = ModelKind::binary_logistic;
  Index input_dim = 0;
  Index hidden_dim = 0;  // mlp2 only
  Index num_classes = 2;
  int probe_layer = 0;   // which weight matrix is analyzed
  Activation activation = Activation::tanh;  // mlp2 only
  std::uint64_t init_seed = 0;
};

// Weight layout: binary_logistic {w: d x 1}; multinomial_linear {W: C x d};
// mlp2 {W1: h x d, W2: C x h}.
struct Model {
  ModelConfig config;
  std::vector<Matrix> weights;
};

// Builds and initializes a model; validates the ModelConfig invariants
// (binary_logistic forces C = 2 and a d x 1 probe; probe m*n <= 1024).
// Weights are i.i.d. uniform(-a, a), a = sqrt(6 / (fan_in + fan_out)).
Model make_model(const ModelConfig& config);

std::pair<Index, Index> probe_shape(const ModelConfig& config);

// Class probabilities; non-negative, summing to one.
std::vector<double> forward(const Model& model, std::span<const double> x);

double ce_loss(const Model& model, std::span<const double> x, Index label);

// Cross-entropy gradient of the probe weight matrix for one example.
Matrix per_sample_gradient(const Model& model, std::span<const double> x,
                           Index label);

// Gradients of every weight matrix (for optimizer steps).
std::vector<Matrix> all_gradients(const Model& model, std::span<const double> x,
                                  Index label);

// Rank-1 split of the probe gradient, G = left * right^T with left of
// length m and right of length n. Feeds the K-FAC factor statistics.
struct GradientPair {
  std::vector<double> left;
  std::vector<double> right;
};
GradientPair per_sample_pair(const Model& model, std::span<const double> x,
                             Index label);

// Weighted collection of per-sample probe gradients; weights sum to one.
struct GradientEnsemble {
  Index m = 0, n = 0;
  std::vector<Matrix> gradients;
  std::vector<double> weights;

  std::size_t size() const { return gradients.size(); }
};

enum class LabelModeKind { sampled, real, enumerated };

struct LabelMode {
  LabelModeKind mode = LabelModeKind::enumerated;
  std::uint64_t rng_seed = 0;  // sampled mode only
};

// Exact Gauss-Newton/Fisher ensemble by class enumeration: one sample
// (G_{x,c}, p_c(x)/N) per example and class.
GradientEnsemble gn_ensemble_exact(const Model& model, const data::Dataset& ds);

// Mean probe gradient over a batch drawn i.i.d. with replacement (labels per
// label mode; enumerated is not a per-batch mode and is rejected).
Matrix sample_gradient_batch(const Model& model, const data::Dataset& ds,
                             Index batch_size, const LabelMode& labels,
                             std::uint64_t seed);

// Full-dataset mean gradients with real labels, one per weight matrix.
std::vector<Matrix> mean_gradients_real(const Model& model,
                                        const data::Dataset& ds);

double mean_loss_real(const Model& model, const data::Dataset& ds);
double accuracy_real(const Model& model, const data::Dataset& ds);

}  // namespace kronprec::models

#endif  // KRONPREC_MODELS_HPP
