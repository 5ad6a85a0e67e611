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

#include "kronprec/models.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kronprec/errors.hpp"
#include "kronprec/kernels.hpp"
#include "kronprec/rng.hpp"

namespace kronprec::models {
namespace {

void validate_config(const ModelConfig& c) {
  if (c.input_dim < 1) throw DimensionError("model: input_dim must be >= 1");
  switch (c.kind) {
    case ModelKind::binary_logistic:
      if (c.num_classes != 2)
        throw DimensionError("binary_logistic requires num_classes == 2");
      if (c.probe_layer != 0)
        throw DimensionError("binary_logistic has a single weight matrix");
      break;
    case ModelKind::multinomial_linear:
      if (c.num_classes < 2)
        throw DimensionError("multinomial_linear requires num_classes >= 2");
      if (c.probe_layer != 0)
        throw DimensionError("multinomial_linear has a single weight matrix");
      break;
    case ModelKind::mlp2:
      if (c.num_classes < 2) throw DimensionError("mlp2 requires num_classes >= 2");
      if (c.hidden_dim < 1) throw DimensionError("mlp2 requires hidden_dim >= 1");
      if (c.probe_layer != 0 && c.probe_layer != 1)
        throw DimensionError("mlp2 probe_layer must be 0 or 1");
      break;
  }
  auto [m, n] = probe_shape(c);
  if (m * n > 1024)
    throw DimensionError("probe matrix exceeds the m*n <= 1024 dense ceiling");
}

Matrix init_weight(Index rows, Index cols, Rng& rng) {
  double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix w(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) w(i, j) = rng.uniform(-bound, bound);
  return w;
}

double activate(Activation act, double z) {
  return act == Activation::relu ? (z > 0.0 ? z : 0.0) : std::tanh(z);
}

// Subgradient at 0 for relu is taken as 0.
double activate_grad(Activation act, double z) {
  if (act == Activation::relu) return z > 0.0 ? 1.0 : 0.0;
  double t = std::tanh(z);
  return 1.0 - t * t;
}

std::vector<double> softmax(std::vector<double> logits) {
  double zmax = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double& z : logits) {
    z = std::exp(z - zmax);
    total += z;
  }
  for (double& z : logits) z /= total;
  return logits;
}

struct Mlp2Trace {
  std::vector<double> hidden_pre;   // z1 = W1 x
  std::vector<double> hidden_act;   // a1
  std::vector<double> probs;        // softmax(W2 a1)
};

Mlp2Trace mlp2_forward(const Model& model, std::span<const double> x) {
  const Matrix& w1 = model.weights[0];
  const Matrix& w2 = model.weights[1];
  Mlp2Trace t;
  t.hidden_pre = matvec(w1, x);
  t.hidden_act = t.hidden_pre;
  for (double& z : t.hidden_act) z = activate(model.config.activation, z);
  t.probs = softmax(matvec(w2, t.hidden_act));
  return t;
}

void check_example(const Model& model, std::span<const double> x, Index label) {
  if (static_cast<Index>(x.size()) != model.config.input_dim)
    throw DimensionError("example dimension mismatch");
  if (label < 0 || label >= model.config.num_classes)
    throw DimensionError("label out of range");
}

// delta = p - e_label for the softmax/CE output layer.
std::vector<double> output_delta(std::vector<double> probs, Index label) {
  probs[static_cast<std::size_t>(label)] -= 1.0;
  return probs;
}

Matrix outer(std::span<const double> u, std::span<const double> v) {
  Matrix g(static_cast<Index>(u.size()), static_cast<Index>(v.size()));
  kernels::ger(1.0, u.data(), u.size(), v.data(), v.size(), g.data());
  return g;
}

}  // namespace

std::pair<Index, Index> probe_shape(const ModelConfig& c) {
  switch (c.kind) {
    case ModelKind::binary_logistic:
      return {c.input_dim, 1};
    case ModelKind::multinomial_linear:
      return {c.num_classes, c.input_dim};
    case ModelKind::mlp2:
      return c.probe_layer == 0
                 ? std::pair<Index, Index>{c.hidden_dim, c.input_dim}
                 : std::pair<Index, Index>{c.num_classes, c.hidden_dim};
  }
  throw DimensionError("unknown model kind");
}

Model make_model(const ModelConfig& config) {
  validate_config(config);
  Model model{config, {}};
  Rng rng(derive_seed(config.init_seed, "init"));
  switch (config.kind) {
    case ModelKind::binary_logistic:
      model.weights.push_back(init_weight(config.input_dim, 1, rng));
      break;
    case ModelKind::multinomial_linear:
      model.weights.push_back(init_weight(config.num_classes, config.input_dim, rng));
      break;
    case ModelKind::mlp2:
      model.weights.push_back(init_weight(config.hidden_dim, config.input_dim, rng));
      model.weights.push_back(init_weight(config.num_classes, config.hidden_dim, rng));
      break;
  }
  return model;
}

std::vector<double> forward(const Model& model, std::span<const double> x) {
  if (static_cast<Index>(x.size()) != model.config.input_dim)
    throw DimensionError("example dimension mismatch");
  switch (model.config.kind) {
    case ModelKind::binary_logistic: {
      const Matrix& w = model.weights[0];
      double z = kernels::dot(w.data(), x.data(), x.size());
      double p1 = 1.0 / (1.0 + std::exp(-z));
      return {1.0 - p1, p1};
    }
    case ModelKind::multinomial_linear:
      return softmax(matvec(model.weights[0], x));
    case ModelKind::mlp2:
      return mlp2_forward(model, x).probs;
  }
  throw DimensionError("unknown model kind");
}

double ce_loss(const Model& model, std::span<const double> x, Index label) {
  check_example(model, x, label);
  std::vector<double> p = forward(model, x);
  return -std::log(std::max(p[static_cast<std::size_t>(label)], 1e-300));
}

Matrix per_sample_gradient(const Model& model, std::span<const double> x,
                           Index label) {
  check_example(model, x, label);
  GradientPair pair = per_sample_pair(model, x, label);
  return outer(pair.left, pair.right);
}

GradientPair per_sample_pair(const Model& model, std::span<const double> x,
                             Index label) {
  check_example(model, x, label);
  switch (model.config.kind) {
    case ModelKind::binary_logistic: {
      // G = (p1 - 1{label=1}) * x as a d x 1 matrix; the whole gradient
      // lives on the m side, the n side is the scalar 1.
      std::vector<double> p = forward(model, x);
      double delta = p[1] - (label == 1 ? 1.0 : 0.0);
      std::vector<double> left(x.begin(), x.end());
      kernels::scal(delta, left.data(), left.size());
      return {std::move(left), {1.0}};
    }
    case ModelKind::multinomial_linear: {
      std::vector<double> delta = output_delta(forward(model, x), label);
      return {std::move(delta), std::vector<double>(x.begin(), x.end())};
    }
    case ModelKind::mlp2: {
      Mlp2Trace t = mlp2_forward(model, x);
      std::vector<double> d2 = output_delta(std::move(t.probs), label);
      if (model.config.probe_layer == 1) {
        return {std::move(d2), std::move(t.hidden_act)};
      }
      std::vector<double> d1 = matvec_t(model.weights[1], d2);
      for (std::size_t k = 0; k < d1.size(); ++k)
        d1[k] *= activate_grad(model.config.activation,
                               t.hidden_pre[k]);
      return {std::move(d1), std::vector<double>(x.begin(), x.end())};
    }
  }
  throw DimensionError("unknown model kind");
}

std::vector<Matrix> all_gradients(const Model& model, std::span<const double> x,
                                  Index label) {
  check_example(model, x, label);
  switch (model.config.kind) {
    case ModelKind::binary_logistic:
    case ModelKind::multinomial_linear: {
      return {per_sample_gradient(model, x, label)};
    }
    case ModelKind::mlp2: {
      Mlp2Trace t = mlp2_forward(model, x);
      std::vector<double> d2 = output_delta(std::move(t.probs), label);
      Matrix g2 = outer(d2, t.hidden_act);
      std::vector<double> d1 = matvec_t(model.weights[1], d2);
      for (std::size_t k = 0; k < d1.size(); ++k)
        d1[k] *= activate_grad(model.config.activation, t.hidden_pre[k]);
      Matrix g1 = outer(d1, x);
      return {std::move(g1), std::move(g2)};
    }
  }
  throw DimensionError("unknown model kind");
}

GradientEnsemble gn_ensemble_exact(const Model& model, const data::Dataset& ds) {
  if (model.config.num_classes > 64)
    throw DimensionError("gn_ensemble_exact: class enumeration needs C <= 64");
  if (ds.size() < 1) throw DegenerateInputError("gn_ensemble_exact: empty dataset");
  auto [m, n] = probe_shape(model.config);
  GradientEnsemble e{m, n, {}, {}};
  const double inv_n = 1.0 / static_cast<double>(ds.size());
  for (Index i = 0; i < ds.size(); ++i) {
    std::vector<double> p = forward(model, ds.example(i));
    for (Index c = 0; c < model.config.num_classes; ++c) {
      e.gradients.push_back(per_sample_gradient(model, ds.example(i), c));
      e.weights.push_back(p[static_cast<std::size_t>(c)] * inv_n);
    }
  }
  return e;
}

Matrix sample_gradient_batch(const Model& model, const data::Dataset& ds,
                             Index batch_size, const LabelMode& labels,
                             std::uint64_t seed) {
  if (batch_size < 1)
    throw DimensionError("sample_gradient_batch: batch_size must be >= 1");
  if (labels.mode == LabelModeKind::enumerated)
    throw DimensionError(
        "sample_gradient_batch: enumerated labels are not a per-batch mode");
  auto [m, n] = probe_shape(model.config);
  Rng rng(seed);
  Matrix mean(m, n);
  for (Index b = 0; b < batch_size; ++b) {
    Index idx = static_cast<Index>(
        rng.uniform_below(static_cast<std::uint64_t>(ds.size())));
    Index label;
    if (labels.mode == LabelModeKind::real) {
      label = ds.y[static_cast<std::size_t>(idx)];
    } else {
      // Sampled from the model's predictive distribution by CDF inversion.
      std::vector<double> p = forward(model, ds.example(idx));
      double u = rng.uniform();
      double cum = 0.0;
      label = model.config.num_classes - 1;
      for (Index c = 0; c < model.config.num_classes; ++c) {
        cum += p[static_cast<std::size_t>(c)];
        if (u < cum) {
          label = c;
          break;
        }
      }
    }
    Matrix g = per_sample_gradient(model, ds.example(idx), label);
    kernels::axpy(1.0 / static_cast<double>(batch_size), g.data(), mean.data(),
                  static_cast<std::size_t>(mean.size()));
  }
  return mean;
}

std::vector<Matrix> mean_gradients_real(const Model& model,
                                        const data::Dataset& ds) {
  if (ds.size() < 1) throw DegenerateInputError("mean_gradients_real: empty dataset");
  std::vector<Matrix> sums;
  const double inv_n = 1.0 / static_cast<double>(ds.size());
  for (Index i = 0; i < ds.size(); ++i) {
    std::vector<Matrix> grads =
        all_gradients(model, ds.example(i), ds.y[static_cast<std::size_t>(i)]);
    if (sums.empty()) {
      for (const Matrix& g : grads) sums.emplace_back(g.rows(), g.cols());
    }
    for (std::size_t l = 0; l < grads.size(); ++l) {
      kernels::axpy(inv_n, grads[l].data(), sums[l].data(),
                    static_cast<std::size_t>(grads[l].size()));
    }
  }
  return sums;
}

double mean_loss_real(const Model& model, const data::Dataset& ds) {
  double total = 0.0;
  for (Index i = 0; i < ds.size(); ++i)
    total += ce_loss(model, ds.example(i), ds.y[static_cast<std::size_t>(i)]);
  return total / static_cast<double>(ds.size());
}

double accuracy_real(const Model& model, const data::Dataset& ds) {
  Index hits = 0;
  for (Index i = 0; i < ds.size(); ++i) {
    std::vector<double> p = forward(model, ds.example(i));
    Index arg = static_cast<Index>(
        std::max_element(p.begin(), p.end()) - p.begin());
    if (arg == ds.y[static_cast<std::size_t>(i)]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(ds.size());
}

}  // namespace kronprec::models
