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

#include "kronprec/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "kronprec/errors.hpp"
#include "kronprec/kernels.hpp"
#include "kronprec/rng.hpp"

namespace kronprec::curvature {

using kronalg::FactorSource;

namespace {

void require_nonempty(const GradientEnsemble& e, const char* who) {
  if (e.gradients.empty())
    throw DegenerateInputError(std::string(who) + ": empty ensemble");
}

void accumulate_outer(Matrix& h, std::span<const double> g, double weight) {
  kernels::ger(weight, g.data(), g.size(), g.data(), g.size(), h.data());
}

}  // namespace

CurvatureMatrix assemble(const GradientEnsemble& e) {
  require_nonempty(e, "assemble");
  CurvatureMatrix out{e.m, e.n, Matrix(e.m * e.n, e.m * e.n),
                      CurvatureSource::custom, 0, LabelModeKind::enumerated};
  for (std::size_t s = 0; s < e.size(); ++s) {
    std::vector<double> g = kronalg::vec(e.gradients[s]);
    accumulate_outer(out.h, g, e.weights[s]);
  }
  return out;
}

CurvatureMatrix gn_curvature_exact(const Model& model, const data::Dataset& ds) {
  CurvatureMatrix h = assemble(models::gn_ensemble_exact(model, ds));
  h.source = CurvatureSource::gn_exact;
  return h;
}

KronFactors shampoo_sq_factors(const GradientEnsemble& e) {
  require_nonempty(e, "shampoo_sq_factors");
  Matrix l(e.m, e.m);
  Matrix r(e.n, e.n);
  for (std::size_t s = 0; s < e.size(); ++s) {
    const Matrix& g = e.gradients[s];
    const Matrix gt = transpose(g);
    // L += w G G^T accumulated row by row; same for R with G^T G.
    for (Index i = 0; i < e.m; ++i)
      for (Index k = 0; k < e.n; ++k)
        kernels::axpy(e.weights[s] * g(i, k), gt.row(k), l.row(i),
                      static_cast<std::size_t>(e.m));
    for (Index i = 0; i < e.n; ++i)
      for (Index k = 0; k < e.m; ++k)
        kernels::axpy(e.weights[s] * gt(i, k), g.row(k), r.row(i),
                      static_cast<std::size_t>(e.n));
  }
  return {std::move(l), std::move(r), FactorSource::shampoo_sq, 1};
}

KronFactors shampoo_factors(const GradientEnsemble& e) {
  KronFactors sq = shampoo_sq_factors(e);
  return {kronalg::sym_power(sq.left, 0.5, 0.0),
          kronalg::sym_power(sq.right, 0.5, 0.0), FactorSource::shampoo, 0};
}

KronFactors opt_kron_factors(const CurvatureMatrix& h, int steps) {
  KronFactors out = kronalg::nkp_power_iteration(
      h.h, h.m, h.n, steps, kronalg::identity_factors(h.m, h.n));
  out.source = FactorSource::opt_kron;
  out.power_steps = steps;
  return out;
}

KronFactors kfac_factors(const Model& model, const data::Dataset& ds,
                         const LabelMode& labels) {
  if (ds.size() < 1) throw DegenerateInputError("kfac_factors: empty dataset");
  auto [m, n] = models::probe_shape(model.config);
  Matrix l(m, m);
  Matrix r(n, n);
  const double inv_n = 1.0 / static_cast<double>(ds.size());

  auto add_pair = [&](const models::GradientPair& pair, double weight) {
    kernels::ger(weight, pair.left.data(), pair.left.size(), pair.left.data(),
                 pair.left.size(), l.data());
    kernels::ger(weight, pair.right.data(), pair.right.size(),
                 pair.right.data(), pair.right.size(), r.data());
  };

  switch (labels.mode) {
    case LabelModeKind::enumerated: {
      if (model.config.num_classes > 64)
        throw DimensionError("kfac_factors: class enumeration needs C <= 64");
      for (Index i = 0; i < ds.size(); ++i) {
        std::vector<double> p = models::forward(model, ds.example(i));
        for (Index c = 0; c < model.config.num_classes; ++c)
          add_pair(models::per_sample_pair(model, ds.example(i), c),
                   p[static_cast<std::size_t>(c)] * inv_n);
      }
      break;
    }
    case LabelModeKind::real: {
      for (Index i = 0; i < ds.size(); ++i)
        add_pair(models::per_sample_pair(model, ds.example(i),
                                         ds.y[static_cast<std::size_t>(i)]),
                 inv_n);
      break;
    }
    case LabelModeKind::sampled: {
      Rng rng(labels.rng_seed);
      for (Index i = 0; i < ds.size(); ++i) {
        std::vector<double> p = models::forward(model, ds.example(i));
        double u = rng.uniform();
        double cum = 0.0;
        Index c = model.config.num_classes - 1;
        for (Index k = 0; k < model.config.num_classes; ++k) {
          cum += p[static_cast<std::size_t>(k)];
          if (u < cum) {
            c = k;
            break;
          }
        }
        add_pair(models::per_sample_pair(model, ds.example(i), c), inv_n);
      }
      break;
    }
  }
  return {std::move(l), std::move(r), FactorSource::kfac, 0};
}

GradientEnsemble batch_gradient_ensemble(const Model& model,
                                         const data::Dataset& ds,
                                         Index batch_size,
                                         const LabelMode& labels, int trials,
                                         std::uint64_t seed) {
  if (trials < 1) throw DimensionError("batch_gradient_ensemble: trials >= 1");
  auto [m, n] = models::probe_shape(model.config);
  GradientEnsemble e{m, n, {}, {}};
  const double w = 1.0 / static_cast<double>(trials);
  for (int t = 0; t < trials; ++t) {
    std::uint64_t trial_seed =
        derive_seed(seed, "batch", static_cast<std::uint64_t>(t));
    e.gradients.push_back(
        models::sample_gradient_batch(model, ds, batch_size, labels, trial_seed));
    e.weights.push_back(w);
  }
  return e;
}

CurvatureMatrix batch_covariance(const Model& model, const data::Dataset& ds,
                                 Index batch_size, const LabelMode& labels,
                                 int trials, std::uint64_t seed) {
  GradientEnsemble e =
      batch_gradient_ensemble(model, ds, batch_size, labels, trials, seed);
  CurvatureMatrix h = assemble(e);
  if (labels.mode == LabelModeKind::sampled)
    h.h *= static_cast<double>(batch_size);
  h.source = (labels.mode == LabelModeKind::real && batch_size == 1)
                 ? CurvatureSource::empirical_fisher
                 : CurvatureSource::batch_cov;
  h.batch_size = batch_size;
  h.label_mode = labels.mode;
  return h;
}

CurvatureMatrix batch_covariance_enumerated(const Model& model,
                                            const data::Dataset& ds,
                                            Index batch_size,
                                            LabelModeKind label_mode) {
  if (ds.size() > 6 || model.config.num_classes > 3 || batch_size > 3 ||
      batch_size < 1)
    throw DimensionError(
        "batch_covariance_enumerated: limits are dataset <= 6, C <= 3, |B| <= 3");

  auto [m, n] = models::probe_shape(model.config);
  const Index nn = ds.size();
  const Index cc = model.config.num_classes;
  const double tuple_w = std::pow(static_cast<double>(nn),
                                  -static_cast<double>(batch_size));

  // Per-example forward passes and per-class gradients, computed once.
  std::vector<std::vector<double>> probs;
  std::vector<std::vector<Matrix>> grads;
  for (Index i = 0; i < nn; ++i) {
    probs.push_back(models::forward(model, ds.example(i)));
    std::vector<Matrix> per_class;
    for (Index c = 0; c < cc; ++c)
      per_class.push_back(models::per_sample_gradient(model, ds.example(i), c));
    grads.push_back(std::move(per_class));
  }

  CurvatureMatrix out{m, n, Matrix(m * n, m * n), CurvatureSource::batch_cov,
                      batch_size, label_mode};

  // Ordered index tuples with replacement, odometer-style.
  std::vector<Index> tuple(static_cast<std::size_t>(batch_size), 0);
  const double inv_b = 1.0 / static_cast<double>(batch_size);
  bool done = false;
  while (!done) {
    if (label_mode == LabelModeKind::real) {
      Matrix gb(m, n);
      for (Index b = 0; b < batch_size; ++b) {
        Index i = tuple[static_cast<std::size_t>(b)];
        const Matrix& g =
            grads[static_cast<std::size_t>(i)]
                 [static_cast<std::size_t>(ds.y[static_cast<std::size_t>(i)])];
        kernels::axpy(inv_b, g.data(), gb.data(),
                      static_cast<std::size_t>(gb.size()));
      }
      accumulate_outer(out.h, kronalg::vec(gb), tuple_w);
    } else if (label_mode == LabelModeKind::sampled) {
      std::vector<Index> labels_assign(static_cast<std::size_t>(batch_size), 0);
      bool labels_done = false;
      while (!labels_done) {
        double prob = tuple_w;
        Matrix gb(m, n);
        for (Index b = 0; b < batch_size; ++b) {
          Index i = tuple[static_cast<std::size_t>(b)];
          Index c = labels_assign[static_cast<std::size_t>(b)];
          prob *= probs[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
          kernels::axpy(
              inv_b,
              grads[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)].data(),
              gb.data(), static_cast<std::size_t>(gb.size()));
        }
        accumulate_outer(out.h, kronalg::vec(gb), prob);
        labels_done = true;
        for (Index b = 0; b < batch_size; ++b) {
          if (++labels_assign[static_cast<std::size_t>(b)] < cc) {
            labels_done = false;
            break;
          }
          labels_assign[static_cast<std::size_t>(b)] = 0;
        }
      }
    } else {
      throw DimensionError(
          "batch_covariance_enumerated: label mode must be sampled or real");
    }
    done = true;
    for (Index b = 0; b < batch_size; ++b) {
      if (++tuple[static_cast<std::size_t>(b)] < nn) {
        done = false;
        break;
      }
      tuple[static_cast<std::size_t>(b)] = 0;
    }
  }

  if (label_mode == LabelModeKind::sampled)
    out.h *= static_cast<double>(batch_size);
  return out;
}

AdagradAccumulator make_adagrad(Index m, Index n, bool keep_exact) {
  AdagradAccumulator acc;
  acc.m = m;
  acc.n = n;
  acc.l_run = Matrix(m, m);
  acc.r_run = Matrix(n, n);
  if (keep_exact) {
    if (m * n > 1024)
      throw DimensionError("adagrad: exact H storage needs m*n <= 1024");
    acc.h_exact = Matrix(m * n, m * n);
  }
  return acc;
}

void adagrad_update(AdagradAccumulator& acc, const Matrix& g) {
  if (g.rows() != acc.m || g.cols() != acc.n)
    throw DimensionError("adagrad_update: gradient shape mismatch");
  const Matrix gt = transpose(g);
  for (Index i = 0; i < acc.m; ++i)
    for (Index k = 0; k < acc.n; ++k)
      kernels::axpy(g(i, k), gt.row(k), acc.l_run.row(i),
                    static_cast<std::size_t>(acc.m));
  for (Index i = 0; i < acc.n; ++i)
    for (Index k = 0; k < acc.m; ++k)
      kernels::axpy(gt(i, k), g.row(k), acc.r_run.row(i),
                    static_cast<std::size_t>(acc.n));
  if (acc.h_exact) accumulate_outer(*acc.h_exact, kronalg::vec(g), 1.0);
  ++acc.step_count;
}

ShampooState make_shampoo_state(Index m, Index n, double ema, double damping) {
  if (ema < 0.0 || ema >= 1.0)
    throw DimensionError("shampoo state: ema coefficient must be in [0, 1)");
  return {Matrix(m, m), Matrix(n, n), ema, damping, 0};
}

void shampoo_state_update(ShampooState& s, const Matrix& g) {
  if (g.rows() != s.l.rows() || g.cols() != s.r.rows())
    throw DimensionError("shampoo_state_update: gradient shape mismatch");
  s.l *= s.ema;
  s.r *= s.ema;
  const Matrix gt = transpose(g);
  const double w = 1.0 - s.ema;
  for (Index i = 0; i < g.rows(); ++i)
    for (Index k = 0; k < g.cols(); ++k)
      kernels::axpy(w * g(i, k), gt.row(k), s.l.row(i),
                    static_cast<std::size_t>(g.rows()));
  for (Index i = 0; i < g.cols(); ++i)
    for (Index k = 0; k < g.rows(); ++k)
      kernels::axpy(w * gt(i, k), g.row(k), s.r.row(i),
                    static_cast<std::size_t>(g.cols()));
  ++s.step_count;
}

Index max_sample_rank(const GradientEnsemble& e) {
  require_nonempty(e, "max_sample_rank");
  Index best = 0;
  for (const Matrix& g : e.gradients) {
    kronalg::SvdResult s = kronalg::svd(g);
    Index rank = 0;
    double top = s.singular_values.empty() ? 0.0 : s.singular_values.front();
    for (double sigma : s.singular_values)
      if (sigma > 1e-10 * top) ++rank;
    best = std::max(best, rank);
  }
  return std::max<Index>(best, 1);
}

}  // namespace kronprec::curvature
