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

#ifndef KRONPREC_CURVATURE_HPP
#define KRONPREC_CURVATURE_HPP

#include <cstdint>
#include <optional>

#include "kronprec/kronalg.hpp"
#include "kronprec/matrix.hpp"
#include "kronprec/models.hpp"

namespace kronprec::curvature {

using kronalg::KronFactors;
using models::GradientEnsemble;
using models::LabelMode;
using models::LabelModeKind;
using models::Model;

enum class CurvatureSource {
  gn_exact,
  empirical_fisher,
  batch_cov,
  adagrad,
  custom
};

// Dense gradient covariance over vec'd m x n gradients.
struct CurvatureMatrix {
  Index m = 0, n = 0;
  Matrix h;  // (m*n) x (m*n)
  CurvatureSource source = CurvatureSource::custom;
  Index batch_size = 0;                         // batch_cov only
  LabelModeKind label_mode = LabelModeKind::enumerated;  // batch_cov only
};

// H = sum_i w_i vec(G_i) vec(G_i)^T.
CurvatureMatrix assemble(const GradientEnsemble& e);

CurvatureMatrix gn_curvature_exact(const Model& model, const data::Dataset& ds);

// L = E[G G^T], R = E[G^T G]. Equals one power-iteration step from identity
// on assemble(e).
KronFactors shampoo_sq_factors(const GradientEnsemble& e);

// Square roots of the shampoo_sq factors: (E[GG^T])^{1/2}, (E[G^T G])^{1/2}.
KronFactors shampoo_factors(const GradientEnsemble& e);

// Nearest-Kronecker-product factors of H.h via power iteration from identity.
KronFactors opt_kron_factors(const CurvatureMatrix& h, int steps);

// K-FAC factor statistics of the probe layer: L = E[left left^T],
// R = E[right right^T] over the per-sample rank-1 gradient split
// G = left right^T. Expectation over classes per label mode. For layers
// without weight sharing (all of this zoo) the reduce and expand variants
// coincide, so this single implementation covers both.
KronFactors kfac_factors(const Model& model, const data::Dataset& ds,
                         const LabelMode& labels);

// Batch gradients G_B over i.i.d.-with-replacement batches, one per trial.
GradientEnsemble batch_gradient_ensemble(const Model& model,
                                         const data::Dataset& ds,
                                         Index batch_size,
                                         const LabelMode& labels, int trials,
                                         std::uint64_t seed);

// Monte Carlo covariance of batch gradients: |B| E[G_B G_B^T] for sampled
// labels, E[G_B G_B^T] for real labels.
CurvatureMatrix batch_covariance(const Model& model, const data::Dataset& ds,
                                 Index batch_size, const LabelMode& labels,
                                 int trials, std::uint64_t seed);

// Exact expectation over all ordered |B|-tuples (and label assignments in
// sampled mode). Enumeration limits: dataset <= 6, classes <= 3, |B| <= 3.
CurvatureMatrix batch_covariance_enumerated(const Model& model,
                                            const data::Dataset& ds,
                                            Index batch_size,
                                            LabelModeKind label_mode);

// Full-matrix Adagrad bookkeeping: running H = sum_t g_t g_t^T (optional,
// m*n <= 1024) plus the Shampoo-style running factors sum_t G_t G_t^T and
// sum_t G_t^T G_t.
struct AdagradAccumulator {
  Index m = 0, n = 0;
  std::optional<Matrix> h_exact;
  Matrix l_run, r_run;
  long step_count = 0;
};

AdagradAccumulator make_adagrad(Index m, Index n, bool keep_exact);
void adagrad_update(AdagradAccumulator& acc, const Matrix& g);

// EMA Shampoo preconditioner state: L <- ema L + (1-ema) G G^T, same on the
// right side.
struct ShampooState {
  Matrix l, r;
  double ema = 0.99;
  double damping = kronalg::kAutoDamping;
  long step_count = 0;
};

ShampooState make_shampoo_state(Index m, Index n, double ema, double damping);
void shampoo_state_update(ShampooState& s, const Matrix& g);

// Largest numerical rank over the ensemble's samples (singular values above
// 1e-10 * sigma_1); the rank constant of the PSD dominance bounds.
Index max_sample_rank(const GradientEnsemble& e);

}  // namespace kronprec::curvature

#endif  // KRONPREC_CURVATURE_HPP
