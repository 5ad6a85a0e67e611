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

#ifndef KRONPREC_METRICS_HPP
#define KRONPREC_METRICS_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "kronprec/curvature.hpp"
#include "kronprec/kronalg.hpp"
#include "kronprec/matrix.hpp"

namespace kronprec::metrics {

using kronalg::KronFactors;
using curvature::CurvatureMatrix;

// Tr(M1 M2^T) / (||M1||_F ||M2||_F); 1 is perfect alignment, 0 orthogonality.
double cosine_similarity(const Matrix& m1, const Matrix& m2);

// Cosine between the dense action of a factor pair and a dense H, without
// materializing the Kronecker product: Tr((L(x)R) H) is accumulated over the
// n x n grid of m x m blocks of H, and ||L(x)R||_F = ||L||_F ||R||_F.
double cosine_similarity_kron(const KronFactors& est, const Matrix& h);
double cosine_similarity_kron(const KronFactors& est, const CurvatureMatrix& h);

// Matrix-free product H * v.
using MatVec = std::function<std::vector<double>(std::span<const double>)>;

// Probe-estimated variant for matrix-free targets; delegates to the
// three-step probe_cosine procedure below.
double cosine_similarity_kron(const KronFactors& est, const MatVec& hv,
                              Index dim, Index num_probes, std::uint64_t seed);

// Seeded Gaussian probe vectors with running accumulators for streaming
// H_Ada * v products: after T gradients, accumulator k equals
// (sum_t g_t g_t^T) v_k exactly. quad_accumulators keeps sum_t (g_t^T v_k)^2.
struct ProbeBank {
  Index dim = 0;
  Matrix probes;            // K x dim, one probe per row
  Matrix hv_accumulators;   // K x dim
  std::vector<double> quad_accumulators;
  std::uint64_t seed = 0;

  Index num_probes() const { return probes.rows(); }
  std::span<const double> probe(Index k) const {
    return {probes.row(k), static_cast<std::size_t>(dim)};
  }
  std::span<const double> accumulated_hv(Index k) const {
    return {hv_accumulators.row(k), static_cast<std::size_t>(dim)};
  }
};

ProbeBank make_probe_bank(Index dim, Index num_probes, std::uint64_t seed);

// Advances every accumulator by (g^T v_k) g.
void adagrad_hv(ProbeBank& bank, std::span<const double> g);

// Evaluates hv on each probe and stores the results (for targets that are
// not gradient streams).
void fill_probe_bank(ProbeBank& bank, const MatVec& hv);

// sqrt(mean_k ||H v_k||^2) over K seeded standard-normal probes.
double hutchinson_frobenius(const MatVec& hv, Index dim, Index num_probes,
                            std::uint64_t seed);
double hutchinson_frobenius(const ProbeBank& bank);

// Probe-based cosine between a matrix-free H and a Kronecker estimator:
// estimate ||H||_F (unless the exact value is supplied), rescale the
// estimator to that norm, then estimate ||H - S||_F^2 with the same probes
// and return 1 - ||H - S||^2 / (2 ||H||^2).
double probe_cosine(const ProbeBank& bank, const KronFactors& est,
                    std::optional<double> exact_target_norm = std::nullopt);
double probe_cosine(const MatVec& hv, Index dim, Index num_probes,
                    std::uint64_t seed, const KronFactors& est,
                    std::optional<double> exact_target_norm = std::nullopt);

// Spectrum of the rearranged curvature and the identity-overlap ratios:
//   ratio_opt = sigma_1 / sqrt(sum sigma_i^2)
//   ratio_l   = alpha_1 sigma_1 / sqrt(sum alpha_i^2 sigma_i^2),
//               alpha_i = <vec(I_m), u_i> = Tr(unvec u_i)
//   ratio_r   analogously on the right side.
struct SpectrumReport {
  std::vector<double> sigmas;
  std::vector<double> alphas_left;
  std::vector<double> alphas_right;
  double ratio_opt = 0.0;
  double ratio_l = 0.0;
  double ratio_r = 0.0;
  // Reported, not asserted: min eigenvalue of unvec(v_1) and whether it
  // clears the -1e-6 * ||V_1||_F line.
  double v1_min_eigenvalue = 0.0;
  bool v1_psd = false;
};

SpectrumReport spectrum_report(const CurvatureMatrix& h);

// Checks the two halves of the identity-initialization argument on random
// unit-Frobenius PSD matrices of dimension m:
//  (a) <vec(I_m)/sqrt(m), vec(M')> >= 1/sqrt(m) - 1e-12 for every sample;
//  (b) for every sampled non-identity M, the rank-1 adversary q q^T built
//      from M's minimum-eigenvalue eigenvector has <M, q q^T> < 1/sqrt(m).
struct MinimaxReport {
  int trials = 0;
  bool property_a_ok = false;
  bool property_b_ok = false;
  double worst_a_margin = 0.0;  // min over samples of dot - 1/sqrt(m)
  double worst_b_margin = 0.0;  // min over samples of 1/sqrt(m) - dot
};

MinimaxReport identity_minimax_check(Index m, int trials, std::uint64_t seed);

}  // namespace kronprec::metrics

#endif  // KRONPREC_METRICS_HPP
