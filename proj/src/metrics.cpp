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

#include "kronprec/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "kronprec/errors.hpp"
#include "kronprec/kernels.hpp"
#include "kronprec/rng.hpp"

namespace kronprec::metrics {

double cosine_similarity(const Matrix& m1, const Matrix& m2) {
  if (!m1.same_shape(m2))
    throw DimensionError("cosine_similarity: shape mismatch");
  double n1 = frobenius_norm(m1);
  double n2 = frobenius_norm(m2);
  if (n1 == 0.0 || n2 == 0.0)
    throw DegenerateInputError("cosine_similarity: zero matrix");
  return std::clamp(frobenius_dot(m1, m2) / (n1 * n2), -1.0, 1.0);
}

double cosine_similarity_kron(const KronFactors& est, const Matrix& h) {
  const Index m = est.left.rows();
  const Index n = est.right.rows();
  if (h.rows() != m * n || h.cols() != m * n)
    throw DimensionError("cosine_similarity_kron: H side mismatch");
  double est_norm = frobenius_norm(est.left) * frobenius_norm(est.right);
  double h_norm = frobenius_norm(h);
  if (est_norm == 0.0 || h_norm == 0.0)
    throw DegenerateInputError("cosine_similarity_kron: zero input");

  // Tr((L(x)R) H) = sum_{j,j'} R[j,j'] * <L, H block (j,j')>, where block
  // (j,j') is the m x m submatrix at rows jm.., cols j'm.. .
  double tr = 0.0;
  for (Index j = 0; j < n; ++j) {
    for (Index jp = 0; jp < n; ++jp) {
      double block = 0.0;
      for (Index i = 0; i < m; ++i)
        block += kernels::dot(est.left.row(i), h.row(m * j + i) + m * jp,
                              static_cast<std::size_t>(m));
      tr += est.right(j, jp) * block;
    }
  }
  return std::clamp(tr / (est_norm * h_norm), -1.0, 1.0);
}

double cosine_similarity_kron(const KronFactors& est, const CurvatureMatrix& h) {
  return cosine_similarity_kron(est, h.h);
}

double cosine_similarity_kron(const KronFactors& est, const MatVec& hv,
                              Index dim, Index num_probes, std::uint64_t seed) {
  return probe_cosine(hv, dim, num_probes, seed, est);
}

ProbeBank make_probe_bank(Index dim, Index num_probes, std::uint64_t seed) {
  if (dim < 1 || num_probes < 1)
    throw DimensionError("probe bank: dim and probe count must be >= 1");
  ProbeBank bank;
  bank.dim = dim;
  bank.seed = seed;
  bank.probes = Matrix(num_probes, dim);
  bank.hv_accumulators = Matrix(num_probes, dim);
  bank.quad_accumulators.assign(static_cast<std::size_t>(num_probes), 0.0);
  Rng rng(seed);
  for (Index k = 0; k < num_probes; ++k)
    for (Index j = 0; j < dim; ++j) bank.probes(k, j) = rng.gaussian();
  return bank;
}

void adagrad_hv(ProbeBank& bank, std::span<const double> g) {
  if (static_cast<Index>(g.size()) != bank.dim)
    throw DimensionError("adagrad_hv: gradient length mismatch");
  for (Index k = 0; k < bank.num_probes(); ++k) {
    double overlap = kernels::dot(g.data(), bank.probes.row(k), g.size());
    kernels::axpy(overlap, g.data(), bank.hv_accumulators.row(k), g.size());
    bank.quad_accumulators[static_cast<std::size_t>(k)] += overlap * overlap;
  }
}

void fill_probe_bank(ProbeBank& bank, const MatVec& hv) {
  for (Index k = 0; k < bank.num_probes(); ++k) {
    std::vector<double> out = hv(bank.probe(k));
    if (static_cast<Index>(out.size()) != bank.dim)
      throw DimensionError("fill_probe_bank: operator output length mismatch");
    std::copy(out.begin(), out.end(), bank.hv_accumulators.row(k));
    bank.quad_accumulators[static_cast<std::size_t>(k)] =
        kernels::dot(out.data(), bank.probes.row(k), out.size());
  }
}

double hutchinson_frobenius(const ProbeBank& bank) {
  double mean_sq = 0.0;
  for (Index k = 0; k < bank.num_probes(); ++k) {
    std::span<const double> hv = bank.accumulated_hv(k);
    mean_sq += kernels::dot(hv.data(), hv.data(), hv.size());
  }
  return std::sqrt(mean_sq / static_cast<double>(bank.num_probes()));
}

double hutchinson_frobenius(const MatVec& hv, Index dim, Index num_probes,
                            std::uint64_t seed) {
  ProbeBank bank = make_probe_bank(dim, num_probes, seed);
  fill_probe_bank(bank, hv);
  return hutchinson_frobenius(bank);
}

double probe_cosine(const ProbeBank& bank, const KronFactors& est,
                    std::optional<double> exact_target_norm) {
  double est_norm = frobenius_norm(est.left) * frobenius_norm(est.right);
  if (est_norm == 0.0)
    throw DegenerateInputError("probe_cosine: zero estimator");
  double target_norm =
      exact_target_norm ? *exact_target_norm : hutchinson_frobenius(bank);
  if (target_norm == 0.0)
    throw DegenerateInputError("probe_cosine: zero target norm");
  const double rescale = target_norm / est_norm;

  double residual_sq = 0.0;
  for (Index k = 0; k < bank.num_probes(); ++k) {
    std::vector<double> sv =
        kronalg::kron_matvec(est.right, est.left, bank.probe(k));
    kernels::scal(rescale, sv.data(), sv.size());
    kernels::axpy(-1.0, bank.accumulated_hv(k).data(), sv.data(), sv.size());
    residual_sq += kernels::dot(sv.data(), sv.data(), sv.size());
  }
  residual_sq /= static_cast<double>(bank.num_probes());
  return std::clamp(1.0 - residual_sq / (2.0 * target_norm * target_norm),
                    -1.0, 1.0);
}

double probe_cosine(const MatVec& hv, Index dim, Index num_probes,
                    std::uint64_t seed, const KronFactors& est,
                    std::optional<double> exact_target_norm) {
  ProbeBank bank = make_probe_bank(dim, num_probes, seed);
  fill_probe_bank(bank, hv);
  return probe_cosine(bank, est, exact_target_norm);
}

SpectrumReport spectrum_report(const CurvatureMatrix& h) {
  if (h.m * h.n > 1024)
    throw DimensionError("spectrum_report: needs m*n <= 1024");
  Matrix rearranged = kronalg::rearrange(h.h, h.m, h.n);
  kronalg::SvdResult svd = kronalg::svd(rearranged);

  SpectrumReport rep;
  rep.sigmas = svd.singular_values;
  const std::size_t count = rep.sigmas.size();
  rep.alphas_left.resize(count);
  rep.alphas_right.resize(count);
  // alpha_i = <vec(I), u_i> = Tr(unvec u_i): the trace reads off the
  // diagonal positions of the stacked vector directly.
  for (std::size_t i = 0; i < count; ++i) {
    double al = 0.0;
    for (Index k = 0; k < h.m; ++k)
      al += svd.left_vectors(k * h.m + k, static_cast<Index>(i));
    rep.alphas_left[i] = al;
    double ar = 0.0;
    for (Index k = 0; k < h.n; ++k)
      ar += svd.right_vectors(k * h.n + k, static_cast<Index>(i));
    rep.alphas_right[i] = ar;
  }

  // The left estimate after one step is l = sum_i alpha_i sigma_i u_i with
  // alpha_i the overlaps of the right-space init vec(I_n), so ratio_l is
  // weighted by alphas_right, and symmetrically for ratio_r.
  double sq_sum = 0.0, wl = 0.0, wr = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    double s2 = rep.sigmas[i] * rep.sigmas[i];
    sq_sum += s2;
    wl += rep.alphas_right[i] * rep.alphas_right[i] * s2;
    wr += rep.alphas_left[i] * rep.alphas_left[i] * s2;
  }
  if (sq_sum == 0.0)
    throw DegenerateInputError("spectrum_report: zero curvature");
  rep.ratio_opt = std::clamp(rep.sigmas[0] / std::sqrt(sq_sum), 0.0, 1.0);
  rep.ratio_l =
      std::clamp(rep.alphas_right[0] * rep.sigmas[0] / std::sqrt(wl), -1.0, 1.0);
  rep.ratio_r =
      std::clamp(rep.alphas_left[0] * rep.sigmas[0] / std::sqrt(wr), -1.0, 1.0);

  Matrix v1(h.n, h.n);
  for (Index j = 0; j < h.n; ++j)
    for (Index i = 0; i < h.n; ++i)
      v1(i, j) = svd.right_vectors(j * h.n + i, 0);
  rep.v1_min_eigenvalue = kronalg::min_eigenvalue(symmetrize(v1));
  rep.v1_psd = rep.v1_min_eigenvalue >= -1e-6 * frobenius_norm(v1);
  return rep;
}

MinimaxReport identity_minimax_check(Index m, int trials, std::uint64_t seed) {
  if (m < 2) throw DimensionError("identity_minimax_check: m >= 2");
  if (trials < 1) throw DimensionError("identity_minimax_check: trials >= 1");
  Rng rng(seed);
  const double target = 1.0 / std::sqrt(static_cast<double>(m));

  MinimaxReport rep;
  rep.trials = trials;
  rep.property_a_ok = true;
  rep.property_b_ok = true;
  rep.worst_a_margin = 1e300;
  rep.worst_b_margin = 1e300;

  for (int t = 0; t < trials; ++t) {
    Matrix a(m, m);
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < m; ++j) a(i, j) = rng.gaussian();
    Matrix psd = matmul(a, transpose(a));
    psd *= 1.0 / frobenius_norm(psd);

    // (a) the scaled identity keeps dot >= 1/sqrt(m) with every PSD sample:
    // <vec(I)/sqrt(m), vec(M')> = Tr(M')/sqrt(m).
    double dot_a = trace(psd) / std::sqrt(static_cast<double>(m));
    rep.worst_a_margin = std::min(rep.worst_a_margin, dot_a - target);
    if (dot_a < target - 1e-12) rep.property_a_ok = false;

    // (b) the same sample, viewed as a candidate initialization, is beaten
    // by the rank-1 adversary built from its smallest eigenvector.
    kronalg::SymEig eig = kronalg::sym_eig(psd);
    std::vector<double> q(static_cast<std::size_t>(m));
    for (Index k = 0; k < m; ++k) q[static_cast<std::size_t>(k)] = eig.eigenvectors(k, 0);
    // <M, q q^T> = q^T M q = lambda_min.
    double dot_b = eig.eigenvalues.front();
    rep.worst_b_margin = std::min(rep.worst_b_margin, target - dot_b);
    if (dot_b >= target) rep.property_b_ok = false;
  }
  return rep;
}

}  // namespace kronprec::metrics
