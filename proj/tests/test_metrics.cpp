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

#include <cmath>
#include <vector>

#include "doctest.h"
#include "kronprec/curvature.hpp"
#include "kronprec/errors.hpp"
#include "kronprec/metrics.hpp"
#include "kronprec/rng.hpp"
#include "test_support.hpp"

using namespace kronprec;
namespace ka = kronprec::kronalg;
namespace kc = kronprec::curvature;
namespace kme = kronprec::metrics;
namespace km = kronprec::models;
using testing::random_ensemble;
using testing::random_matrix;
using testing::random_spd;

namespace {

kme::MatVec dense_operator(const Matrix& h) {
  return [h](std::span<const double> v) { return matvec(h, v); };
}

kc::CurvatureMatrix ensemble_curvature(Index m, Index n, std::size_t samples,
                                       std::uint64_t seed) {
  Rng rng(seed);
  km::GradientEnsemble e = random_ensemble(m, n, samples, rng);
  return kc::assemble(e);
}

}  // namespace

TEST_CASE("cosine similarity basics") {
  Rng rng(51);
  Matrix m = random_matrix(3, 4, rng);
  CHECK(kme::cosine_similarity(m, m) == doctest::Approx(1.0).epsilon(1e-12));

  Matrix d1 = Matrix::from_rows({{1, 0}, {0, 0}});
  Matrix d2 = Matrix::from_rows({{0, 0}, {0, 1}});
  CHECK(kme::cosine_similarity(d1, d2) == 0.0);

  CHECK(kme::cosine_similarity(Matrix::identity(2), d1) ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));

  Matrix zero(2, 2);
  CHECK_THROWS_AS(kme::cosine_similarity(zero, d1), DegenerateInputError);
}

TEST_CASE("kron cosine agrees with the dense computation") {
  Rng rng(52);
  for (int trial = 0; trial < 20; ++trial) {
    Index m = 2 + static_cast<Index>(rng.uniform_below(3));
    Index n = 1 + static_cast<Index>(rng.uniform_below(4));
    km::GradientEnsemble e = random_ensemble(m, n, 4, rng);
    kc::CurvatureMatrix h = kc::assemble(e);
    ka::KronFactors f = kc::shampoo_sq_factors(e);
    double fast = kme::cosine_similarity_kron(f, h.h);
    double dense = kme::cosine_similarity(ka::factors_to_matrix(f), h.h);
    CHECK(std::abs(fast - dense) <= 1e-10);
  }
}

TEST_CASE("hutchinson frobenius estimates") {
  // H = I: every probe contributes ||v||^2, a chi^2_d variable with
  // variance 2d, so the mean of K draws sits within 3 stderr of d.
  const Index d = 16;
  const Index k = 400;
  double est = kme::hutchinson_frobenius(
      dense_operator(Matrix::identity(d)), d, k, 61);
  double mean_sq = est * est;
  double stderr3 = 3.0 * std::sqrt(2.0 * d / static_cast<double>(k));
  CHECK(std::abs(mean_sq - d) <= stderr3);

  double zero = kme::hutchinson_frobenius(dense_operator(Matrix(4, 4)), 4, 32, 7);
  CHECK(zero == 0.0);

  Rng rng(53);
  Matrix spd = random_spd(64, rng, 0.5);
  double exact = frobenius_norm(spd);
  double probe = kme::hutchinson_frobenius(dense_operator(spd), 64, 200, 99);
  CHECK(std::abs(probe - exact) <= 0.05 * exact);

  // Deterministic under a fixed seed.
  double probe2 = kme::hutchinson_frobenius(dense_operator(spd), 64, 200, 99);
  CHECK(probe == probe2);
}

TEST_CASE("hutchinson squared-norm estimates are unbiased across seeds") {
  Rng rng(54);
  Matrix spd = random_spd(24, rng, 0.2);
  // Exact second moment of ||Hv||^2: E = ||H||_F^2; Var = 2 ||H^2||_F^2
  // (Gaussian quadratic form with A = H^2).
  Matrix h2 = matmul(spd, spd);
  double exact_sq = frobenius_norm(spd) * frobenius_norm(spd);
  double var_single = 2.0 * frobenius_norm(h2) * frobenius_norm(h2);

  const int seeds = 50;
  const Index k = 64;
  double mean = 0.0;
  for (int s = 0; s < seeds; ++s) {
    double est = kme::hutchinson_frobenius(dense_operator(spd), 24, k,
                                           1000 + static_cast<std::uint64_t>(s));
    mean += est * est / seeds;
  }
  double combined_stderr =
      std::sqrt(var_single / static_cast<double>(k * seeds));
  CHECK(std::abs(mean - exact_sq) <= 3.0 * combined_stderr);
}

TEST_CASE("probe_cosine three-step procedure") {
  Rng rng(55);
  // Estimator exactly proportional to H: with the exact target norm the
  // rescaled estimator is H itself.
  Matrix a = random_spd(4, rng);
  Matrix b = random_spd(4, rng);
  ka::KronFactors f{a, b, ka::FactorSource::custom, 0};
  Matrix h = ka::factors_to_matrix(f);
  h *= 2.5;
  double cos = kme::probe_cosine(dense_operator(h), 16, 50, 3, f,
                                 frobenius_norm(h));
  CHECK(std::abs(cos - 1.0) <= 1e-10);

  // Orthogonal estimator: cosine near zero at probe-noise scale.
  Matrix d1(2, 2), d2(2, 2);
  d1(0, 0) = 1.0;
  d2(1, 1) = 1.0;
  ka::KronFactors orth{d1, d2, ka::FactorSource::custom, 0};
  Matrix target = ka::factors_to_matrix({d2, d1, ka::FactorSource::custom, 0});
  double cos_orth = kme::probe_cosine(dense_operator(target), 4, 400, 5, orth,
                                      frobenius_norm(target));
  CHECK(std::abs(cos_orth) <= 0.15);

  // 64-dim instances: probe estimate within 0.05 of the exact cosine.
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    kc::CurvatureMatrix hc = ensemble_curvature(8, 8, 6, 500 + seed);
    km::GradientEnsemble e;  // estimator from a different ensemble
    Rng rng2(900 + seed);
    e = random_ensemble(8, 8, 5, rng2);
    ka::KronFactors est = kc::shampoo_sq_factors(e);
    double exact = kme::cosine_similarity_kron(est, hc.h);
    double probed =
        kme::probe_cosine(dense_operator(hc.h), 64, 200, 42 + seed, est);
    CHECK(std::abs(probed - exact) <= 0.05);
  }

  ka::KronFactors zero{Matrix(2, 2), Matrix(2, 2), ka::FactorSource::custom, 0};
  CHECK_THROWS_AS(kme::probe_cosine(dense_operator(Matrix::identity(4)), 4, 8,
                                    1, zero),
                  DegenerateInputError);
}

TEST_CASE("adagrad_hv accumulators equal dense H_Ada products") {
  // Single gradient, probe aligned with it.
  kme::ProbeBank bank = kme::make_probe_bank(3, 2, 11);
  std::vector<double> g{1.0, 2.0, -2.0};
  double gnorm = norm(g);
  for (Index j = 0; j < 3; ++j)
    bank.probes(0, j) = g[static_cast<std::size_t>(j)] / gnorm;
  kme::adagrad_hv(bank, g);
  for (Index j = 0; j < 3; ++j)
    CHECK(bank.hv_accumulators(0, j) ==
          doctest::Approx(gnorm * g[static_cast<std::size_t>(j)]).epsilon(1e-12));

  // Random stream vs dense accumulation.
  Rng rng(56);
  const Index dim = 12;
  kme::ProbeBank stream = kme::make_probe_bank(dim, 5, 77);
  Matrix h_ada(dim, dim);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> gt(static_cast<std::size_t>(dim));
    for (double& v : gt) v = rng.gaussian();
    kme::adagrad_hv(stream, gt);
    for (Index i = 0; i < dim; ++i)
      for (Index j = 0; j < dim; ++j)
        h_ada(i, j) += gt[static_cast<std::size_t>(i)] * gt[static_cast<std::size_t>(j)];
  }
  for (Index k = 0; k < 5; ++k) {
    std::vector<double> expected = matvec(h_ada, stream.probe(k));
    double scale = norm(expected);
    for (Index j = 0; j < dim; ++j)
      CHECK(std::abs(stream.hv_accumulators(k, j) -
                     expected[static_cast<std::size_t>(j)]) <= 1e-10 * scale);
  }

  // A zero stream leaves the accumulators at zero.
  kme::ProbeBank idle = kme::make_probe_bank(4, 3, 1);
  kme::adagrad_hv(idle, std::vector<double>{0, 0, 0, 0});
  CHECK(max_abs(idle.hv_accumulators) == 0.0);
}

TEST_CASE("spectrum report ratios") {
  Rng rng(57);
  // Exact Kronecker curvature: every ratio is 1.
  Matrix a = random_spd(3, rng);
  Matrix b = random_spd(2, rng);
  kc::CurvatureMatrix h{3, 2,
                        ka::factors_to_matrix({a, b, ka::FactorSource::custom, 0}),
                        kc::CurvatureSource::custom, 0,
                        km::LabelModeKind::enumerated};
  kme::SpectrumReport rep = kme::spectrum_report(h);
  CHECK(rep.ratio_opt == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(rep.ratio_l == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(rep.ratio_r == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(rep.v1_psd);

  // Binary logistic: n = 1 forces ratio_opt = 1.
  km::ModelConfig cfg;
  cfg.kind = km::ModelKind::binary_logistic;
  cfg.input_dim = 5;
  cfg.init_seed = 2;
  km::Model blr = km::make_model(cfg);
  data::Dataset ds = data::synth_gaussian_classes(5, 2, 4, 1.0, 58);
  kme::SpectrumReport repb = kme::spectrum_report(kc::gn_curvature_exact(blr, ds));
  CHECK(repb.ratio_opt == doctest::Approx(1.0).epsilon(1e-10));

  // Random curvature: V1 is PSD; alpha_1 = Tr(V1) matches the report.
  kc::CurvatureMatrix hr = ensemble_curvature(3, 3, 6, 59);
  kme::SpectrumReport repr = kme::spectrum_report(hr);
  CHECK(repr.v1_min_eigenvalue >= -1e-8);
  CHECK(repr.v1_psd);
  // Later right vectors are not PSD when V1 is positive definite.
  if (repr.v1_min_eigenvalue > 1e-8) {
    ka::SvdResult svd = ka::svd(ka::rearrange(hr.h, 3, 3));
    bool some_negative = false;
    for (Index i = 1; i < 3; ++i) {
      Matrix vi(3, 3);
      for (Index col = 0; col < 3; ++col)
        for (Index row = 0; row < 3; ++row)
          vi(row, col) = svd.right_vectors(col * 3 + row, i);
      if (ka::min_eigenvalue(symmetrize(vi)) < -1e-6) some_negative = true;
    }
    CHECK(some_negative);
  }
}

TEST_CASE("ratio_l is the cosine between the one-step factor and u1") {
  for (std::uint64_t seed : {71, 72, 73}) {
    kc::CurvatureMatrix h = ensemble_curvature(3, 4, 5, seed);
    kme::SpectrumReport rep = kme::spectrum_report(h);
    ka::SvdResult svd = ka::svd(ka::rearrange(h.h, 3, 4));
    Matrix u1(3, 3);
    for (Index col = 0; col < 3; ++col)
      for (Index row = 0; row < 3; ++row)
        u1(row, col) = svd.left_vectors(col * 3 + row, 0);
    ka::KronFactors one = ka::nkp_power_iteration(h.h, 3, 4, 1,
                                                  ka::identity_factors(3, 4));
    double cos = frobenius_dot(one.left, u1) /
                 (frobenius_norm(one.left) * frobenius_norm(u1));
    CHECK(std::abs(cos - rep.ratio_l) <= 1e-8);
  }
}

TEST_CASE("identity minimax check") {
  kme::MinimaxReport rep = kme::identity_minimax_check(8, 500, 13);
  CHECK(rep.property_a_ok);
  CHECK(rep.property_b_ok);
  CHECK(rep.worst_a_margin >= -1e-12);
  CHECK(rep.worst_b_margin > 0.0);

  // The equality case: a rank-1 basis matrix e1 e1^T has dot exactly
  // 1/sqrt(m) with the scaled identity.
  const Index m = 8;
  Matrix e11(m, m);
  e11(0, 0) = 1.0;
  double dot = trace(e11) / std::sqrt(static_cast<double>(m));
  CHECK(dot == doctest::Approx(1.0 / std::sqrt(static_cast<double>(m))));
}
