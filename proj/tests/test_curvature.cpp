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
namespace kc = kronprec::curvature;
namespace ka = kronprec::kronalg;
namespace km = kronprec::models;
using testing::random_ensemble;
using testing::random_matrix;

namespace {

km::Model zero_binary(Index d) {
  km::ModelConfig cfg;
  cfg.kind = km::ModelKind::binary_logistic;
  cfg.input_dim = d;
  km::Model m = km::make_model(cfg);
  m.weights[0] = Matrix(d, 1);
  return m;
}

data::Dataset small_dataset(Index n, Index d, Index classes,
                            std::uint64_t seed) {
  return data::synth_gaussian_classes(d, classes, (n + classes - 1) / classes,
                                      1.0, seed);
}

km::GradientEnsemble single_gradient_ensemble() {
  km::GradientEnsemble e{2, 2, {}, {}};
  e.gradients.push_back(Matrix::from_rows({{1, 0}, {0, 0}}));
  e.weights.push_back(1.0);
  return e;
}

}  // namespace

TEST_CASE("assemble builds the weighted outer-product covariance") {
  kc::CurvatureMatrix h = kc::assemble(single_gradient_ensemble());
  Matrix expected(4, 4);
  expected(0, 0) = 1.0;
  CHECK(max_abs_diff(h.h, expected) == 0.0);

  km::GradientEnsemble two{2, 2, {}, {}};
  two.gradients.push_back(Matrix::from_rows({{1, 0}, {0, 0}}));
  two.gradients.push_back(Matrix::from_rows({{0, 0}, {0, 1}}));
  two.weights = {0.5, 0.5};
  kc::CurvatureMatrix h2 = kc::assemble(two);
  Matrix expected2(4, 4);
  expected2(0, 0) = 0.5;
  expected2(3, 3) = 0.5;
  CHECK(max_abs_diff(h2.h, expected2) == 0.0);

  Rng rng(31);
  km::GradientEnsemble e = random_ensemble(3, 2, 5, rng);
  kc::CurvatureMatrix h3 = kc::assemble(e);
  CHECK(asymmetry(h3.h) <= 1e-12);
  double expected_trace = 0.0;
  for (std::size_t s = 0; s < e.size(); ++s) {
    double f = frobenius_norm(e.gradients[s]);
    expected_trace += e.weights[s] * f * f;
  }
  CHECK(trace(h3.h) == doctest::Approx(expected_trace).epsilon(1e-12));
  CHECK(ka::min_eigenvalue(h3.h) >= -1e-10 * trace(h3.h) / 6.0);

  km::GradientEnsemble empty{2, 2, {}, {}};
  CHECK_THROWS_AS(kc::assemble(empty), DegenerateInputError);
}

TEST_CASE("shampoo_sq matches the factor formulas and Proposition 1") {
  km::GradientEnsemble single = single_gradient_ensemble();
  ka::KronFactors f = kc::shampoo_sq_factors(single);
  CHECK(f.left(0, 0) == 1.0);
  CHECK(f.left(1, 1) == 0.0);
  CHECK(f.right(0, 0) == 1.0);
  CHECK(f.right(1, 1) == 0.0);
  kc::CurvatureMatrix h = kc::assemble(single);
  CHECK(max_abs_diff(ka::factors_to_matrix(f), h.h) == 0.0);
  CHECK(metrics::cosine_similarity_kron(f, h.h) == doctest::Approx(1.0));

  // One step of power iteration from identity, on every random ensemble.
  Rng rng(32);
  for (int trial = 0; trial < 50; ++trial) {
    Index m = 2 + static_cast<Index>(rng.uniform_below(5));
    Index n = 1 + static_cast<Index>(rng.uniform_below(5));
    km::GradientEnsemble e =
        random_ensemble(m, n, 1 + rng.uniform_below(8), rng);
    ka::KronFactors sq = kc::shampoo_sq_factors(e);
    ka::KronFactors pow = ka::nkp_power_iteration(
        kc::assemble(e).h, m, n, 1, ka::identity_factors(m, n));
    double scale = std::max(max_abs(sq.left), max_abs(sq.right));
    CHECK(max_abs_diff(sq.left, pow.left) <= 1e-12 * scale);
    CHECK(max_abs_diff(sq.right, pow.right) <= 1e-12 * scale);
  }
}

TEST_CASE("binary logistic: right factor is the scalar trace, cosine is one") {
  km::Model model = zero_binary(5);
  data::Dataset ds = small_dataset(6, 5, 2, 41);
  km::GradientEnsemble e = km::gn_ensemble_exact(model, ds);
  CHECK(e.n == 1);
  ka::KronFactors f = kc::shampoo_sq_factors(e);
  CHECK(f.right.rows() == 1);
  CHECK(f.right(0, 0) == doctest::Approx(trace(f.left)).epsilon(1e-12));
  kc::CurvatureMatrix h = kc::assemble(e);
  CHECK(metrics::cosine_similarity_kron(f, h.h) >= 1.0 - 1e-12);
}

TEST_CASE("shampoo factors are square roots of shampoo_sq") {
  km::GradientEnsemble single = single_gradient_ensemble();
  ka::KronFactors f = kc::shampoo_factors(single);
  // diag(1, 0) is idempotent under the matrix square root.
  CHECK(max_abs_diff(f.left, Matrix::from_rows({{1, 0}, {0, 0}})) <= 1e-12);
  CHECK(max_abs_diff(f.right, Matrix::from_rows({{1, 0}, {0, 0}})) <= 1e-12);

  Rng rng(33);
  km::GradientEnsemble e = random_ensemble(4, 3, 6, rng);
  ka::KronFactors sq = kc::shampoo_sq_factors(e);
  ka::KronFactors sh = kc::shampoo_factors(e);
  CHECK(max_abs_diff(matmul(sh.left, sh.left), sq.left) <=
        1e-8 * max_abs(sq.left));
  CHECK(max_abs_diff(matmul(sh.right, sh.right), sq.right) <=
        1e-8 * max_abs(sq.right));
}

TEST_CASE("Lemma 3: rank-scaled Shampoo bound dominates the covariance") {
  Rng rng(34);
  for (int trial = 0; trial < 25; ++trial) {
    Index m = 2 + static_cast<Index>(rng.uniform_below(3));
    Index n = 2 + static_cast<Index>(rng.uniform_below(3));
    km::GradientEnsemble e =
        random_ensemble(m, n, 1 + rng.uniform_below(5), rng);
    kc::CurvatureMatrix h = kc::assemble(e);
    Index r = kc::max_sample_rank(e);
    ka::KronFactors sh = kc::shampoo_factors(e);
    Matrix bound = ka::factors_to_matrix(sh);
    bound *= static_cast<double>(r);
    Matrix diff = bound - h.h;
    double scale = std::max(trace(bound), trace(h.h));
    CHECK(ka::min_eigenvalue(diff) >= -1e-8 * scale);
  }
}

TEST_CASE("opt_kron_factors: exact Kronecker input and Corollary 1") {
  Rng rng(35);
  Matrix a = testing::random_spd(3, rng);
  Matrix b = testing::random_spd(2, rng);
  kc::CurvatureMatrix h{3, 2,
                        ka::factors_to_matrix({a, b, ka::FactorSource::custom, 0}),
                        kc::CurvatureSource::custom, 0,
                        km::LabelModeKind::enumerated};
  ka::KronFactors f1 = kc::opt_kron_factors(h, 1);
  CHECK(metrics::cosine_similarity_kron(f1, h.h) >= 1.0 - 1e-10);
  // Corollary: rank-1 rearrangement pins the scale via the left trace.
  Matrix recon = ka::factors_to_matrix(f1);
  recon *= 1.0 / trace(f1.left);
  CHECK(max_abs_diff(recon, h.h) <= 1e-10 * max_abs(h.h));

  // k = 1 equals shampoo_sq of the generating ensemble.
  km::GradientEnsemble e = random_ensemble(3, 3, 4, rng);
  kc::CurvatureMatrix he = kc::assemble(e);
  ka::KronFactors sq = kc::shampoo_sq_factors(e);
  ka::KronFactors opt1 = kc::opt_kron_factors(he, 1);
  CHECK(max_abs_diff(sq.left, opt1.left) <= 1e-12 * max_abs(sq.left));
  CHECK(max_abs_diff(sq.right, opt1.right) <= 1e-12 * max_abs(sq.right));

  // Binary logistic: n = 1 forces a rank-1 rearrangement, so the corollary
  // reconstruction is exact there too.
  km::Model blr = zero_binary(4);
  data::Dataset ds = small_dataset(5, 4, 2, 42);
  kc::CurvatureMatrix hb = kc::gn_curvature_exact(blr, ds);
  ka::KronFactors fb = kc::opt_kron_factors(hb, 1);
  Matrix reconb = ka::factors_to_matrix(fb);
  reconb *= 1.0 / trace(fb.left);
  CHECK(max_abs_diff(reconb, hb.h) <= 1e-10 * max_abs(hb.h));
}

TEST_CASE("kfac factors") {
  // Single sample: K-FAC reproduces the rank-1 covariance exactly.
  km::Model blr = zero_binary(4);
  data::Dataset one;
  one.x = Matrix::from_rows({{0.5, -1.0, 2.0, 0.25}});
  one.y = {0};
  one.num_classes = 2;
  // A single datapoint still enumerates two classes; restrict to one class
  // by using the real-label mode.
  ka::KronFactors f =
      kc::kfac_factors(blr, one, {km::LabelModeKind::real, 0});
  Matrix g = km::per_sample_gradient(blr, one.example(0), 0);
  Matrix h = Matrix(4, 4);
  std::vector<double> gv = ka::vec(g);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 4; ++j)
      h(i, j) = gv[static_cast<std::size_t>(i)] * gv[static_cast<std::size_t>(j)];
  CHECK(metrics::cosine_similarity_kron(f, h) >= 1.0 - 1e-12);

  // Binary logistic: K-FAC equals shampoo_sq up to a scalar, so the cosines
  // against the exact curvature agree.
  data::Dataset ds = small_dataset(6, 4, 2, 43);
  km::ModelConfig cfg;
  cfg.kind = km::ModelKind::binary_logistic;
  cfg.input_dim = 4;
  cfg.init_seed = 3;
  km::Model trained = km::make_model(cfg);
  kc::CurvatureMatrix hb = kc::gn_curvature_exact(trained, ds);
  ka::KronFactors kf =
      kc::kfac_factors(trained, ds, {km::LabelModeKind::enumerated, 0});
  ka::KronFactors sq = kc::shampoo_sq_factors(km::gn_ensemble_exact(trained, ds));
  double ck = metrics::cosine_similarity_kron(kf, hb.h);
  double cs = metrics::cosine_similarity_kron(sq, hb.h);
  CHECK(std::abs(ck - cs) <= 1e-10);

  // mlp2: the optimal Kronecker approximation dominates K-FAC.
  km::ModelConfig mcfg;
  mcfg.kind = km::ModelKind::mlp2;
  mcfg.input_dim = 4;
  mcfg.hidden_dim = 4;
  mcfg.num_classes = 3;
  mcfg.probe_layer = 1;
  mcfg.init_seed = 7;
  km::Model mlp = km::make_model(mcfg);
  data::Dataset ds3 = small_dataset(9, 4, 3, 44);
  kc::CurvatureMatrix hm = kc::gn_curvature_exact(mlp, ds3);
  ka::KronFactors kfm =
      kc::kfac_factors(mlp, ds3, {km::LabelModeKind::enumerated, 0});
  ka::KronFactors opt5 = kc::opt_kron_factors(hm, 5);
  CHECK(metrics::cosine_similarity_kron(kfm, hm.h) <=
        metrics::cosine_similarity_kron(opt5, hm.h) + 1e-9);
}

TEST_CASE("kfac sampled mode is seeded and converges to the enumerated stats") {
  km::ModelConfig cfg;
  cfg.kind = km::ModelKind::multinomial_linear;
  cfg.input_dim = 3;
  cfg.num_classes = 3;
  cfg.init_seed = 9;
  km::Model model = km::make_model(cfg);
  data::Dataset ds = small_dataset(400, 3, 3, 48);

  ka::KronFactors a =
      kc::kfac_factors(model, ds, {km::LabelModeKind::sampled, 777});
  ka::KronFactors b =
      kc::kfac_factors(model, ds, {km::LabelModeKind::sampled, 777});
  CHECK(max_abs_diff(a.left, b.left) == 0.0);
  CHECK(max_abs_diff(a.right, b.right) == 0.0);

  ka::KronFactors exact =
      kc::kfac_factors(model, ds, {km::LabelModeKind::enumerated, 0});
  // One sampled label per example: a 400-draw Monte Carlo of the class
  // expectation, so agreement at the 1/sqrt(N) scale.
  CHECK(max_abs_diff(a.left, exact.left) <= 0.25 * max_abs(exact.left));
  CHECK(metrics::cosine_similarity(a.left, exact.left) >= 0.95);
}

TEST_CASE("batch covariance: sampled labels are batch-size invariant") {
  km::ModelConfig cfg;
  cfg.kind = km::ModelKind::binary_logistic;
  cfg.input_dim = 3;
  cfg.init_seed = 5;
  km::Model model = km::make_model(cfg);
  data::Dataset ds = small_dataset(4, 3, 2, 45);

  kc::CurvatureMatrix exact = kc::gn_curvature_exact(model, ds);
  for (Index b : {1, 2, 3}) {
    kc::CurvatureMatrix hb = kc::batch_covariance_enumerated(
        model, ds, b, km::LabelModeKind::sampled);
    CHECK(max_abs_diff(hb.h, exact.h) <= 1e-12 * max_abs(exact.h));
  }
}

TEST_CASE("batch covariance: real labels interpolate with 1/|B|") {
  km::ModelConfig cfg;
  cfg.kind = km::ModelKind::multinomial_linear;
  cfg.input_dim = 3;
  cfg.num_classes = 3;
  cfg.init_seed = 6;
  km::Model model = km::make_model(cfg);
  data::Dataset ds = small_dataset(5, 3, 3, 46);

  // Empirical Fisher and squared mean gradient, assembled directly.
  auto [m, n] = km::probe_shape(cfg);
  Matrix ef(m * n, m * n);
  std::vector<double> gbar(static_cast<std::size_t>(m * n), 0.0);
  for (Index i = 0; i < ds.size(); ++i) {
    std::vector<double> g = ka::vec(km::per_sample_gradient(
        model, ds.example(i), ds.y[static_cast<std::size_t>(i)]));
    for (Index p = 0; p < m * n; ++p) {
      gbar[static_cast<std::size_t>(p)] += g[static_cast<std::size_t>(p)] / ds.size();
      for (Index q = 0; q < m * n; ++q)
        ef(p, q) += g[static_cast<std::size_t>(p)] * g[static_cast<std::size_t>(q)] /
                    ds.size();
    }
  }

  for (Index b : {1, 2, 3}) {
    kc::CurvatureMatrix hb = kc::batch_covariance_enumerated(
        model, ds, b, km::LabelModeKind::real);
    Matrix expected(m * n, m * n);
    double inv_b = 1.0 / static_cast<double>(b);
    for (Index p = 0; p < m * n; ++p)
      for (Index q = 0; q < m * n; ++q)
        expected(p, q) = inv_b * ef(p, q) +
                         (1.0 - inv_b) * gbar[static_cast<std::size_t>(p)] *
                             gbar[static_cast<std::size_t>(q)];
    CHECK(max_abs_diff(hb.h, expected) <= 1e-12 * max_abs(expected));
  }

  // |B| = 1 with real labels is exactly the empirical Fisher.
  kc::CurvatureMatrix h1 = kc::batch_covariance_enumerated(
      model, ds, 1, km::LabelModeKind::real);
  CHECK(max_abs_diff(h1.h, ef) <= 1e-12 * max_abs(ef));
  kc::CurvatureMatrix h1mc = kc::batch_covariance(
      model, ds, 1, {km::LabelModeKind::real, 0}, 400, 77);
  CHECK(h1mc.source == kc::CurvatureSource::empirical_fisher);

  CHECK_THROWS_AS(kc::batch_covariance_enumerated(model, ds, 4,
                                                  km::LabelModeKind::real),
                  DimensionError);
}

TEST_CASE("Monte Carlo batch covariance tracks the enumerated expectation") {
  km::ModelConfig cfg;
  cfg.kind = km::ModelKind::binary_logistic;
  cfg.input_dim = 3;
  cfg.init_seed = 8;
  km::Model model = km::make_model(cfg);
  data::Dataset ds = small_dataset(4, 3, 2, 47);

  kc::CurvatureMatrix exact = kc::batch_covariance_enumerated(
      model, ds, 2, km::LabelModeKind::sampled);
  const int trials = 2000;
  kc::CurvatureMatrix mc = kc::batch_covariance(
      model, ds, 2, {km::LabelModeKind::sampled, 0}, trials, 123);
  // Entry scale of the Monte Carlo noise: the summands are bounded by the
  // largest |B|-scaled outer-product entry, so 3 stderr with a generous
  // variance proxy.
  double entry_scale = max_abs(exact.h);
  double tol = 3.0 * 2.0 * entry_scale / std::sqrt(static_cast<double>(trials));
  CHECK(max_abs_diff(mc.h, exact.h) <= tol);
}

TEST_CASE("adagrad accumulator bookkeeping") {
  kc::AdagradAccumulator acc = kc::make_adagrad(2, 2, true);
  kc::adagrad_update(acc, Matrix::from_rows({{1, 0}, {0, 0}}));
  CHECK(acc.step_count == 1);
  CHECK((*acc.h_exact)(0, 0) == 1.0);
  CHECK(max_abs(acc.l_run - Matrix::from_rows({{1, 0}, {0, 0}})) == 0.0);

  Rng rng(36);
  kc::AdagradAccumulator run = kc::make_adagrad(3, 2, true);
  for (int t = 0; t < 10; ++t)
    kc::adagrad_update(run, random_matrix(3, 2, rng));
  CHECK(trace(*run.h_exact) ==
        doctest::Approx(trace(run.l_run)).epsilon(1e-8));
  CHECK(trace(run.l_run) == doctest::Approx(trace(run.r_run)).epsilon(1e-8));

  CHECK_THROWS_AS(kc::make_adagrad(40, 40, true), DimensionError);
  CHECK_THROWS_AS(kc::adagrad_update(run, Matrix(2, 2)), DimensionError);
}

TEST_CASE("Lemma 2: damped Adagrad bound dominates the scaled covariance") {
  Rng rng(37);
  for (int trial = 0; trial < 10; ++trial) {
    Index m = 2 + static_cast<Index>(rng.uniform_below(3));
    Index n = 2 + static_cast<Index>(rng.uniform_below(3));
    kc::AdagradAccumulator acc = kc::make_adagrad(m, n, true);
    km::GradientEnsemble stream{m, n, {}, {}};
    int steps = 2 + static_cast<int>(rng.uniform_below(5));
    for (int t = 0; t < steps; ++t) {
      Matrix g = random_matrix(m, n, rng);
      kc::adagrad_update(acc, g);
      stream.gradients.push_back(g);
      stream.weights.push_back(1.0 / steps);
    }
    Index r = kc::max_sample_rank(stream);
    const double eps = 1e-3;
    Matrix l_damped = acc.l_run;
    for (Index i = 0; i < m; ++i) l_damped(i, i) += eps;
    Matrix r_damped = acc.r_run;
    for (Index i = 0; i < n; ++i) r_damped(i, i) += eps;
    ka::KronFactors sqrt_pair{ka::sym_power(l_damped, 0.5, 0.0),
                              ka::sym_power(r_damped, 0.5, 0.0),
                              ka::FactorSource::custom, 0};
    Matrix bound = ka::factors_to_matrix(sqrt_pair);
    Matrix target = *acc.h_exact;
    target *= 1.0 / static_cast<double>(r);
    for (Index i = 0; i < m * n; ++i) target(i, i) += eps;
    Matrix diff = bound - target;
    double scale = std::max(trace(bound), trace(target));
    CHECK(ka::min_eigenvalue(diff) >= -1e-8 * scale);
  }
}

TEST_CASE("shampoo EMA state") {
  kc::ShampooState s = kc::make_shampoo_state(2, 2, 0.0, 0.0);
  Matrix g = Matrix::from_rows({{1, 2}, {3, 4}});
  kc::shampoo_state_update(s, g);
  CHECK(max_abs_diff(s.l, matmul(g, transpose(g))) <= 1e-14);
  CHECK(max_abs_diff(s.r, matmul(transpose(g), g)) <= 1e-14);

  kc::ShampooState decay = kc::make_shampoo_state(2, 2, 0.5, 0.0);
  kc::shampoo_state_update(decay, g);
  Matrix l1 = decay.l;
  kc::shampoo_state_update(decay, Matrix(2, 2));
  kc::shampoo_state_update(decay, Matrix(2, 2));
  l1 *= 0.25;
  CHECK(max_abs_diff(decay.l, l1) <= 1e-14);

  // Constant stream converges geometrically to G G^T.
  kc::ShampooState conv = kc::make_shampoo_state(2, 2, 0.9, 0.0);
  Matrix limit = matmul(g, transpose(g));
  for (int t = 1; t <= 40; ++t) {
    kc::shampoo_state_update(conv, g);
    double err = max_abs_diff(conv.l, limit);
    CHECK(err <= std::pow(0.9, t) * max_abs(limit) + 1e-12);
  }

  CHECK_THROWS_AS(kc::make_shampoo_state(2, 2, 1.0, 0.0), DimensionError);
}

TEST_CASE("cosine similarity is invariant under gradient rescaling") {
  Rng rng(38);
  km::GradientEnsemble e = random_ensemble(3, 2, 5, rng);
  km::GradientEnsemble scaled = e;
  for (Matrix& g : scaled.gradients) g *= 3.7;
  kc::CurvatureMatrix h = kc::assemble(e);
  kc::CurvatureMatrix hs = kc::assemble(scaled);
  double c1 = metrics::cosine_similarity_kron(kc::shampoo_sq_factors(e), h.h);
  double c2 =
      metrics::cosine_similarity_kron(kc::shampoo_sq_factors(scaled), hs.h);
  CHECK(c1 == doctest::Approx(c2).epsilon(1e-12));
}
