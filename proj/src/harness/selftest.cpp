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
#include <functional>
#include <ostream>
#include <string>

#include "kronprec/errors.hpp"
#include "kronprec/harness.hpp"
#include "kronprec/kronalg.hpp"
#include "kronprec/metrics.hpp"
#include "kronprec/rng.hpp"

namespace kronprec::harness {
namespace {

namespace ka = kronprec::kronalg;
namespace kc = kronprec::curvature;
namespace km = kronprec::models;
namespace kme = kronprec::metrics;

Matrix random_matrix(Index r, Index c, Rng& rng) {
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = rng.gaussian();
  return m;
}

Matrix random_symmetric(Index n, Rng& rng) {
  return symmetrize(random_matrix(n, n, rng));
}

Matrix random_spd(Index n, Rng& rng) {
  Matrix a = random_matrix(n, n, rng);
  Matrix s = matmul(a, transpose(a));
  for (Index i = 0; i < n; ++i) s(i, i) += 0.1;
  return s;
}

km::GradientEnsemble random_ensemble(Index m, Index n, int samples, Rng& rng) {
  km::GradientEnsemble e{m, n, {}, {}};
  for (int s = 0; s < samples; ++s) {
    e.gradients.push_back(random_matrix(m, n, rng));
    e.weights.push_back(1.0 / samples);
  }
  return e;
}

Matrix outer(std::span<const double> a, std::span<const double> b) {
  Matrix m(static_cast<Index>(a.size()), static_cast<Index>(b.size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      m(i, j) = a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(j)];
  return m;
}

bool check_kron_identities(const SelftestHooks& hooks) {
  Rng rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    Index p = 1 + static_cast<Index>(rng.uniform_below(4));
    Index q = 1 + static_cast<Index>(rng.uniform_below(4));
    Index r = 1 + static_cast<Index>(rng.uniform_below(4));
    Index s = 1 + static_cast<Index>(rng.uniform_below(4));
    Matrix a = random_matrix(p, q, rng);
    Matrix b = random_matrix(r, s, rng);
    Matrix g = random_matrix(s, q, rng);
    std::vector<double> lhs = matvec(ka::kron(a, b), ka::vec(g));
    std::vector<double> rhs = ka::vec(matmul(matmul(b, g), transpose(a)));
    double scale = norm(rhs) + 1e-300;
    for (std::size_t i = 0; i < lhs.size(); ++i)
      if (std::abs(lhs[i] - rhs[i]) > 1e-12 * scale) return false;
  }
  for (int trial = 0; trial < 200; ++trial) {
    Index m = 1 + static_cast<Index>(rng.uniform_below(4));
    Index n = 1 + static_cast<Index>(rng.uniform_below(4));
    Matrix l = random_symmetric(m, rng);
    Matrix r = random_symmetric(n, rng);
    Matrix dense = ka::factors_to_matrix({l, r, ka::FactorSource::custom, 0});
    // Eq. 2 forward through the hook under test.
    Matrix rk = hooks.rearrange(dense, m, n);
    Matrix rank1 = outer(ka::vec(l), ka::vec(r));
    if (max_abs_diff(rk, rank1) > 1e-12 * (max_abs(rank1) + 1e-300))
      return false;
    // Lemma 4 on a random H.
    Matrix h = random_matrix(m * n, m * n, rng);
    double lhs = frobenius_norm(
        h - ka::factors_to_matrix({l, r, ka::FactorSource::custom, 0}));
    double rhs = frobenius_norm(hooks.rearrange(h, m, n) - rank1);
    if (std::abs(lhs - rhs) > 1e-12 * (lhs + 1.0)) return false;
  }
  return true;
}

bool check_prop1(const SelftestHooks& hooks) {
  Rng rng(102);
  for (int trial = 0; trial < 100; ++trial) {
    Index m = 2 + static_cast<Index>(rng.uniform_below(5));
    Index n = 1 + static_cast<Index>(rng.uniform_below(6));
    km::GradientEnsemble e =
        random_ensemble(m, n, 1 + static_cast<int>(rng.uniform_below(8)), rng);
    ka::KronFactors sq = hooks.shampoo_sq(e);
    ka::KronFactors pow = ka::nkp_power_iteration(
        kc::assemble(e).h, m, n, 1, ka::identity_factors(m, n));
    double scale = std::max(max_abs(pow.left), max_abs(pow.right)) + 1e-300;
    if (max_abs_diff(sq.left, pow.left) > 1e-12 * scale) return false;
    if (max_abs_diff(sq.right, pow.right) > 1e-12 * scale) return false;
  }
  return true;
}

bool check_sym_power() {
  Rng rng(103);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix m = random_spd(4 + static_cast<Index>(rng.uniform_below(4)), rng);
    Matrix prod =
        matmul(ka::sym_power(m, 0.25, 0.0), ka::sym_power(m, -0.25, 0.0));
    if (max_abs_diff(prod, Matrix::identity(m.rows())) > 1e-8) return false;
  }
  return true;
}

bool check_gradients_fd() {
  km::ModelConfig cfg;
  cfg.kind = km::ModelKind::mlp2;
  cfg.input_dim = 4;
  cfg.hidden_dim = 4;
  cfg.num_classes = 3;
  cfg.probe_layer = 0;
  cfg.activation = km::Activation::tanh;
  cfg.init_seed = 104;
  km::Model model = km::make_model(cfg);
  std::vector<double> x{0.4, -0.8, 1.2, 0.1};
  const double step = 1e-5;
  for (Index label = 0; label < 3; ++label) {
    Matrix g = km::per_sample_gradient(model, x, label);
    for (Index i = 0; i < g.rows(); ++i) {
      for (Index j = 0; j < g.cols(); ++j) {
        km::Model probe = model;
        probe.weights[0](i, j) += step;
        double up = km::ce_loss(probe, x, label);
        probe.weights[0](i, j) -= 2 * step;
        double down = km::ce_loss(probe, x, label);
        double fd = (up - down) / (2 * step);
        if (std::abs(g(i, j) - fd) > 1e-6 * std::max(std::abs(fd), 1e-3))
          return false;
      }
    }
  }
  return true;
}

bool check_mean_zero() {
  Rng rng(105);
  km::ModelConfig cfg;
  cfg.kind = km::ModelKind::multinomial_linear;
  cfg.input_dim = 5;
  cfg.num_classes = 4;
  cfg.init_seed = 105;
  km::Model model = km::make_model(cfg);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(5);
    for (double& v : x) v = rng.gaussian();
    std::vector<double> p = km::forward(model, x);
    Matrix mean(4, 5);
    double max_norm = 0.0;
    for (Index c = 0; c < 4; ++c) {
      Matrix g = km::per_sample_gradient(model, x, c);
      max_norm = std::max(max_norm, frobenius_norm(g));
      g *= p[static_cast<std::size_t>(c)];
      mean += g;
    }
    if (frobenius_norm(mean) > 1e-12 * max_norm) return false;
  }
  return true;
}

bool check_psd_dominance() {
  Rng rng(106);
  for (int trial = 0; trial < 25; ++trial) {
    Index m = 2 + static_cast<Index>(rng.uniform_below(3));
    Index n = 2 + static_cast<Index>(rng.uniform_below(3));
    km::GradientEnsemble e =
        random_ensemble(m, n, 1 + static_cast<int>(rng.uniform_below(5)), rng);
    kc::CurvatureMatrix h = kc::assemble(e);
    Index r = kc::max_sample_rank(e);
    Matrix bound = ka::factors_to_matrix(kc::shampoo_factors(e));
    bound *= static_cast<double>(r);
    double scale = std::max(trace(bound), trace(h.h));
    if (ka::min_eigenvalue(bound - h.h) < -1e-8 * scale) return false;
  }
  return true;
}

bool check_batch_lemmas() {
  km::ModelConfig cfg;
  cfg.kind = km::ModelKind::binary_logistic;
  cfg.input_dim = 3;
  cfg.init_seed = 107;
  km::Model model = km::make_model(cfg);
  data::Dataset ds = data::synth_gaussian_classes(3, 2, 2, 1.0, 107);

  kc::CurvatureMatrix exact = kc::gn_curvature_exact(model, ds);
  for (Index b : {1, 2, 3}) {
    kc::CurvatureMatrix hb = kc::batch_covariance_enumerated(
        model, ds, b, km::LabelModeKind::sampled);
    if (max_abs_diff(hb.h, exact.h) > 1e-12 * max_abs(exact.h)) return false;
  }

  Matrix ef(3, 3);
  std::vector<double> gbar(3, 0.0);
  for (Index i = 0; i < ds.size(); ++i) {
    Matrix g = km::per_sample_gradient(model, ds.example(i),
                                       ds.y[static_cast<std::size_t>(i)]);
    for (Index p = 0; p < 3; ++p) {
      gbar[static_cast<std::size_t>(p)] += g(p, 0) / ds.size();
      for (Index q = 0; q < 3; ++q) ef(p, q) += g(p, 0) * g(q, 0) / ds.size();
    }
  }
  for (Index b : {1, 2, 3}) {
    kc::CurvatureMatrix hb = kc::batch_covariance_enumerated(
        model, ds, b, km::LabelModeKind::real);
    double inv_b = 1.0 / static_cast<double>(b);
    Matrix expected(3, 3);
    for (Index p = 0; p < 3; ++p)
      for (Index q = 0; q < 3; ++q)
        expected(p, q) = inv_b * ef(p, q) +
                         (1.0 - inv_b) * gbar[static_cast<std::size_t>(p)] *
                             gbar[static_cast<std::size_t>(q)];
    if (max_abs_diff(hb.h, expected) > 1e-12 * max_abs(expected)) return false;
  }
  return true;
}

bool check_grafting() {
  Rng rng(108);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix l = random_spd(3 + static_cast<Index>(rng.uniform_below(3)), rng);
    double q = 0.25 + rng.uniform();
    Matrix lhs = ka::sym_power(l, -q, 0.0);
    Matrix rhs = ka::sym_power(matmul(l, l), -q / 2.0, 0.0);
    if (max_abs_diff(lhs, rhs) > 1e-8 * (max_abs(lhs) + 1e-300)) return false;
  }
  return true;
}

bool check_minimax() {
  kme::MinimaxReport rep = kme::identity_minimax_check(8, 1000, 109);
  return rep.property_a_ok && rep.property_b_ok;
}

bool check_probe_machinery() {
  Rng rng(110);
  const Index dim = 12;
  kme::ProbeBank bank = kme::make_probe_bank(dim, 8, 110);
  Matrix h_ada(dim, dim);
  for (int t = 0; t < 15; ++t) {
    std::vector<double> g(static_cast<std::size_t>(dim));
    for (double& v : g) v = rng.gaussian();
    kme::adagrad_hv(bank, g);
    for (Index i = 0; i < dim; ++i)
      for (Index j = 0; j < dim; ++j)
        h_ada(i, j) += g[static_cast<std::size_t>(i)] * g[static_cast<std::size_t>(j)];
  }
  for (Index k = 0; k < bank.num_probes(); ++k) {
    std::vector<double> expected = matvec(h_ada, bank.probe(k));
    double scale = norm(expected) + 1e-300;
    for (Index j = 0; j < dim; ++j)
      if (std::abs(bank.hv_accumulators(k, j) -
                   expected[static_cast<std::size_t>(j)]) > 1e-10 * scale)
        return false;
  }

  // Proportional estimator with exact norms scores a cosine of 1.
  Matrix a = random_spd(3, rng);
  Matrix b = random_spd(4, rng);
  ka::KronFactors f{a, b, ka::FactorSource::custom, 0};
  Matrix h = ka::factors_to_matrix(f);
  h *= 3.0;
  kme::MatVec hv = [&h](std::span<const double> v) { return matvec(h, v); };
  double cos = kme::probe_cosine(hv, h.rows(), 40, 7, f, frobenius_norm(h));
  return std::abs(cos - 1.0) <= 1e-10;
}

bool check_idx_roundtrip() {
  Rng rng(111);
  data::Dataset ds;
  ds.num_classes = 2;
  ds.normalization = data::Normalization::scale_255;
  ds.x = Matrix(4, 4);
  for (Index i = 0; i < 4; ++i) {
    for (Index j = 0; j < 4; ++j)
      ds.x(i, j) = static_cast<double>(rng.uniform_below(256)) / 255.0;
    ds.y.push_back(static_cast<Index>(rng.uniform_below(2)));
  }
  auto [images, labels] = data::to_idx_bytes(ds, 2, 2);
  data::Dataset back = data::parse_idx(images, labels);
  return max_abs_diff(back.x, ds.x) == 0.0 && back.y == ds.y;
}

bool check_determinism() {
  ExperimentConfig cfg;
  cfg.model.kind = km::ModelKind::binary_logistic;
  cfg.model.input_dim = 6;
  cfg.dataset.synth = SynthSpec{6, 2, 6, 2.0};
  cfg.train.steps = 4;
  cfg.train.lr = 0.1;
  cfg.seed = 112;
  cfg.estimators = {EstimatorKind::shampoo, EstimatorKind::shampoo_sq};
  cfg.trials = 8;
  cfg.probe_count = 8;

  std::filesystem::path base =
      std::filesystem::temp_directory_path() / "kronprec-selftest";
  cfg.output_dir = (base / "a").string();
  RunResult first = run_figure1(cfg);
  cfg.output_dir = (base / "b").string();
  RunResult second = run_figure1(cfg);
  std::string a = format_csv(first.records);
  std::string b = format_csv(second.records);
  std::filesystem::remove_all(base);
  return a == b && !first.records.empty();
}

}  // namespace

SelftestHooks::SelftestHooks()
    : rearrange(static_cast<Matrix (*)(const Matrix&, Index, Index)>(
          &ka::rearrange)),
      shampoo_sq(&kc::shampoo_sq_factors) {}

int selftest(std::ostream& out, const SelftestHooks& hooks) {
  struct Suite {
    const char* name;
    std::function<bool()> run;
  };
  const Suite suites[] = {
      {"kron identities (matvec, rank-1 rearrangement, norm equivalence)",
       [&] { return check_kron_identities(hooks); }},
      {"shampoo^2 equals one-step power iteration",
       [&] { return check_prop1(hooks); }},
      {"symmetric powers invert", check_sym_power},
      {"closed-form gradients vs finite differences", check_gradients_fd},
      {"sampled-label gradients are mean zero", check_mean_zero},
      {"rank-scaled PSD dominance", check_psd_dominance},
      {"enumerated batch covariance lemmas", check_batch_lemmas},
      {"exponent grafting equivalence", check_grafting},
      {"identity minimax property", check_minimax},
      {"probe machinery (streamed H*v, probe cosine)", check_probe_machinery},
      {"IDX round-trip", check_idx_roundtrip},
      {"byte-identical rerun", check_determinism},
  };

  int failures = 0;
  for (const Suite& suite : suites) {
    bool ok = false;
    std::string note;
    try {
      ok = suite.run();
    } catch (const std::exception& e) {
      ok = false;
      note = e.what();
    }
    out << (ok ? "[ ok ] " : "[FAIL] ") << suite.name;
    if (!note.empty()) out << " (" << note << ")";
    out << "\n";
    if (!ok) ++failures;
  }
  out << (failures == 0 ? "selftest: all suites passed\n"
                        : "selftest: FAILURES present\n");
  return failures;
}

}  // namespace kronprec::harness
