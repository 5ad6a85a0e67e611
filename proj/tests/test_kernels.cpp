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

// Equivalence tests: every SIMD backend available on this machine must agree
// with the scalar reference on the same inputs, including remainder tails.

#include <cmath>
#include <vector>

#include "doctest.h"
#include "kronprec/kernels.hpp"
#include "kronprec/rng.hpp"

namespace kk = kronprec::kernels;
using kronprec::Rng;

namespace {

const std::vector<std::size_t> kLengths = {0, 1, 2, 3, 4, 5, 7, 8,
                                           9, 15, 16, 31, 64, 1000};

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.gaussian();
  return v;
}

std::vector<kk::Backend> simd_backends() {
  std::vector<kk::Backend> out;
  for (kk::Backend b : {kk::Backend::avx2, kk::Backend::neon})
    if (kk::backend_available(b)) out.push_back(b);
  return out;
}

struct BackendGuard {
  ~BackendGuard() { kk::reset_backend(); }
};

bool close(double a, double b, double scale) {
  return std::abs(a - b) <= 1e-13 * (scale + 1.0);
}

}  // namespace

TEST_CASE("scalar backend is always available") {
  CHECK(kk::backend_available(kk::Backend::scalar));
  BackendGuard guard;
  CHECK(kk::set_backend(kk::Backend::scalar));
  CHECK(kk::active_backend() == kk::Backend::scalar);
}

TEST_CASE("set_backend rejects unsupported variants") {
#if !defined(__aarch64__)
  CHECK_FALSE(kk::set_backend(kk::Backend::neon));
#endif
}

TEST_CASE("dot/axpy/scal match scalar reference on every backend") {
  BackendGuard guard;
  for (kk::Backend backend : simd_backends()) {
    for (std::size_t n : kLengths) {
      Rng rng(900 + n);
      std::vector<double> x = random_vec(n, rng);
      std::vector<double> y = random_vec(n, rng);
      double a = rng.gaussian();

      REQUIRE(kk::set_backend(kk::Backend::scalar));
      double dot_ref = kk::dot(x.data(), y.data(), n);
      std::vector<double> axpy_ref = y;
      kk::axpy(a, x.data(), axpy_ref.data(), n);
      std::vector<double> scal_ref = x;
      kk::scal(a, scal_ref.data(), n);

      REQUIRE(kk::set_backend(backend));
      double scale = std::sqrt(kk::dot(x.data(), x.data(), n) *
                               kk::dot(y.data(), y.data(), n));
      CHECK(close(kk::dot(x.data(), y.data(), n), dot_ref, scale));
      std::vector<double> axpy_simd = y;
      kk::axpy(a, x.data(), axpy_simd.data(), n);
      std::vector<double> scal_simd = x;
      kk::scal(a, scal_simd.data(), n);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(close(axpy_simd[i], axpy_ref[i], std::abs(axpy_ref[i])));
        CHECK(scal_simd[i] == scal_ref[i]);
      }
    }
  }
}

TEST_CASE("ger/gemv/gemv_t/rot match scalar reference on every backend") {
  BackendGuard guard;
  for (kk::Backend backend : simd_backends()) {
    for (std::size_t m : {1u, 3u, 8u, 17u}) {
      for (std::size_t n : {1u, 4u, 9u, 33u}) {
        Rng rng(7000 + 61 * m + n);
        std::vector<double> a = random_vec(m * n, rng);
        std::vector<double> x = random_vec(m, rng);
        std::vector<double> y = random_vec(n, rng);
        double alpha = rng.gaussian();
        double c = std::cos(0.7), s = std::sin(0.7);

        REQUIRE(kk::set_backend(kk::Backend::scalar));
        std::vector<double> ger_ref = a;
        kk::ger(alpha, x.data(), m, y.data(), n, ger_ref.data());
        std::vector<double> gemv_ref(m);
        kk::gemv(a.data(), m, n, y.data(), gemv_ref.data());
        std::vector<double> gemv_t_ref(n);
        kk::gemv_t(a.data(), m, n, x.data(), gemv_t_ref.data());
        std::vector<double> rot_x_ref = y, rot_y_ref = y;
        std::vector<double> other = random_vec(n, rng);
        rot_y_ref = other;
        kk::rot(c, s, rot_x_ref.data(), rot_y_ref.data(), n);

        REQUIRE(kk::set_backend(backend));
        std::vector<double> ger_simd = a;
        kk::ger(alpha, x.data(), m, y.data(), n, ger_simd.data());
        std::vector<double> gemv_simd(m);
        kk::gemv(a.data(), m, n, y.data(), gemv_simd.data());
        std::vector<double> gemv_t_simd(n);
        kk::gemv_t(a.data(), m, n, x.data(), gemv_t_simd.data());
        std::vector<double> rot_x_simd = y, rot_y_simd = other;
        kk::rot(c, s, rot_x_simd.data(), rot_y_simd.data(), n);

        for (std::size_t i = 0; i < m * n; ++i)
          CHECK(close(ger_simd[i], ger_ref[i], std::abs(ger_ref[i])));
        for (std::size_t i = 0; i < m; ++i)
          CHECK(close(gemv_simd[i], gemv_ref[i],
                      std::abs(gemv_ref[i]) + std::abs(alpha)));
        for (std::size_t i = 0; i < n; ++i)
          CHECK(close(gemv_t_simd[i], gemv_t_ref[i],
                      std::abs(gemv_t_ref[i]) + 1.0));
        for (std::size_t i = 0; i < n; ++i) {
          CHECK(close(rot_x_simd[i], rot_x_ref[i], 1.0));
          CHECK(close(rot_y_simd[i], rot_y_ref[i], 1.0));
        }
      }
    }
  }
}

TEST_CASE("rot is an exact plane rotation") {
  BackendGuard guard;
  Rng rng(42);
  std::vector<double> x = random_vec(129, rng);
  std::vector<double> y = random_vec(129, rng);
  double before = kk::dot(x.data(), x.data(), x.size()) +
                  kk::dot(y.data(), y.data(), y.size());
  double c = std::cos(1.1), s = std::sin(1.1);
  kk::rot(c, s, x.data(), y.data(), x.size());
  double after = kk::dot(x.data(), x.data(), x.size()) +
                 kk::dot(y.data(), y.data(), y.size());
  CHECK(std::abs(after - before) <= 1e-12 * before);
}
