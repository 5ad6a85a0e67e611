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

// Reference kernels. Plain sequential loops; the SIMD variants are checked
// against these in tests/test_kernels.cpp.

#include "kernel_table.hpp"

namespace kronprec::kernels {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scal_scalar(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void ger_scalar(double alpha, const double* x, std::size_t m, const double* y,
                std::size_t n, double* a) {
  for (std::size_t i = 0; i < m; ++i) {
    axpy_scalar(alpha * x[i], y, a + i * n, n);
  }
}

void gemv_scalar(const double* a, std::size_t m, std::size_t n,
                 const double* x, double* y) {
  for (std::size_t i = 0; i < m; ++i) y[i] = dot_scalar(a + i * n, x, n);
}

void gemv_t_scalar(const double* a, std::size_t m, std::size_t n,
                   const double* x, double* y) {
  for (std::size_t j = 0; j < n; ++j) y[j] = 0.0;
  for (std::size_t i = 0; i < m; ++i) axpy_scalar(x[i], a + i * n, y, n);
}

void rot_scalar(double c, double s, double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double xi = x[i];
    x[i] = c * xi + s * y[i];
    y[i] = -s * xi + c * y[i];
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table = {dot_scalar, axpy_scalar, scal_scalar,
                                    ger_scalar, gemv_scalar, gemv_t_scalar,
                                    rot_scalar};
  return table;
}

}  // namespace kronprec::kernels
