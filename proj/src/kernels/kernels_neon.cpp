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

// NEON kernels, 2 doubles per lane. aarch64 always has NEON, so this
// translation unit needs no runtime feature check beyond being compiled in.

#include "kernel_table.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace kronprec::kernels {
namespace {

double dot_neon(const double* x, const double* y, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
  }
  for (; i + 2 <= n; i += 2) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
  }
  double total = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) total += x[i] * y[i];
  return total;
}

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scal_neon(double a, double* x, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(x + i, vmulq_f64(va, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) x[i] *= a;
}

void ger_neon(double alpha, const double* x, std::size_t m, const double* y,
              std::size_t n, double* a) {
  for (std::size_t i = 0; i < m; ++i) {
    axpy_neon(alpha * x[i], y, a + i * n, n);
  }
}

void gemv_neon(const double* a, std::size_t m, std::size_t n, const double* x,
               double* y) {
  for (std::size_t i = 0; i < m; ++i) y[i] = dot_neon(a + i * n, x, n);
}

void gemv_t_neon(const double* a, std::size_t m, std::size_t n,
                 const double* x, double* y) {
  for (std::size_t j = 0; j < n; ++j) y[j] = 0.0;
  for (std::size_t i = 0; i < m; ++i) axpy_neon(x[i], a + i * n, y, n);
}

void rot_neon(double c, double s, double* x, double* y, std::size_t n) {
  const float64x2_t vc = vdupq_n_f64(c);
  const float64x2_t vs = vdupq_n_f64(s);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t vx = vld1q_f64(x + i);
    float64x2_t vy = vld1q_f64(y + i);
    vst1q_f64(x + i, vfmaq_f64(vmulq_f64(vs, vy), vc, vx));
    vst1q_f64(y + i, vfmsq_f64(vmulq_f64(vc, vy), vs, vx));
  }
  for (; i < n; ++i) {
    double xi = x[i];
    x[i] = c * xi + s * y[i];
    y[i] = -s * xi + c * y[i];
  }
}

}  // namespace

const KernelTable& neon_table() {
  static const KernelTable table = {dot_neon, axpy_neon, scal_neon,
                                    ger_neon, gemv_neon, gemv_t_neon,
                                    rot_neon};
  return table;
}

}  // namespace kronprec::kernels

#endif  // __aarch64__
