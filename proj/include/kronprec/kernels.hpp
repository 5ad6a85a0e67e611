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

#ifndef KRONPREC_KERNELS_HPP
#define KRONPREC_KERNELS_HPP

#include <cstddef>

namespace kronprec::kernels {

// Dense double-precision inner loops. Every entry-level reduction in the
// library funnels through these so the scalar reference path and the SIMD
// paths can be swapped and equivalence-tested. Within one backend the
// summation order is fixed, which keeps runs bit-reproducible.
//
// The backend is chosen once at startup: the KRONPREC_KERNELS environment
// variable ("scalar", "avx2", "neon", "auto") wins, otherwise the best
// variant the CPU supports. Tests override with set_backend().

enum class Backend { scalar, avx2, neon };

Backend active_backend();
const char* backend_name(Backend backend);

// Returns false (and leaves the backend unchanged) if the CPU or build does
// not support the requested variant.
bool set_backend(Backend backend);

// Re-runs the startup selection (environment variable, then CPU detection).
void reset_backend();

bool backend_available(Backend backend);

// x . y
double dot(const double* x, const double* y, std::size_t n);

// y += a * x
void axpy(double a, const double* x, double* y, std::size_t n);

// x *= a
void scal(double a, double* x, std::size_t n);

// A (row-major m x n) += alpha * x y^T
void ger(double alpha, const double* x, std::size_t m, const double* y,
         std::size_t n, double* a);

// y = A x for row-major A (m x n)
void gemv(const double* a, std::size_t m, std::size_t n, const double* x,
          double* y);

// y = A^T x for row-major A (m x n); y has length n
void gemv_t(const double* a, std::size_t m, std::size_t n, const double* x,
            double* y);

// Plane rotation of two contiguous vectors:
//   x <- c*x + s*y ;  y <- -s*x_old + c*y
void rot(double c, double s, double* x, double* y, std::size_t n);

}  // namespace kronprec::kernels

#endif  // KRONPREC_KERNELS_HPP
