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

#include "kronprec/kernels.hpp"

#include <cstdlib>
#include <string>

#include "kernel_table.hpp"

namespace kronprec::kernels {
namespace {

struct Dispatch {
  Backend backend;
  const KernelTable* table;
};

bool cpu_supports(Backend backend) {
  switch (backend) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
#if defined(KRONPREC_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::neon:
#if defined(KRONPREC_HAVE_NEON_TU)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable* table_for(Backend backend) {
  switch (backend) {
    case Backend::scalar:
      return &scalar_table();
    case Backend::avx2:
#if defined(KRONPREC_HAVE_AVX2_TU)
      return &avx2_table();
#else
      return nullptr;
#endif
    case Backend::neon:
#if defined(KRONPREC_HAVE_NEON_TU)
      return &neon_table();
#else
      return nullptr;
#endif
  }
  return nullptr;
}

Dispatch detect() {
  if (const char* env = std::getenv("KRONPREC_KERNELS")) {
    std::string requested(env);
    if (requested == "scalar") return {Backend::scalar, &scalar_table()};
    if (requested == "avx2" && cpu_supports(Backend::avx2))
      return {Backend::avx2, table_for(Backend::avx2)};
    if (requested == "neon" && cpu_supports(Backend::neon))
      return {Backend::neon, table_for(Backend::neon)};
    // "auto" or an unusable request falls through to detection.
  }
  if (cpu_supports(Backend::avx2)) return {Backend::avx2, table_for(Backend::avx2)};
  if (cpu_supports(Backend::neon)) return {Backend::neon, table_for(Backend::neon)};
  return {Backend::scalar, &scalar_table()};
}

Dispatch& dispatch() {
  static Dispatch current = detect();
  return current;
}

}  // namespace

Backend active_backend() { return dispatch().backend; }

const char* backend_name(Backend backend) {
  switch (backend) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
    case Backend::neon:
      return "neon";
  }
  return "unknown";
}

bool backend_available(Backend backend) { return cpu_supports(backend); }

bool set_backend(Backend backend) {
  if (!cpu_supports(backend)) return false;
  dispatch() = {backend, table_for(backend)};
  return true;
}

void reset_backend() { dispatch() = detect(); }

double dot(const double* x, const double* y, std::size_t n) {
  return dispatch().table->dot(x, y, n);
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  dispatch().table->axpy(a, x, y, n);
}

void scal(double a, double* x, std::size_t n) {
  dispatch().table->scal(a, x, n);
}

void ger(double alpha, const double* x, std::size_t m, const double* y,
         std::size_t n, double* a) {
  dispatch().table->ger(alpha, x, m, y, n, a);
}

void gemv(const double* a, std::size_t m, std::size_t n, const double* x,
          double* y) {
  dispatch().table->gemv(a, m, n, x, y);
}

void gemv_t(const double* a, std::size_t m, std::size_t n, const double* x,
            double* y) {
  dispatch().table->gemv_t(a, m, n, x, y);
}

void rot(double c, double s, double* x, double* y, std::size_t n) {
  dispatch().table->rot(c, s, x, y, n);
}

}  // namespace kronprec::kernels
