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

#ifndef KRONPREC_SRC_KERNELS_KERNEL_TABLE_HPP
#define KRONPREC_SRC_KERNELS_KERNEL_TABLE_HPP

#include <cstddef>

namespace kronprec::kernels {

struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scal)(double, double*, std::size_t);
  void (*ger)(double, const double*, std::size_t, const double*, std::size_t,
              double*);
  void (*gemv)(const double*, std::size_t, std::size_t, const double*,
               double*);
  void (*gemv_t)(const double*, std::size_t, std::size_t, const double*,
                 double*);
  void (*rot)(double, double, double*, double*, std::size_t);
};

const KernelTable& scalar_table();

#if defined(__x86_64__) || defined(_M_X64)
#define KRONPREC_HAVE_AVX2_TU 1
const KernelTable& avx2_table();
#endif

#if defined(__aarch64__)
#define KRONPREC_HAVE_NEON_TU 1
const KernelTable& neon_table();
#endif

}  // namespace kronprec::kernels

#endif  // KRONPREC_SRC_KERNELS_KERNEL_TABLE_HPP
