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

#ifndef KRONPREC_RNG_HPP
#define KRONPREC_RNG_HPP

#include <cstdint>
#include <string_view>

namespace kronprec {

// SplitMix64 generator. The standard library's distributions are
// implementation-defined, so all sampling used by experiments goes through
// this class to keep runs replayable byte for byte.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();

  // Uniform in [0, 1), 53-bit resolution.
  double uniform();
  double uniform(double lo, double hi);

  // Uniform integer in [0, bound) via rejection sampling; bound >= 1.
  std::uint64_t uniform_below(std::uint64_t bound);

  // Standard normal via Box-Muller; the second variate of each pair is
  // cached, so draws are consumed deterministically.
  double gaussian();

 private:
  std::uint64_t state_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

// Derives an independent stream seed from a master seed, a purpose tag
// ("init", "batch", "probe", "labels", ...) and an index. The mix is
// splitmix64(splitmix64(master ^ fnv1a64(tag)) ^ index); documented in the
// README so runs can be reproduced outside this codebase.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                          std::uint64_t index = 0);

std::uint64_t fnv1a64(std::string_view text);
std::uint64_t splitmix64_next(std::uint64_t& state);

}  // namespace kronprec

#endif  // KRONPREC_RNG_HPP
