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

#ifndef KRONPREC_ERRORS_HPP
#define KRONPREC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace kronprec {

// Base for everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Shape or argument mismatch detected before any arithmetic runs.
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error(what) {}
};

// Iterative solver (Jacobi SVD / eigensolver) exhausted its sweep budget.
class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& what) : Error(what) {}
};

// Input for which the requested quantity has no defined direction (e.g. an
// all-zero curvature matrix fed to the Kronecker power iteration).
class DegenerateInputError : public Error {
 public:
  explicit DegenerateInputError(const std::string& what) : Error(what) {}
};

// Symmetric-power input whose spectrum is negative beyond tolerance, or
// whose powered result is not finite.
class SpectrumError : public Error {
 public:
  explicit SpectrumError(const std::string& what) : Error(what) {}
};

// IDX container violations, one kind per spec'd failure mode.
class IdxError : public Error {
 public:
  enum class Kind { bad_magic, truncated, count_mismatch };

  IdxError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Experiment-config validation failure (unknown key, bad value, missing file).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

}  // namespace kronprec

#endif  // KRONPREC_ERRORS_HPP
