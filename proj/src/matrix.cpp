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

#include "kronprec/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kronprec/errors.hpp"
#include "kronprec/kernels.hpp"

namespace kronprec {

Matrix::Matrix(Index rows, Index cols) : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) throw DimensionError("negative matrix dimension");
  data_.assign(static_cast<std::size_t>(rows * cols), 0.0);
}

Matrix Matrix::identity(Index n) {
  Matrix m(n, n);
  for (Index i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(
    std::initializer_list<std::initializer_list<double>> rows) {
  Index r = static_cast<Index>(rows.size());
  Index c = r > 0 ? static_cast<Index>(rows.begin()->size()) : 0;
  Matrix m(r, c);
  Index i = 0;
  for (const auto& row : rows) {
    if (static_cast<Index>(row.size()) != c)
      throw DimensionError("ragged initializer rows");
    Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

namespace {
void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b))
    throw DimensionError(std::string("shape mismatch in ") + op);
}
}  // namespace

Matrix operator+(const Matrix& a, const Matrix& b) {
  Matrix out = a;
  out += b;
  return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  Matrix out = a;
  out -= b;
  return out;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix out = a;
  out *= s;
  return out;
}

Matrix& operator+=(Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "operator+=");
  kernels::axpy(1.0, b.data(), a.data(), static_cast<std::size_t>(a.size()));
  return a;
}

Matrix& operator-=(Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "operator-=");
  kernels::axpy(-1.0, b.data(), a.data(), static_cast<std::size_t>(a.size()));
  return a;
}

Matrix& operator*=(Matrix& a, double s) {
  kernels::scal(s, a.data(), static_cast<std::size_t>(a.size()));
  return a;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("matmul: inner dim mismatch");
  Matrix c(a.rows(), b.cols());
  const std::size_t n = static_cast<std::size_t>(b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    double* ci = c.row(i);
    for (Index k = 0; k < a.cols(); ++k) {
      kernels::axpy(a(i, k), b.row(k), ci, n);
    }
  }
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

std::vector<double> matvec(const Matrix& a, std::span<const double> x) {
  if (static_cast<Index>(x.size()) != a.cols())
    throw DimensionError("matvec: length mismatch");
  std::vector<double> y(static_cast<std::size_t>(a.rows()));
  kernels::gemv(a.data(), static_cast<std::size_t>(a.rows()),
                static_cast<std::size_t>(a.cols()), x.data(), y.data());
  return y;
}

std::vector<double> matvec_t(const Matrix& a, std::span<const double> x) {
  if (static_cast<Index>(x.size()) != a.rows())
    throw DimensionError("matvec_t: length mismatch");
  std::vector<double> y(static_cast<std::size_t>(a.cols()));
  kernels::gemv_t(a.data(), static_cast<std::size_t>(a.rows()),
                  static_cast<std::size_t>(a.cols()), x.data(), y.data());
  return y;
}

double trace(const Matrix& a) {
  Index n = a.rows() < a.cols() ? a.rows() : a.cols();
  double t = 0.0;
  for (Index i = 0; i < n; ++i) t += a(i, i);
  return t;
}

double frobenius_norm(const Matrix& a) {
  return std::sqrt(kernels::dot(a.data(), a.data(),
                                static_cast<std::size_t>(a.size())));
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double v : a.entries()) m = std::max(m, std::abs(v));
  return m;
}

double frobenius_dot(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "frobenius_dot");
  return kernels::dot(a.data(), b.data(), static_cast<std::size_t>(a.size()));
}

bool all_finite(const Matrix& a) {
  for (double v : a.entries())
    if (!std::isfinite(v)) return false;
  return true;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (Index i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

double asymmetry(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("asymmetry: not square");
  double diff = 0.0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = i + 1; j < a.cols(); ++j)
      diff = std::max(diff, std::abs(a(i, j) - a(j, i)));
  double scale = max_abs(a);
  return scale > 0.0 ? diff / scale : diff;
}

Matrix symmetrize(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("symmetrize: not square");
  Matrix s(a.rows(), a.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
  return s;
}

double dot(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("dot: length mismatch");
  return kernels::dot(x.data(), y.data(), x.size());
}

double norm(std::span<const double> x) {
  return std::sqrt(kernels::dot(x.data(), x.data(), x.size()));
}

}  // namespace kronprec
