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

#ifndef KRONPREC_MATRIX_HPP
#define KRONPREC_MATRIX_HPP

#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace kronprec {

using Index = std::int64_t;

// Dense real matrix, row-major, 64-bit entries. The universal carrier for
// gradients, curvature matrices and Kronecker factors.
class Matrix {
 public:
  Matrix() = default;
  Matrix(Index rows, Index cols);  // zero-initialized

  static Matrix identity(Index n);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index size() const { return rows_ * cols_; }

  double& operator()(Index i, Index j) { return data_[i * cols_ + j]; }
  double operator()(Index i, Index j) const { return data_[i * cols_ + j]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double* row(Index i) { return data_.data() + i * cols_; }
  const double* row(Index i) const { return data_.data() + i * cols_; }

  std::span<const double> entries() const { return data_; }
  std::span<double> entries() { return data_; }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);
Matrix& operator+=(Matrix& a, const Matrix& b);
Matrix& operator-=(Matrix& a, const Matrix& b);
Matrix& operator*=(Matrix& a, double s);

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
std::vector<double> matvec(const Matrix& a, std::span<const double> x);
std::vector<double> matvec_t(const Matrix& a, std::span<const double> x);

double trace(const Matrix& a);
double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);
// Frobenius inner product <a, b> = sum_ij a_ij b_ij.
double frobenius_dot(const Matrix& a, const Matrix& b);
bool all_finite(const Matrix& a);
// max_ij |a_ij - b_ij|
double max_abs_diff(const Matrix& a, const Matrix& b);
// Relative asymmetry ||A - A^T||_max / max(||A||_max, floor).
double asymmetry(const Matrix& a);
// (A + A^T) / 2
Matrix symmetrize(const Matrix& a);

double dot(std::span<const double> x, std::span<const double> y);
double norm(std::span<const double> x);

}  // namespace kronprec

#endif  // KRONPREC_MATRIX_HPP
