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

#ifndef KRONPREC_KRONALG_HPP
#define KRONPREC_KRONALG_HPP

#include <span>
#include <vector>

#include "kronprec/matrix.hpp"

namespace kronprec::kronalg {

// Index conventions, used consistently everywhere:
//
//   vec(M)         column-stacking: entry (i, j) of an m x n matrix lands at
//                  position j*m + i.
//   kron(A, B)     (A(x)B)[r*i + i', s*j + j'] = A[i,j] * B[i',j'] for
//                  B of shape r x s.
//   rearrange      for H of side m*n indexed by vec positions,
//                  R(H)[m*i + i', n*j + j'] = H[m*j + i, m*j' + i'].
//
// Under column-stacked vec, the dense matrix that maps vec(G) to
// vec(L G R^T) is kron(R, L) -- the n x n factor sits on the left. The
// rearrangement above is exactly the permutation that turns a covariance
// E[vec(G) vec(G)^T] into E[G (x) G], so a factor pair (L, R) with
// symmetric factors satisfies rearrange(factors_to_matrix(L, R)) =
// vec(L) vec(R)^T, and Kronecker structure becomes rank-1 structure.

// Column-stacking of M into a vector of length rows*cols.
std::vector<double> vec(const Matrix& m);

// Inverse of vec for the given target shape.
Matrix unvec(std::span<const double> v, Index rows, Index cols);

Matrix kron(const Matrix& a, const Matrix& b);

// kron(A, B) * g computed as vec(B * unvec(g) * A^T), without materializing
// the product matrix.
std::vector<double> kron_matvec(const Matrix& a, const Matrix& b,
                                std::span<const double> g);

// Rearrangement of an (m*n) x (m*n) matrix into m^2 x n^2.
Matrix rearrange(const Matrix& h, Index m, Index n);

// Exact inverse permutation: rearrange(inverse_rearrange(X)) == X bitwise.
Matrix inverse_rearrange(const Matrix& x, Index m, Index n);

struct SvdResult {
  std::vector<double> singular_values;  // non-increasing, >= 0
  Matrix left_vectors;                  // columns u_i
  Matrix right_vectors;                 // columns v_i
};

inline constexpr Index kFullRank = -1;

// One-sided Jacobi SVD on the thinner orientation. Pairs of columns are
// rotated until mutually orthogonal relative to 1e-12; more than 60 sweeps
// raises ConvergenceError. Each (u_i, v_i) pair is sign-fixed so that the
// largest-magnitude entry of u_i is positive.
SvdResult svd(const Matrix& m, Index rank = kFullRank);

enum class FactorSource { shampoo, shampoo_sq, opt_kron, kfac, custom };

// A Kronecker factor pair: left is m x m, right is n x n. As an operator it
// acts on an m x n gradient as G -> left * G * right^T.
struct KronFactors {
  Matrix left;
  Matrix right;
  FactorSource source = FactorSource::custom;
  int power_steps = 0;  // meaningful for opt_kron provenance
};

KronFactors identity_factors(Index m, Index n);

// Dense (m*n) x (m*n) matrix of the pair's action on vec space: kron(right, left).
Matrix factors_to_matrix(const KronFactors& f);

// Power iteration for the nearest-Kronecker-product factors of H: both
// iterates are updated from the previous pair,
//   l_k <- R(H)   vec(R_{k-1})
//   r_k <- R(H)^T vec(L_{k-1}),
// so one step from identity returns exactly (unvec of) R(H) vec(I_n) and
// R(H)^T vec(I_m). Iterates are not rescaled. Throws DegenerateInputError
// for an all-zero H.
KronFactors nkp_power_iteration(const Matrix& h, Index m, Index n, int steps,
                                const KronFactors& init);

struct SymEig {
  std::vector<double> eigenvalues;  // ascending
  Matrix eigenvectors;              // columns
};

// Cyclic Jacobi eigendecomposition of a symmetric matrix.
SymEig sym_eig(const Matrix& m);

double min_eigenvalue(const Matrix& symmetric);

inline constexpr double kAutoDamping = -1.0;

// Q (clamp(Lambda) + eps I)^p Q^T for symmetric PSD input. Eigenvalues in
// [-1e-8 * trace/dim, 0) are clamped to zero; anything lower raises
// SpectrumError, as does a non-finite result (singular input with p < 0 and
// eps = 0). Passing kAutoDamping selects eps = 1e-10 * trace/dim + 1e-30.
Matrix sym_power(const Matrix& m, double exponent, double damping);

}  // namespace kronprec::kronalg

#endif  // KRONPREC_KRONALG_HPP
