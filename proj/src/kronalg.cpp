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

#include "kronprec/kronalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "kronprec/errors.hpp"
#include "kronprec/kernels.hpp"

namespace kronprec::kronalg {

std::vector<double> vec(const Matrix& m) {
  std::vector<double> out(static_cast<std::size_t>(m.size()));
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) out[j * m.rows() + i] = m(i, j);
  return out;
}

Matrix unvec(std::span<const double> v, Index rows, Index cols) {
  if (static_cast<Index>(v.size()) != rows * cols)
    throw DimensionError("unvec: length does not match target shape");
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = v[j * rows + i];
  return m;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      const double aij = a(i, j);
      for (Index ip = 0; ip < b.rows(); ++ip) {
        double* dst = out.row(b.rows() * i + ip) + b.cols() * j;
        const double* src = b.row(ip);
        for (Index jp = 0; jp < b.cols(); ++jp) dst[jp] = aij * src[jp];
      }
    }
  }
  return out;
}

std::vector<double> kron_matvec(const Matrix& a, const Matrix& b,
                                std::span<const double> g) {
  if (static_cast<Index>(g.size()) != a.cols() * b.cols())
    throw DimensionError("kron_matvec: vector length mismatch");
  Matrix gm = unvec(g, b.cols(), a.cols());
  Matrix result = matmul(matmul(b, gm), transpose(a));
  return vec(result);
}

Matrix rearrange(const Matrix& h, Index m, Index n) {
  if (h.rows() != h.cols() || h.rows() != m * n)
    throw DimensionError("rearrange: H must be square of side m*n");
  Matrix out(m * m, n * n);
  for (Index i = 0; i < m; ++i)
    for (Index ip = 0; ip < m; ++ip)
      for (Index j = 0; j < n; ++j)
        for (Index jp = 0; jp < n; ++jp)
          out(m * i + ip, n * j + jp) = h(m * j + i, m * jp + ip);
  return out;
}

Matrix inverse_rearrange(const Matrix& x, Index m, Index n) {
  if (x.rows() != m * m || x.cols() != n * n)
    throw DimensionError("inverse_rearrange: expected shape m^2 x n^2");
  Matrix h(m * n, m * n);
  for (Index i = 0; i < m; ++i)
    for (Index ip = 0; ip < m; ++ip)
      for (Index j = 0; j < n; ++j)
        for (Index jp = 0; jp < n; ++jp)
          h(m * j + i, m * jp + ip) = x(m * i + ip, n * j + jp);
  return h;
}

namespace {

constexpr double kJacobiTol = 1e-12;
constexpr int kMaxSweeps = 60;

// Column-major working storage for one-sided Jacobi.
struct ColMat {
  Index rows = 0, cols = 0;
  std::vector<double> data;

  ColMat(Index r, Index c) : rows(r), cols(c), data(static_cast<std::size_t>(r * c), 0.0) {}
  double* col(Index j) { return data.data() + j * rows; }
  const double* col(Index j) const { return data.data() + j * rows; }
};

// Completes u-columns for exactly-zero singular values with unit vectors
// orthogonal to the columns already present.
void fill_null_column(ColMat& u, const std::vector<Index>& filled, Index target) {
  const Index r = u.rows;
  std::vector<double> best(static_cast<std::size_t>(r), 0.0);
  double best_norm = -1.0;
  for (Index k = 0; k < r; ++k) {
    std::vector<double> cand(static_cast<std::size_t>(r), 0.0);
    cand[static_cast<std::size_t>(k)] = 1.0;
    for (Index f : filled) {
      double proj = kernels::dot(cand.data(), u.col(f), static_cast<std::size_t>(r));
      kernels::axpy(-proj, u.col(f), cand.data(), static_cast<std::size_t>(r));
    }
    double nrm = std::sqrt(kernels::dot(cand.data(), cand.data(), static_cast<std::size_t>(r)));
    if (nrm > best_norm) {
      best_norm = nrm;
      best = cand;
    }
    if (best_norm > 0.7) break;
  }
  kernels::scal(1.0 / best_norm, best.data(), static_cast<std::size_t>(r));
  std::copy(best.begin(), best.end(), u.col(target));
}

}  // namespace

SvdResult svd(const Matrix& m_in, Index rank) {
  if (m_in.rows() == 0 || m_in.cols() == 0)
    throw DimensionError("svd: empty matrix");
  if (std::min(m_in.rows(), m_in.cols()) > 1200)
    throw DimensionError("svd: matrix exceeds the supported dense size");
  if (!all_finite(m_in)) throw Error("svd: non-finite input");

  const bool transposed = m_in.cols() > m_in.rows();
  const Matrix work_src = transposed ? transpose(m_in) : m_in;
  const Index r = work_src.rows();
  const Index c = work_src.cols();

  ColMat a(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) a.col(j)[i] = work_src(i, j);
  ColMat v(c, c);
  for (Index j = 0; j < c; ++j) v.col(j)[j] = 1.0;

  // Hestenes one-sided Jacobi: rotate column pairs until every pair is
  // orthogonal relative to the product of their norms.
  bool converged = false;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    bool rotated = false;
    for (Index i = 0; i < c; ++i) {
      for (Index j = i + 1; j < c; ++j) {
        const std::size_t len = static_cast<std::size_t>(r);
        double dij = kernels::dot(a.col(i), a.col(j), len);
        if (dij == 0.0) continue;
        double dii = kernels::dot(a.col(i), a.col(i), len);
        double djj = kernels::dot(a.col(j), a.col(j), len);
        double scale = std::sqrt(dii * djj);
        if (scale <= 0.0 || std::abs(dij) <= kJacobiTol * scale) continue;
        double tau = (djj - dii) / (2.0 * dij);
        double sign = tau >= 0.0 ? 1.0 : -1.0;
        double t = -sign / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        double cth = 1.0 / std::sqrt(1.0 + t * t);
        double sth = cth * t;
        kernels::rot(cth, sth, a.col(i), a.col(j), len);
        kernels::rot(cth, sth, v.col(i), v.col(j), static_cast<std::size_t>(c));
        rotated = true;
      }
    }
    converged = !rotated;
  }
  if (!converged)
    throw ConvergenceError("svd: Jacobi sweeps exhausted without convergence");

  std::vector<double> sigma(static_cast<std::size_t>(c));
  for (Index j = 0; j < c; ++j) {
    sigma[static_cast<std::size_t>(j)] =
        std::sqrt(kernels::dot(a.col(j), a.col(j), static_cast<std::size_t>(r)));
  }

  std::vector<Index> order(static_cast<std::size_t>(c));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) {
    return sigma[static_cast<std::size_t>(x)] > sigma[static_cast<std::size_t>(y)];
  });

  ColMat u_sorted(r, c);
  ColMat v_sorted(c, c);
  std::vector<double> sigma_sorted(static_cast<std::size_t>(c));
  std::vector<Index> filled;
  std::vector<Index> pending;
  for (Index pos = 0; pos < c; ++pos) {
    Index src = order[static_cast<std::size_t>(pos)];
    double s = sigma[static_cast<std::size_t>(src)];
    sigma_sorted[static_cast<std::size_t>(pos)] = s;
    std::copy(v.col(src), v.col(src) + c, v_sorted.col(pos));
    if (s > 0.0) {
      std::copy(a.col(src), a.col(src) + r, u_sorted.col(pos));
      kernels::scal(1.0 / s, u_sorted.col(pos), static_cast<std::size_t>(r));
      filled.push_back(pos);
    } else {
      pending.push_back(pos);
    }
  }
  for (Index pos : pending) {
    fill_null_column(u_sorted, filled, pos);
    filled.push_back(pos);
  }

  // Sign convention: the largest-magnitude entry of each u column is made
  // positive; the paired v column flips with it so sigma*u*v^T is preserved.
  for (Index j = 0; j < c; ++j) {
    Index arg = 0;
    double best = -1.0;
    for (Index i = 0; i < r; ++i) {
      double mag = std::abs(u_sorted.col(j)[i]);
      if (mag > best) {
        best = mag;
        arg = i;
      }
    }
    if (u_sorted.col(j)[arg] < 0.0) {
      kernels::scal(-1.0, u_sorted.col(j), static_cast<std::size_t>(r));
      kernels::scal(-1.0, v_sorted.col(j), static_cast<std::size_t>(c));
    }
  }

  Index keep = (rank == kFullRank) ? c : std::min(rank, c);
  if (keep < 1) throw DimensionError("svd: requested rank must be >= 1");

  SvdResult out;
  out.singular_values.assign(sigma_sorted.begin(), sigma_sorted.begin() + keep);
  Matrix u_mat(r, keep);
  Matrix v_mat(c, keep);
  for (Index j = 0; j < keep; ++j) {
    for (Index i = 0; i < r; ++i) u_mat(i, j) = u_sorted.col(j)[i];
    for (Index i = 0; i < c; ++i) v_mat(i, j) = v_sorted.col(j)[i];
  }
  if (transposed) {
    out.left_vectors = std::move(v_mat);
    out.right_vectors = std::move(u_mat);
  } else {
    out.left_vectors = std::move(u_mat);
    out.right_vectors = std::move(v_mat);
  }
  return out;
}

KronFactors identity_factors(Index m, Index n) {
  return {Matrix::identity(m), Matrix::identity(n), FactorSource::custom, 0};
}

Matrix factors_to_matrix(const KronFactors& f) { return kron(f.right, f.left); }

KronFactors nkp_power_iteration(const Matrix& h, Index m, Index n, int steps,
                                const KronFactors& init) {
  if (h.rows() != m * n || h.cols() != m * n)
    throw DimensionError("nkp_power_iteration: H must be (m*n) x (m*n)");
  if (steps < 1) throw DimensionError("nkp_power_iteration: steps must be >= 1");
  if (init.left.rows() != m || init.left.cols() != m ||
      init.right.rows() != n || init.right.cols() != n)
    throw DimensionError("nkp_power_iteration: init factor shapes");
  if (max_abs(h) == 0.0)
    throw DegenerateInputError(
        "nkp_power_iteration: H is zero, factor direction undefined");

  Matrix hhat = rearrange(h, m, n);
  std::vector<double> l = vec(init.left);
  std::vector<double> r = vec(init.right);
  for (int k = 0; k < steps; ++k) {
    std::vector<double> l_next = matvec(hhat, r);
    std::vector<double> r_next = matvec_t(hhat, l);
    l = std::move(l_next);
    r = std::move(r_next);
    if (norm(l) == 0.0 || norm(r) == 0.0)
      throw DegenerateInputError(
          "nkp_power_iteration: iterate collapsed to zero");
  }
  KronFactors out{unvec(l, m, m), unvec(r, n, n), FactorSource::opt_kron,
                  steps};
  if (!all_finite(out.left) || !all_finite(out.right))
    throw ConvergenceError("nkp_power_iteration: iterate overflowed");
  return out;
}

SymEig sym_eig(const Matrix& m_in) {
  if (m_in.rows() != m_in.cols()) throw DimensionError("sym_eig: not square");
  if (!all_finite(m_in)) throw Error("sym_eig: non-finite input");
  const Index n = m_in.rows();

  Matrix a = symmetrize(m_in);
  Matrix q = Matrix::identity(n);
  const double thresh = 1e-14 * frobenius_norm(a);

  bool converged = (n < 2) || thresh == 0.0;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    bool rotated = false;
    for (Index p = 0; p < n; ++p) {
      for (Index r = p + 1; r < n; ++r) {
        double apr = a(p, r);
        if (std::abs(apr) <= thresh) continue;
        double tau = (a(r, r) - a(p, p)) / (2.0 * apr);
        double sign = tau >= 0.0 ? 1.0 : -1.0;
        double t = sign / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = c * t;
        // A <- J^T A J with J the (p, r) rotation [[c, s], [-s, c]].
        a(p, p) -= t * apr;
        a(r, r) += t * apr;
        a(p, r) = 0.0;
        a(r, p) = 0.0;
        for (Index k = 0; k < n; ++k) {
          if (k == p || k == r) continue;
          double akp = a(k, p);
          double akr = a(k, r);
          a(k, p) = c * akp - s * akr;
          a(p, k) = a(k, p);
          a(k, r) = s * akp + c * akr;
          a(r, k) = a(k, r);
        }
        for (Index k = 0; k < n; ++k) {
          double qkp = q(k, p);
          double qkr = q(k, r);
          q(k, p) = c * qkp - s * qkr;
          q(k, r) = s * qkp + c * qkr;
        }
        rotated = true;
      }
    }
    converged = !rotated;
  }
  if (!converged)
    throw ConvergenceError("sym_eig: Jacobi sweeps exhausted");

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index x, Index y) { return a(x, x) < a(y, y); });

  SymEig out;
  out.eigenvalues.resize(static_cast<std::size_t>(n));
  out.eigenvectors = Matrix(n, n);
  for (Index pos = 0; pos < n; ++pos) {
    Index src = order[static_cast<std::size_t>(pos)];
    out.eigenvalues[static_cast<std::size_t>(pos)] = a(src, src);
    for (Index k = 0; k < n; ++k) out.eigenvectors(k, pos) = q(k, src);
  }
  return out;
}

double min_eigenvalue(const Matrix& symmetric) {
  return sym_eig(symmetric).eigenvalues.front();
}

Matrix sym_power(const Matrix& m, double exponent, double damping) {
  if (m.rows() != m.cols()) throw DimensionError("sym_power: not square");
  if (asymmetry(m) > 1e-8)
    throw SpectrumError("sym_power: input is not symmetric within tolerance");

  const Index n = m.rows();
  SymEig eig = sym_eig(m);
  const double tr = trace(m);
  const double neg_floor = -1e-8 * std::max(tr, 0.0) / static_cast<double>(n);
  double eps = damping;
  if (damping == kAutoDamping) {
    eps = 1e-10 * tr / static_cast<double>(n) + 1e-30;
  } else if (damping < 0.0) {
    throw SpectrumError("sym_power: damping must be >= 0 or kAutoDamping");
  }

  Matrix out(n, n);
  std::vector<double> column(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    double lambda = eig.eigenvalues[static_cast<std::size_t>(i)];
    if (lambda < neg_floor)
      throw SpectrumError("sym_power: spectrum negative beyond tolerance");
    lambda = std::max(lambda, 0.0);
    double powered = std::pow(lambda + eps, exponent);
    for (Index k = 0; k < n; ++k)
      column[static_cast<std::size_t>(k)] = eig.eigenvectors(k, i);
    kernels::ger(powered, column.data(), static_cast<std::size_t>(n),
                 column.data(), static_cast<std::size_t>(n), out.data());
  }
  if (!all_finite(out))
    throw SpectrumError(
        "sym_power: non-finite result (singular input with negative exponent "
        "and zero damping)");
  return out;
}

}  // namespace kronprec::kronalg
