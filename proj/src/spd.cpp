/*
 * Copyright 2026 The spdgan Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "spdgan/spd.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace spdgan {

EigenFailure::EigenFailure(int dim, double condition_estimate)
    : NumericalError([&] {
        std::ostringstream os;
        os << "symmetric eigensolver did not converge (n=" << dim
           << ", condition estimate " << condition_estimate << ")";
        return os.str();
      }()),
      dim_(dim),
      cond_(condition_estimate) {}

namespace {

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

void require_square(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    std::ostringstream os;
    os << "expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
    throw DimensionError(os.str());
  }
}

void require_same_dim(int a, int b, const char* what) {
  if (a != b) {
    std::ostringstream os;
    os << what << ": dimension mismatch (" << a << " vs " << b << ")";
    throw DimensionError(os.str());
  }
}

double condition_estimate(const Matrix& s) {
  const Vector d = s.diagonal().cwiseAbs();
  const double lo = std::max(d.minCoeff(), 1e-300);
  return s.norm() / lo;
}

}  // namespace

// ---------------------------------------------------------------------------
// SymmetricMatrix / SpdMatrix

SymmetricMatrix::SymmetricMatrix(const Matrix& m) {
  require_square(m);
  if (!m.allFinite()) throw DataError("symmetric matrix has non-finite entries");
  m_ = symmetrized(m);
}

SymmetricMatrix SymmetricMatrix::zero(int n) {
  return SymmetricMatrix(Matrix::Zero(n, n), Trusted{});
}

SymmetricMatrix SymmetricMatrix::identity(int n) {
  return SymmetricMatrix(Matrix::Identity(n, n), Trusted{});
}

SymmetricMatrix SymmetricMatrix::diagonal(std::span<const double> entries) {
  Matrix m = Matrix::Zero(entries.size(), entries.size());
  for (size_t i = 0; i < entries.size(); ++i) m(i, i) = entries[i];
  return SymmetricMatrix(m);
}

SpdMatrix::SpdMatrix(const Matrix& m, double tol) : SymmetricMatrix(m) {
  const EigenDecomposition eig = sym_eig(m_);
  if (!(eig.values(0) > tol)) {
    std::ostringstream os;
    os << "matrix is not positive definite: smallest eigenvalue "
       << eig.values(0) << " <= " << tol;
    throw DataError(os.str());
  }
}

SpdMatrix SpdMatrix::identity(int n) { return SpdMatrix(Matrix::Identity(n, n)); }

// ---------------------------------------------------------------------------
// Eigendecomposition and spectral functions

EigenDecomposition sym_eig(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(s, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw EigenFailure(static_cast<int>(s.rows()), condition_estimate(s));
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

EigenDecomposition sym_eig(const SymmetricMatrix& s) { return sym_eig(s.matrix()); }

double MatrixFunction::value(double x) const {
  switch (kind_) {
    case Kind::exp:
      return std::exp(x);
    case Kind::log:
      return std::log(x);
    case Kind::sqrt:
      return std::sqrt(x);
    case Kind::inv_sqrt:
      return 1.0 / std::sqrt(x);
    case Kind::pow:
      return std::pow(x, p_);
  }
  return 0.0;
}

double MatrixFunction::derivative(double x) const {
  switch (kind_) {
    case Kind::exp:
      return std::exp(x);
    case Kind::log:
      return 1.0 / x;
    case Kind::sqrt:
      return 0.5 / std::sqrt(x);
    case Kind::inv_sqrt:
      return -0.5 / (x * std::sqrt(x));
    case Kind::pow:
      return p_ * std::pow(x, p_ - 1.0);
  }
  return 0.0;
}

double MatrixFunction::divided_difference(double a, double b) const {
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  const double gap = hi - lo;
  if (gap < 1e-10 * (1.0 + std::max(std::abs(lo), std::abs(hi)))) {
    return derivative(0.5 * (lo + hi));
  }
  // Cancellation-free forms: the plain quotient loses digits when the gap is
  // small relative to the arguments.
  switch (kind_) {
    case Kind::exp:
      return std::exp(lo) * std::expm1(gap) / gap;
    case Kind::log:
      return std::log1p(gap / lo) / gap;
    case Kind::sqrt:
    case Kind::inv_sqrt:
    case Kind::pow:
      return std::pow(lo, p_) * std::expm1(p_ * std::log1p(gap / lo)) / gap;
  }
  return 0.0;
}

void check_domain(const EigenDecomposition& eig, const MatrixFunction& f) {
  if (!f.needs_positive_spectrum()) return;
  const double lowest = eig.values(0);
  if (!(lowest > kSpdTol)) {
    std::ostringstream os;
    os << "matrix function domain violation: eigenvalue " << lowest
       << " is not above " << kSpdTol;
    throw DomainError(os.str(), lowest);
  }
}

Matrix apply_spectral(const EigenDecomposition& eig, const MatrixFunction& f) {
  const Eigen::Index n = eig.values.size();
  Vector fv(n);
  for (Eigen::Index i = 0; i < n; ++i) fv(i) = f.value(eig.values(i));
  const Matrix scaled = eig.vectors * fv.asDiagonal();
  return symmetrized(scaled * eig.vectors.transpose());
}

SymmetricMatrix mat_fn(const SymmetricMatrix& s, const MatrixFunction& f) {
  const EigenDecomposition eig = sym_eig(s);
  check_domain(eig, f);
  return SymmetricMatrix(apply_spectral(eig, f));
}

// ---------------------------------------------------------------------------
// AIRM geometry

ManifoldContext::ManifoldContext(SpdMatrix base) : base_(std::move(base)) {
  const EigenDecomposition eig = sym_eig(base_);
  check_domain(eig, MatrixFunction::sqrt());
  sqrt_ = apply_spectral(eig, MatrixFunction::sqrt());
  inv_sqrt_ = apply_spectral(eig, MatrixFunction::inv_sqrt());
}

double airm_inner(const TangentVector& v, const TangentVector& w,
                  const ManifoldContext& ctx) {
  require_same_dim(v.dim(), ctx.dim(), "airm_inner");
  require_same_dim(w.dim(), ctx.dim(), "airm_inner");
  const Matrix a = ctx.inv_sqrt() * v.matrix() * ctx.inv_sqrt();
  const Matrix b = ctx.inv_sqrt() * w.matrix() * ctx.inv_sqrt();
  return (a.array() * b.array()).sum();
}

SpdMatrix exp_map(const ManifoldContext& ctx, const TangentVector& v) {
  require_same_dim(v.dim(), ctx.dim(), "exp_map");
  const Matrix inner = symmetrized(ctx.inv_sqrt() * v.matrix() * ctx.inv_sqrt());
  const Matrix e = apply_spectral(sym_eig(inner), MatrixFunction::exp());
  return SpdMatrix(ctx.sqrt() * e * ctx.sqrt());
}

TangentVector log_map(const ManifoldContext& ctx, const SpdMatrix& x) {
  require_same_dim(x.dim(), ctx.dim(), "log_map");
  const Matrix inner = symmetrized(ctx.inv_sqrt() * x.matrix() * ctx.inv_sqrt());
  const EigenDecomposition eig = sym_eig(inner);
  check_domain(eig, MatrixFunction::log());
  const Matrix l = apply_spectral(eig, MatrixFunction::log());
  return TangentVector(ctx.sqrt() * l * ctx.sqrt());
}

double geodesic_dist(const SpdMatrix& x, const SpdMatrix& z) {
  require_same_dim(x.dim(), z.dim(), "geodesic_dist");
  const EigenDecomposition ex = sym_eig(x);
  check_domain(ex, MatrixFunction::inv_sqrt());
  const Matrix p = apply_spectral(ex, MatrixFunction::inv_sqrt());
  const EigenDecomposition es = sym_eig(symmetrized(p * z.matrix() * p));
  check_domain(es, MatrixFunction::log());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < es.values.size(); ++i) {
    const double l = std::log(es.values(i));
    acc += l * l;
  }
  return std::sqrt(acc);
}

SpdMatrix geodesic_midpoint(const SpdMatrix& x, const SpdMatrix& z) {
  require_same_dim(x.dim(), z.dim(), "geodesic_midpoint");
  const ManifoldContext ctx(x);
  const Matrix inner = symmetrized(ctx.inv_sqrt() * z.matrix() * ctx.inv_sqrt());
  const EigenDecomposition eig = sym_eig(inner);
  check_domain(eig, MatrixFunction::sqrt());
  return SpdMatrix(ctx.sqrt() * apply_spectral(eig, MatrixFunction::sqrt()) * ctx.sqrt());
}

FrechetResult frechet_mean_detailed(std::span<const SpdMatrix> samples,
                                    const FrechetOptions& opts) {
  if (samples.empty()) throw DimensionError("frechet_mean: empty sample list");
  const int n = samples.front().dim();
  Matrix arithmetic = Matrix::Zero(n, n);
  for (const SpdMatrix& s : samples) {
    require_same_dim(s.dim(), n, "frechet_mean");
    arithmetic += s.matrix();
  }
  arithmetic /= static_cast<double>(samples.size());

  Matrix mu = ensure_spd(SymmetricMatrix(arithmetic), kSpdTol).matrix();
  double residual = 0.0;
  for (int iter = 0; iter <= opts.max_iter; ++iter) {
    const EigenDecomposition em = sym_eig(mu);
    check_domain(em, MatrixFunction::sqrt());
    const Matrix root = apply_spectral(em, MatrixFunction::sqrt());
    const Matrix inv_root = apply_spectral(em, MatrixFunction::inv_sqrt());

    Matrix mean_log = Matrix::Zero(n, n);
    for (const SpdMatrix& s : samples) {
      const EigenDecomposition es = sym_eig(symmetrized(inv_root * s.matrix() * inv_root));
      check_domain(es, MatrixFunction::log());
      mean_log += apply_spectral(es, MatrixFunction::log());
    }
    mean_log /= static_cast<double>(samples.size());

    residual = (root * mean_log * root).norm();
    if (residual <= opts.tol) {
      return {SpdMatrix(mu), residual, iter};
    }
    if (iter == opts.max_iter) break;
    const Matrix step = apply_spectral(sym_eig(Matrix(opts.step * mean_log)),
                                       MatrixFunction::exp());
    mu = symmetrized(root * step * root);
  }
  std::ostringstream os;
  os << "frechet_mean: no convergence after " << opts.max_iter
     << " iterations (residual " << residual << ", tol " << opts.tol << ")";
  throw ConvergenceError(os.str(), residual);
}

SpdMatrix frechet_mean(std::span<const SpdMatrix> samples, const FrechetOptions& opts) {
  return frechet_mean_detailed(samples, opts).mean;
}

SpdMatrix ensure_spd(const SymmetricMatrix& s, double floor) {
  if (!(floor > 0.0)) throw DimensionError("ensure_spd: floor must be positive");
  const double tol = std::min(kSpdTol, 0.5 * floor);
  EigenDecomposition eig = sym_eig(s);
  if (eig.values(0) >= floor) return SpdMatrix(s.matrix(), tol);
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    eig.values(i) = std::max(eig.values(i), floor);
  }
  const Matrix out = eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose();
  return SpdMatrix(out, tol);
}

// ---------------------------------------------------------------------------
// Half-vectorization

Vector vech(const Matrix& s, double off_diagonal_scale) {
  const int n = static_cast<int>(s.rows());
  Vector out(tri_size(n));
  int k = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      out(k++) = (i == j) ? s(i, j) : off_diagonal_scale * s(i, j);
    }
  }
  return out;
}

Matrix unvech(const Vector& v, int n, double off_diagonal_scale) {
  if (v.size() != tri_size(n)) throw DimensionError("unvech: length does not match n(n+1)/2");
  Matrix out(n, n);
  int k = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double x = (i == j) ? v(k) : v(k) / off_diagonal_scale;
      out(i, j) = x;
      out(j, i) = x;
      ++k;
    }
  }
  return out;
}

int dim_from_tri_size(int len) {
  for (int n = 1; tri_size(n) <= len; ++n) {
    if (tri_size(n) == len) return n;
  }
  return -1;
}

}  // namespace spdgan
