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

// Affine-invariant Riemannian geometry of symmetric positive-definite
// matrices. Every matrix function goes through a symmetric
// eigendecomposition S = U diag(lambda) U^T, and f(S) = U diag(f(lambda)) U^T.

#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "spdgan/error.hpp"

namespace spdgan {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kSpdTol = 1e-12;

/// Square real matrix with exactly equal mirrored entries and finite values.
/// Construction symmetrizes its argument as (A + A^T) / 2.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(const Matrix& m);

  static SymmetricMatrix zero(int n);
  static SymmetricMatrix identity(int n);
  static SymmetricMatrix diagonal(std::span<const double> entries);

  int dim() const noexcept { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const noexcept { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }
  double frobenius_norm() const { return m_.norm(); }

 protected:
  struct Trusted {};
  SymmetricMatrix(Matrix m, Trusted) : m_(std::move(m)) {}

  Matrix m_;
};

/// Tangent vectors at any base point are plain symmetric matrices.
using TangentVector = SymmetricMatrix;

class SpdMatrix : public SymmetricMatrix {
 public:
  SpdMatrix() = default;
  /// Throws DataError unless the symmetrized input has smallest eigenvalue
  /// strictly above `tol`.
  explicit SpdMatrix(const Matrix& m, double tol = kSpdTol);

  static SpdMatrix identity(int n);
};

struct EigenDecomposition {
  Vector values;   // ascending
  Matrix vectors;  // orthonormal columns
};

EigenDecomposition sym_eig(const SymmetricMatrix& s);
/// Same as above for a raw matrix already known to be symmetric; used on hot
/// paths that build symmetric products by hand. Only the lower triangle is read.
EigenDecomposition sym_eig(const Matrix& s);

/// Scalar function applied spectrally, together with the derivative data the
/// Daleckii-Krein formula needs.
class MatrixFunction {
 public:
  enum class Kind { exp, log, sqrt, inv_sqrt, pow };

  static MatrixFunction exp() { return MatrixFunction(Kind::exp, 0.0); }
  static MatrixFunction log() { return MatrixFunction(Kind::log, 0.0); }
  static MatrixFunction sqrt() { return MatrixFunction(Kind::sqrt, 0.5); }
  static MatrixFunction inv_sqrt() { return MatrixFunction(Kind::inv_sqrt, -0.5); }
  static MatrixFunction pow(double p) { return MatrixFunction(Kind::pow, p); }

  Kind kind() const noexcept { return kind_; }
  double exponent() const noexcept { return p_; }
  bool needs_positive_spectrum() const noexcept { return kind_ != Kind::exp; }

  double value(double x) const;
  double derivative(double x) const;
  /// (f(a) - f(b)) / (a - b), with the f'((a+b)/2) limit for near-equal
  /// arguments. Symmetric in (a, b) bit-for-bit.
  double divided_difference(double a, double b) const;

 private:
  MatrixFunction(Kind k, double p) : kind_(k), p_(p) {}
  Kind kind_;
  double p_;
};

/// Checks the spectrum against f's domain; throws DomainError naming the
/// offending eigenvalue.
void check_domain(const EigenDecomposition& eig, const MatrixFunction& f);
/// U f(Lambda) U^T, no domain check.
Matrix apply_spectral(const EigenDecomposition& eig, const MatrixFunction& f);

SymmetricMatrix mat_fn(const SymmetricMatrix& s, const MatrixFunction& f);

/// Base point of a tangent space with its square root and inverse square root
/// cached. Immutable after construction.
class ManifoldContext {
 public:
  ManifoldContext() = default;
  explicit ManifoldContext(SpdMatrix base);

  int dim() const noexcept { return base_.dim(); }
  const SpdMatrix& base_point() const noexcept { return base_; }
  const Matrix& sqrt() const noexcept { return sqrt_; }
  const Matrix& inv_sqrt() const noexcept { return inv_sqrt_; }

 private:
  SpdMatrix base_;
  Matrix sqrt_;
  Matrix inv_sqrt_;
};

double airm_inner(const TangentVector& v, const TangentVector& w,
                  const ManifoldContext& ctx);
SpdMatrix exp_map(const ManifoldContext& ctx, const TangentVector& v);
TangentVector log_map(const ManifoldContext& ctx, const SpdMatrix& x);
double geodesic_dist(const SpdMatrix& x, const SpdMatrix& z);
/// Geodesic midpoint x # z = x^{1/2} (x^{-1/2} z x^{-1/2})^{1/2} x^{1/2}.
SpdMatrix geodesic_midpoint(const SpdMatrix& x, const SpdMatrix& z);

struct FrechetOptions {
  double tol = 1e-8;
  int max_iter = 200;
  double step = 1.0;
};

struct FrechetResult {
  SpdMatrix mean;
  double residual = 0.0;  // Frobenius norm of the mean tangent vector
  int iterations = 0;
};

/// Karcher flow mu <- exp_mu(step * mean_i log_mu(x_i)) started from the
/// arithmetic mean. Throws ConvergenceError with the last residual when
/// max_iter is exhausted.
FrechetResult frechet_mean_detailed(std::span<const SpdMatrix> samples,
                                    const FrechetOptions& opts = {});
SpdMatrix frechet_mean(std::span<const SpdMatrix> samples,
                       const FrechetOptions& opts = {});

/// Clamps eigenvalues below `floor` up to `floor`. Returns the input
/// unchanged when nothing needs clamping.
SpdMatrix ensure_spd(const SymmetricMatrix& s, double floor);

/// Upper-triangle half-vectorization, row-major order; off-diagonal entries
/// are multiplied by `off_diagonal_scale`.
Vector vech(const Matrix& s, double off_diagonal_scale = 1.0);
/// Inverse of vech: fills the upper triangle and mirrors it.
Matrix unvech(const Vector& v, int n, double off_diagonal_scale = 1.0);
inline int tri_size(int n) { return n * (n + 1) / 2; }
/// Dimension n with n(n+1)/2 == len, or -1.
int dim_from_tri_size(int len);

}  // namespace spdgan
