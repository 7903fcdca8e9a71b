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

// Reverse-mode automatic differentiation over dense matrices.
//
// A Tape owns an append-only list of nodes. Every node stores its primal
// value, an adjoint slot, and a closure that pushes its adjoint to its
// parents. Parents always precede children, so one reverse sweep visits every
// reachable node exactly once.

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "spdgan/spd.hpp"

namespace spdgan::ad {

class Tape;

class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape& tape() const { return *tape_; }
  int id() const noexcept { return id_; }
  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const { return value()(0, 0); }

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, int)>;

  Var constant(Matrix value);
  Var variable(Matrix value);

  /// Records an op node. `backward` receives the node id; it reads
  /// adjoint(id) and calls accumulate() on the parents.
  Var record(Matrix value, std::span<const Var> parents, BackwardFn backward);

  /// Seeds d(loss)/d(loss) = 1 and sweeps. Throws DimensionError for
  /// non-scalar losses. Adjoints from a previous sweep are cleared first.
  void backward(Var loss);

  /// Adjoint of a node after backward(); a zero matrix if it was unreached.
  Matrix gradient(Var v) const;

  const Matrix& value(int id) const { return nodes_[id].value; }
  const Matrix& adjoint(int id) const { return nodes_[id].adjoint; }
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }
  void accumulate(int id, const Matrix& delta);
  size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix adjoint;
    bool requires_grad = false;
    bool has_adjoint = false;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
};

inline const Matrix& Var::value() const { return tape_->value(id_); }

// Elementwise and linear-algebra ops. Shapes follow Eigen conventions and are
// checked; mismatches throw DimensionError.
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var hadamard(Var a, Var b);
Var scale(Var a, double k);
Var add_scalar(Var a, double k);
/// m + col * 1^T
Var add_col_broadcast(Var m, Var col);
Var transpose(Var a);
Var leaky_relu(Var a, double slope);
Var tanh(Var a);
Var square(Var a);
Var sqrt(Var a);
Var sum(Var a);
Var sum_abs(Var a);
Var sum_sq(Var a);
/// 1 x cols row of per-column sums of squares.
Var col_sum_sq(Var a);
Var slice_rows(Var a, Eigen::Index start, Eigen::Index count);
Var slice_cols(Var a, Eigen::Index start, Eigen::Index count);
Var vstack(Var top, Var bottom);
Var hstack(std::span<const Var> columns);
/// Column vector of length n(n+1)/2 -> symmetric n x n (upper triangle,
/// row-major, mirrored).
Var unvech(Var column, int n);
/// Symmetric n x n -> column of the upper triangle, row-major.
Var vech(Var sym);
/// f applied spectrally to sym(a); backward uses the Daleckii-Krein formula.
Var sym_fn(Var a, const MatrixFunction& f);

/// K_ij = divided difference of f at (lambda_i, lambda_j), K_ii = f'(lambda_i).
Matrix daleckii_krein_kernel(const Vector& eigenvalues, const MatrixFunction& f);

/// Vector-Jacobian product of S -> f(S): U (K o (U^T sym(upstream) U)) U^T.
Matrix mat_fn_vjp(const SymmetricMatrix& s, const MatrixFunction& f, const Matrix& upstream);
Matrix mat_fn_vjp(const EigenDecomposition& eig, const MatrixFunction& f, const Matrix& upstream);

}  // namespace spdgan::ad
