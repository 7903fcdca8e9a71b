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

#include "spdgan/tape.hpp"

#include <sstream>

namespace spdgan::ad {

namespace {

void require(bool ok, const char* op, const Matrix& a, const Matrix& b) {
  if (!ok) {
    std::ostringstream os;
    os << op << ": incompatible shapes " << a.rows() << "x" << a.cols() << " and "
       << b.rows() << "x" << b.cols();
    throw DimensionError(os.str());
  }
}

Matrix sym(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

// ---------------------------------------------------------------------------
// Tape

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix(), false, false, nullptr});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::variable(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix(), true, false, nullptr});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::record(Matrix value, std::span<const Var> parents, BackwardFn backward) {
  bool needs = false;
  for (const Var& p : parents) needs = needs || nodes_[p.id()].requires_grad;
  nodes_.push_back(Node{std::move(value), Matrix(), needs, false,
                        needs ? std::move(backward) : nullptr});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::accumulate(int id, const Matrix& delta) {
  Node& node = nodes_[id];
  if (!node.requires_grad) return;
  if (!node.has_adjoint) {
    node.adjoint = delta;
    node.has_adjoint = true;
  } else {
    node.adjoint += delta;
  }
}

void Tape::backward(Var loss) {
  const Matrix& lv = nodes_[loss.id()].value;
  if (lv.rows() != 1 || lv.cols() != 1) {
    std::ostringstream os;
    os << "backward: loss must be scalar, got " << lv.rows() << "x" << lv.cols();
    throw DimensionError(os.str());
  }
  for (Node& n : nodes_) {
    n.has_adjoint = false;
    n.adjoint.resize(0, 0);
  }
  if (!nodes_[loss.id()].requires_grad) return;
  nodes_[loss.id()].adjoint = Matrix::Ones(1, 1);
  nodes_[loss.id()].has_adjoint = true;
  for (int id = loss.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.has_adjoint && n.backward) n.backward(*this, id);
  }
}

Matrix Tape::gradient(Var v) const {
  const Node& n = nodes_[v.id()];
  if (!n.has_adjoint) return Matrix::Zero(n.value.rows(), n.value.cols());
  return n.adjoint;
}

// ---------------------------------------------------------------------------
// Ops

Var matmul(Var a, Var b) {
  require(a.cols() == b.rows(), "matmul", a.value(), b.value());
  const int ia = a.id(), ib = b.id();
  const Var parents[] = {a, b};
  return a.tape().record(a.value() * b.value(), parents, [ia, ib](Tape& t, int self) {
    const Matrix& g = t.adjoint(self);
    if (t.requires_grad(ia)) t.accumulate(ia, g * t.value(ib).transpose());
    if (t.requires_grad(ib)) t.accumulate(ib, t.value(ia).transpose() * g);
  });
}

Var add(Var a, Var b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "add", a.value(), b.value());
  const int ia = a.id(), ib = b.id();
  const Var parents[] = {a, b};
  return a.tape().record(a.value() + b.value(), parents, [ia, ib](Tape& t, int self) {
    t.accumulate(ia, t.adjoint(self));
    t.accumulate(ib, t.adjoint(self));
  });
}

Var sub(Var a, Var b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "sub", a.value(), b.value());
  const int ia = a.id(), ib = b.id();
  const Var parents[] = {a, b};
  return a.tape().record(a.value() - b.value(), parents, [ia, ib](Tape& t, int self) {
    t.accumulate(ia, t.adjoint(self));
    t.accumulate(ib, -t.adjoint(self));
  });
}

Var hadamard(Var a, Var b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "hadamard", a.value(), b.value());
  const int ia = a.id(), ib = b.id();
  const Var parents[] = {a, b};
  return a.tape().record(a.value().cwiseProduct(b.value()), parents,
                         [ia, ib](Tape& t, int self) {
                           const Matrix& g = t.adjoint(self);
                           if (t.requires_grad(ia)) t.accumulate(ia, g.cwiseProduct(t.value(ib)));
                           if (t.requires_grad(ib)) t.accumulate(ib, g.cwiseProduct(t.value(ia)));
                         });
}

Var scale(Var a, double k) {
  const int ia = a.id();
  const Var parents[] = {a};
  return a.tape().record(k * a.value(), parents, [ia, k](Tape& t, int self) {
    t.accumulate(ia, k * t.adjoint(self));
  });
}

Var add_scalar(Var a, double k) {
  const int ia = a.id();
  const Var parents[] = {a};
  return a.tape().record((a.value().array() + k).matrix(), parents,
                         [ia](Tape& t, int self) { t.accumulate(ia, t.adjoint(self)); });
}

Var add_col_broadcast(Var m, Var col) {
  require(col.cols() == 1 && col.rows() == m.rows(), "add_col_broadcast", m.value(), col.value());
  const int im = m.id(), ic = col.id();
  const Var parents[] = {m, col};
  Matrix v = m.value();
  v.colwise() += col.value().col(0);
  return m.tape().record(std::move(v), parents, [im, ic](Tape& t, int self) {
    const Matrix& g = t.adjoint(self);
    t.accumulate(im, g);
    if (t.requires_grad(ic)) t.accumulate(ic, g.rowwise().sum());
  });
}

Var transpose(Var a) {
  const int ia = a.id();
  const Var parents[] = {a};
  return a.tape().record(a.value().transpose(), parents, [ia](Tape& t, int self) {
    t.accumulate(ia, t.adjoint(self).transpose());
  });
}

Var leaky_relu(Var a, double slope) {
  const int ia = a.id();
  const Var parents[] = {a};
  const Matrix v = a.value().unaryExpr([slope](double x) { return x > 0.0 ? x : slope * x; });
  return a.tape().record(v, parents, [ia, slope](Tape& t, int self) {
    const Matrix d = t.value(ia).unaryExpr([slope](double x) { return x > 0.0 ? 1.0 : slope; });
    t.accumulate(ia, t.adjoint(self).cwiseProduct(d));
  });
}

Var tanh(Var a) {
  const int ia = a.id();
  const Var parents[] = {a};
  return a.tape().record(a.value().array().tanh().matrix(), parents, [ia](Tape& t, int self) {
    const Matrix& y = t.value(self);
    t.accumulate(ia, (t.adjoint(self).array() * (1.0 - y.array().square())).matrix());
  });
}

Var square(Var a) {
  const int ia = a.id();
  const Var parents[] = {a};
  return a.tape().record(a.value().array().square().matrix(), parents, [ia](Tape& t, int self) {
    t.accumulate(ia, (2.0 * t.adjoint(self).array() * t.value(ia).array()).matrix());
  });
}

Var sqrt(Var a) {
  const int ia = a.id();
  const Var parents[] = {a};
  return a.tape().record(a.value().array().sqrt().matrix(), parents, [ia](Tape& t, int self) {
    // Zero derivative at 0 so that sqrt(sum of squares) of a zero vector stays finite.
    const Matrix& r = t.value(self);
    const Matrix& up = t.adjoint(self);
    Matrix d(r.rows(), r.cols());
    for (Eigen::Index i = 0; i < r.size(); ++i) d(i) = r(i) > 0.0 ? 0.5 * up(i) / r(i) : 0.0;
    t.accumulate(ia, d);
  });
}

Var sum(Var a) {
  const int ia = a.id();
  const Var parents[] = {a};
  return a.tape().record(Matrix::Constant(1, 1, a.value().sum()), parents,
                         [ia](Tape& t, int self) {
                           const Matrix& v = t.value(ia);
                           t.accumulate(ia, Matrix::Constant(v.rows(), v.cols(), t.adjoint(self)(0, 0)));
                         });
}

Var sum_abs(Var a) {
  const int ia = a.id();
  const Var parents[] = {a};
  return a.tape().record(Matrix::Constant(1, 1, a.value().cwiseAbs().sum()), parents,
                         [ia](Tape& t, int self) {
                           const double g = t.adjoint(self)(0, 0);
                           const Matrix s = t.value(ia).unaryExpr([g](double x) {
                             return x > 0.0 ? g : (x < 0.0 ? -g : 0.0);
                           });
                           t.accumulate(ia, s);
                         });
}

Var sum_sq(Var a) {
  const int ia = a.id();
  const Var parents[] = {a};
  return a.tape().record(Matrix::Constant(1, 1, a.value().squaredNorm()), parents,
                         [ia](Tape& t, int self) {
                           t.accumulate(ia, 2.0 * t.adjoint(self)(0, 0) * t.value(ia));
                         });
}

Var col_sum_sq(Var a) {
  const int ia = a.id();
  const Var parents[] = {a};
  Matrix v = a.value().colwise().squaredNorm();
  return a.tape().record(std::move(v), parents, [ia](Tape& t, int self) {
    Matrix d = 2.0 * t.value(ia);
    d.array().rowwise() *= t.adjoint(self).row(0).array();
    t.accumulate(ia, d);
  });
}

Var slice_rows(Var a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.rows()) {
    throw DimensionError("slice_rows: range out of bounds");
  }
  const int ia = a.id();
  const Eigen::Index rows = a.rows(), cols = a.cols();
  const Var parents[] = {a};
  return a.tape().record(a.value().middleRows(start, count), parents,
                         [ia, start, count, rows, cols](Tape& t, int self) {
                           Matrix d = Matrix::Zero(rows, cols);
                           d.middleRows(start, count) = t.adjoint(self);
                           t.accumulate(ia, d);
                         });
}

Var slice_cols(Var a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.cols()) {
    throw DimensionError("slice_cols: range out of bounds");
  }
  const int ia = a.id();
  const Eigen::Index rows = a.rows(), cols = a.cols();
  const Var parents[] = {a};
  return a.tape().record(a.value().middleCols(start, count), parents,
                         [ia, start, count, rows, cols](Tape& t, int self) {
                           Matrix d = Matrix::Zero(rows, cols);
                           d.middleCols(start, count) = t.adjoint(self);
                           t.accumulate(ia, d);
                         });
}

Var vstack(Var top, Var bottom) {
  require(top.cols() == bottom.cols(), "vstack", top.value(), bottom.value());
  const int it = top.id(), ib = bottom.id();
  const Eigen::Index rt = top.rows(), rb = bottom.rows();
  Matrix v(rt + rb, top.cols());
  v.topRows(rt) = top.value();
  v.bottomRows(rb) = bottom.value();
  const Var parents[] = {top, bottom};
  return top.tape().record(std::move(v), parents, [it, ib, rt, rb](Tape& t, int self) {
    const Matrix& g = t.adjoint(self);
    if (t.requires_grad(it)) t.accumulate(it, g.topRows(rt));
    if (t.requires_grad(ib)) t.accumulate(ib, g.bottomRows(rb));
  });
}

Var hstack(std::span<const Var> columns) {
  if (columns.empty()) throw DimensionError("hstack: no inputs");
  const Eigen::Index rows = columns.front().rows();
  Eigen::Index total = 0;
  for (const Var& c : columns) {
    require(c.rows() == rows, "hstack", columns.front().value(), c.value());
    total += c.cols();
  }
  Matrix v(rows, total);
  std::vector<std::pair<int, Eigen::Index>> parts;
  parts.reserve(columns.size());
  Eigen::Index offset = 0;
  for (const Var& c : columns) {
    v.middleCols(offset, c.cols()) = c.value();
    parts.emplace_back(c.id(), offset);
    offset += c.cols();
  }
  return columns.front().tape().record(std::move(v), columns, [parts](Tape& t, int self) {
    const Matrix& g = t.adjoint(self);
    for (const auto& [id, off] : parts) {
      if (t.requires_grad(id)) t.accumulate(id, g.middleCols(off, t.value(id).cols()));
    }
  });
}

Var unvech(Var column, int n) {
  if (column.cols() != 1 || column.rows() != tri_size(n)) {
    throw DimensionError("unvech: expected a column of length n(n+1)/2");
  }
  const int ic = column.id();
  const Var parents[] = {column};
  return column.tape().record(spdgan::unvech(column.value().col(0), n), parents,
                              [ic, n](Tape& t, int self) {
                                const Matrix& g = t.adjoint(self);
                                Matrix d(tri_size(n), 1);
                                int k = 0;
                                for (int i = 0; i < n; ++i) {
                                  for (int j = i; j < n; ++j) {
                                    d(k++, 0) = (i == j) ? g(i, i) : g(i, j) + g(j, i);
                                  }
                                }
                                t.accumulate(ic, d);
                              });
}

Var vech(Var s) {
  if (s.rows() != s.cols()) throw DimensionError("vech: matrix is not square");
  const int is = s.id();
  const int n = static_cast<int>(s.rows());
  const Var parents[] = {s};
  return s.tape().record(Matrix(spdgan::vech(s.value())), parents, [is, n](Tape& t, int self) {
    const Matrix& g = t.adjoint(self);
    Matrix d = Matrix::Zero(n, n);
    int k = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) d(i, j) = g(k++, 0);
    }
    t.accumulate(is, d);
  });
}

Var sym_fn(Var a, const MatrixFunction& f) {
  if (a.rows() != a.cols()) throw DimensionError("sym_fn: matrix is not square");
  EigenDecomposition eig = sym_eig(Matrix(sym(a.value())));
  check_domain(eig, f);
  Matrix v = apply_spectral(eig, f);
  const int ia = a.id();
  const Var parents[] = {a};
  return a.tape().record(std::move(v), parents,
                         [ia, f, eig = std::move(eig)](Tape& t, int self) {
                           t.accumulate(ia, mat_fn_vjp(eig, f, t.adjoint(self)));
                         });
}

// ---------------------------------------------------------------------------
// Daleckii-Krein

Matrix daleckii_krein_kernel(const Vector& eigenvalues, const MatrixFunction& f) {
  const Eigen::Index n = eigenvalues.size();
  Matrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = f.derivative(eigenvalues(i));
    for (Eigen::Index j = i + 1; j < n; ++j) {
      k(i, j) = k(j, i) = f.divided_difference(eigenvalues(i), eigenvalues(j));
    }
  }
  return k;
}

Matrix mat_fn_vjp(const EigenDecomposition& eig, const MatrixFunction& f,
                  const Matrix& upstream) {
  const Matrix& u = eig.vectors;
  Matrix inner = u.transpose() * sym(upstream) * u;
  inner.array() *= daleckii_krein_kernel(eig.values, f).array();
  return sym(u * inner * u.transpose());
}

Matrix mat_fn_vjp(const SymmetricMatrix& s, const MatrixFunction& f, const Matrix& upstream) {
  if (upstream.rows() != s.dim() || upstream.cols() != s.dim()) {
    throw DimensionError("mat_fn_vjp: adjoint shape does not match S");
  }
  const EigenDecomposition eig = sym_eig(s);
  check_domain(eig, f);
  return mat_fn_vjp(eig, f, upstream);
}

}  // namespace spdgan::ad
