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

#include <doctest.h>

#include <cmath>
#include <vector>

#include "spdgan/spd.hpp"
#include "test_util.hpp"

using namespace spdgan;
using testutil::Rng;

namespace {

Matrix m2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

SpdMatrix scalar(double x) { return SpdMatrix(Matrix::Constant(1, 1, x)); }

// Sum of squared geodesic distances, evaluated through the generalized
// eigenvalues of (x, z) rather than matrix square roots.
double cost(const Matrix& x, const std::vector<Matrix>& pts) {
  double acc = 0.0;
  for (const Matrix& p : pts) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(p, x);
    for (int i = 0; i < ges.eigenvalues().size(); ++i) {
      const double l = std::log(ges.eigenvalues()(i));
      acc += l * l;
    }
  }
  return acc;
}

}  // namespace

TEST_CASE("symmetric matrix construction") {
  const SymmetricMatrix s(m2(1.0, 2.0, 4.0, 3.0));
  CHECK(s(0, 1) == s(1, 0));
  CHECK(s(0, 1) == doctest::Approx(3.0));
  CHECK_THROWS_AS(SymmetricMatrix(Matrix(2, 3)), DimensionError);
  Matrix bad = Matrix::Identity(2, 2);
  bad(0, 1) = std::nan("");
  CHECK_THROWS_AS(SymmetricMatrix{bad}, DataError);
  CHECK_THROWS_AS(SpdMatrix(m2(1, 0, 0, -1)), DataError);
}

TEST_CASE("sym_eig examples") {
  SUBCASE("identity") {
    const EigenDecomposition e = sym_eig(SymmetricMatrix::identity(3));
    CHECK(e.values.isApprox(Vector::Ones(3)));
    CHECK((e.vectors.transpose() * e.vectors - Matrix::Identity(3, 3)).norm() <= 1e-12);
  }
  SUBCASE("diagonal") {
    const double d[] = {1.0, 4.0};
    const EigenDecomposition e = sym_eig(SymmetricMatrix::diagonal(d));
    CHECK(e.values(0) == doctest::Approx(1.0));
    CHECK(e.values(1) == doctest::Approx(4.0));
    CHECK(e.vectors.cwiseAbs().isApprox(Matrix::Identity(2, 2)));
  }
  SUBCASE("characteristic polynomial") {
    // (2 - l)^2 - 1 = 0 -> l in {1, 3}
    const EigenDecomposition e = sym_eig(SymmetricMatrix(m2(2, 1, 1, 2)));
    CHECK(e.values(0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(e.values(1) == doctest::Approx(3.0).epsilon(1e-14));
  }
  SUBCASE("invariants on random input") {
    Rng rng(7);
    for (int n = 2; n <= 8; ++n) {
      const SymmetricMatrix s(testutil::random_symmetric(n, rng, 3.0));
      const EigenDecomposition e = sym_eig(s);
      const Matrix rec = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
      CHECK((rec - s.matrix()).norm() <= 1e-10 * (1.0 + s.frobenius_norm()));
      CHECK((e.vectors.transpose() * e.vectors - Matrix::Identity(n, n)).norm() <= 1e-10);
      for (int i = 1; i < n; ++i) CHECK(e.values(i - 1) <= e.values(i));
    }
  }
}

TEST_CASE("mat_fn examples") {
  CHECK(mat_fn(SymmetricMatrix::zero(3), MatrixFunction::exp()).matrix().isApprox(Matrix::Identity(3, 3)));

  const double d[] = {2.0, 3.0};
  const SymmetricMatrix l = mat_fn(SymmetricMatrix::diagonal(d), MatrixFunction::log());
  CHECK(l(0, 0) == doctest::Approx(std::log(2.0)));
  CHECK(l(1, 1) == doctest::Approx(std::log(3.0)));
  CHECK(std::abs(l(0, 1)) <= 1e-15);

  const double t = 0.7;
  const Matrix a = m2(0, t, t, 0);
  const Matrix e = mat_fn(SymmetricMatrix(a), MatrixFunction::exp()).matrix();
  CHECK(testutil::rel_err(e, testutil::expm_series(a)) <= 1e-13);
  CHECK(e(0, 0) == doctest::Approx(std::cosh(t)).epsilon(1e-14));
  CHECK(e(0, 1) == doctest::Approx(std::sinh(t)).epsilon(1e-14));

  SUBCASE("log then exp round trip") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 2 + trial % 7;
      const SymmetricMatrix s(testutil::random_spd(n, rng, 2.0));
      const SymmetricMatrix back = mat_fn(mat_fn(s, MatrixFunction::log()), MatrixFunction::exp());
      CHECK(testutil::rel_err(back.matrix(), s.matrix()) <= 1e-9);
    }
  }
  SUBCASE("sqrt, inv_sqrt, pow agree") {
    Rng rng(3);
    const SymmetricMatrix s(testutil::random_spd(4, rng));
    const Matrix r = mat_fn(s, MatrixFunction::sqrt()).matrix();
    const Matrix ir = mat_fn(s, MatrixFunction::inv_sqrt()).matrix();
    CHECK(testutil::rel_err(r * r, s.matrix()) <= 1e-12);
    CHECK(testutil::rel_err(r * ir, Matrix::Identity(4, 4)) <= 1e-12);
    CHECK(testutil::rel_err(mat_fn(s, MatrixFunction::pow(2.0)).matrix(), s.matrix() * s.matrix()) <= 1e-12);
  }
  SUBCASE("domain violations report the eigenvalue") {
    const double bad[] = {1.0, -0.5};
    try {
      mat_fn(SymmetricMatrix::diagonal(bad), MatrixFunction::log());
      FAIL("expected DomainError");
    } catch (const DomainError& err) {
      CHECK(err.eigenvalue() == doctest::Approx(-0.5));
    }
    const double zero[] = {0.0, 1.0};
    CHECK_THROWS_AS(mat_fn(SymmetricMatrix::diagonal(zero), MatrixFunction::sqrt()), DomainError);
    CHECK_NOTHROW(mat_fn(SymmetricMatrix::diagonal(bad), MatrixFunction::exp()));
  }
}

TEST_CASE("divided differences are symmetric and stable") {
  const MatrixFunction fns[] = {MatrixFunction::exp(), MatrixFunction::log(), MatrixFunction::sqrt(),
                                MatrixFunction::inv_sqrt(), MatrixFunction::pow(1.7)};
  for (const MatrixFunction& f : fns) {
    CHECK(f.divided_difference(0.3, 2.5) == f.divided_difference(2.5, 0.3));
    const double direct = (f.value(2.5) - f.value(0.3)) / (2.5 - 0.3);
    CHECK(f.divided_difference(0.3, 2.5) == doctest::Approx(direct).epsilon(1e-13));
    // near-degenerate: approaches the derivative
    CHECK(f.divided_difference(1.2, 1.2 + 1e-9) == doctest::Approx(f.derivative(1.2)).epsilon(1e-8));
    CHECK(f.divided_difference(1.2, 1.2) == f.derivative(1.2));
  }
}

TEST_CASE("airm_inner") {
  Rng rng(5);
  const SymmetricMatrix v(testutil::random_symmetric(3, rng));
  const SymmetricMatrix w(testutil::random_symmetric(3, rng));
  const ManifoldContext id(SpdMatrix::identity(3));
  CHECK(airm_inner(v, w, id) == doctest::Approx((v.matrix() * w.matrix()).trace()));

  const ManifoldContext y(SpdMatrix(testutil::random_spd(3, rng)));
  CHECK(airm_inner(v, v, y) > 0.0);
  CHECK(airm_inner(v, w, y) == doctest::Approx(airm_inner(w, v, y)).epsilon(1e-13));
  const SymmetricMatrix vw(2.0 * v.matrix() + w.matrix());
  CHECK(airm_inner(vw, w, y) ==
        doctest::Approx(2.0 * airm_inner(v, w, y) + airm_inner(w, w, y)).epsilon(1e-12));

  const ManifoldContext two(scalar(2.0));
  CHECK(airm_inner(SymmetricMatrix(Matrix::Constant(1, 1, 3.0)), SymmetricMatrix(Matrix::Constant(1, 1, 4.0)), two) ==
        doctest::Approx(3.0).epsilon(1e-15));
  CHECK_THROWS_AS(airm_inner(v, SymmetricMatrix::zero(2), y), DimensionError);
}

TEST_CASE("exp_map and log_map examples") {
  Rng rng(9);
  const SpdMatrix y(testutil::random_spd(4, rng));
  const ManifoldContext ctx(y);
  CHECK(testutil::rel_err(exp_map(ctx, SymmetricMatrix::zero(4)).matrix(), y.matrix()) <= 1e-14);
  CHECK(log_map(ctx, y).frobenius_norm() <= 1e-13);

  const ManifoldContext id(SpdMatrix::identity(4));
  const SymmetricMatrix v(testutil::random_symmetric(4, rng));
  CHECK(testutil::rel_err(exp_map(id, v).matrix(), testutil::expm_series(v.matrix())) <= 1e-12);
  const SpdMatrix x(testutil::random_spd(4, rng));
  CHECK(testutil::rel_err(log_map(id, x).matrix(), mat_fn(x, MatrixFunction::log()).matrix()) <= 1e-14);

  const ManifoldContext two(scalar(2.0));
  const double e = std::exp(1.0);
  CHECK(exp_map(two, SymmetricMatrix(Matrix::Constant(1, 1, 2.0)))(0, 0) == doctest::Approx(2.0 * e).epsilon(1e-15));
  CHECK(log_map(two, scalar(2.0 * e))(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK_THROWS_AS(exp_map(two, v), DimensionError);
}

TEST_CASE("geodesic distance examples") {
  Rng rng(13);
  const SpdMatrix x(testutil::random_spd(5, rng));
  CHECK(geodesic_dist(x, x) <= 1e-13);
  CHECK(geodesic_dist(scalar(1.0), scalar(std::exp(2.0))) == doctest::Approx(2.0).epsilon(1e-14));
  const double a[] = {1.0, 4.0}, b[] = {2.0, 2.0};
  const SpdMatrix da(SymmetricMatrix::diagonal(a).matrix()), db(SymmetricMatrix::diagonal(b).matrix());
  CHECK(geodesic_dist(da, db) == doctest::Approx(std::sqrt(2.0) * std::log(2.0)).epsilon(1e-14));
  CHECK(geodesic_dist(da, db) == doctest::Approx(0.98026).epsilon(1e-5));
}

TEST_CASE("geodesic invariances and metric axioms") {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 7;
    const SpdMatrix x(testutil::random_spd(n, rng)), z(testutil::random_spd(n, rng)), w(testutil::random_spd(n, rng));
    const double d = geodesic_dist(x, z);
    CHECK(d == doctest::Approx(geodesic_dist(z, x)).epsilon(1e-10));
    const Matrix a = testutil::random_invertible(n, rng);
    const double da = geodesic_dist(SpdMatrix(a * x.matrix() * a.transpose()), SpdMatrix(a * z.matrix() * a.transpose()));
    CHECK(std::abs(da - d) <= 1e-8 * (1.0 + d));
    const double di = geodesic_dist(SpdMatrix(x.matrix().inverse()), SpdMatrix(z.matrix().inverse()));
    CHECK(std::abs(di - d) <= 1e-8 * std::max(1.0, d));
    CHECK(d <= geodesic_dist(x, w) + geodesic_dist(w, z) + 1e-10);
  }
}

TEST_CASE("exp/log round trip on random base points") {
  Rng rng(19);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 7;
    const ManifoldContext ctx(SpdMatrix(testutil::random_spd(n, rng)));
    const SymmetricMatrix v(testutil::random_symmetric(n, rng, 0.8));
    const SymmetricMatrix back = log_map(ctx, exp_map(ctx, v));
    CHECK((back.matrix() - v.matrix()).norm() <= 1e-8 * (1.0 + v.frobenius_norm()));
  }
}

TEST_CASE("exp_map stays SPD for large tangent vectors") {
  // ||v||_F up to 20: past that, e^{lambda_min} / e^{lambda_max} falls below
  // double precision and the smallest eigenvalue is no longer resolvable.
  Rng rng(23);
  std::uniform_real_distribution<double> radius(0.0, 20.0);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + trial % 7;
    const ManifoldContext ctx(SpdMatrix(testutil::random_spd(n, rng, 0.5)));
    Matrix v = testutil::random_symmetric(n, rng);
    v *= radius(rng) / v.norm();
    const SpdMatrix x = exp_map(ctx, SymmetricMatrix(v));
    CHECK(sym_eig(x).values(0) > kSpdTol);
  }
}

TEST_CASE("frechet mean") {
  SUBCASE("single sample") {
    Rng rng(29);
    const std::vector<SpdMatrix> one{SpdMatrix(testutil::random_spd(3, rng))};
    CHECK(frechet_mean(one).matrix() == one[0].matrix());
  }
  SUBCASE("scalar geometric mean") {
    const std::vector<SpdMatrix> s{scalar(1.0), scalar(9.0)};
    CHECK(frechet_mean(s)(0, 0) == doctest::Approx(3.0).epsilon(1e-10));
  }
  SUBCASE("commuting pair against direct minimization") {
    const double a[] = {1.0, 5.0}, b[] = {3.0, 0.5};
    const Matrix ma = SymmetricMatrix::diagonal(a).matrix(), mb = SymmetricMatrix::diagonal(b).matrix();
    const std::vector<SpdMatrix> pts{SpdMatrix(ma), SpdMatrix(mb)};
    const Matrix closed = testutil::expm_series(
        0.5 * (Matrix(Vector(Vector::Map(a, 2).array().log()).asDiagonal()) +
               Matrix(Vector(Vector::Map(b, 2).array().log()).asDiagonal())));
    const Matrix mean = frechet_mean(pts).matrix();
    CHECK(testutil::rel_err(mean, closed) <= 1e-8);

    // Compass search over x = expm(S), S symmetric 2x2.
    const std::vector<Matrix> raw{ma, mb};
    Vector p = Vector::Zero(3);
    auto to_x = [](const Vector& q) {
      Matrix s(2, 2);
      s << q(0), q(1), q(1), q(2);
      return testutil::expm_series(s);
    };
    double best = cost(to_x(p), raw);
    for (double step = 0.5; step > 1e-10; step *= 0.5) {
      bool improved = true;
      while (improved) {
        improved = false;
        for (int k = 0; k < 3; ++k) {
          for (double sgn : {1.0, -1.0}) {
            Vector q = p;
            q(k) += sgn * step;
            const double c = cost(to_x(q), raw);
            if (c < best) {
              best = c;
              p = q;
              improved = true;
            }
          }
        }
      }
    }
    CHECK(testutil::rel_err(mean, to_x(p)) <= 1e-6);
  }
  SUBCASE("stationarity, two-point midpoint, congruence equivariance") {
    Rng rng(31);
    for (int trial = 0; trial < 40; ++trial) {
      const int n = 2 + trial % 7;
      std::vector<SpdMatrix> pts;
      for (int i = 0; i < 6; ++i) pts.emplace_back(testutil::random_spd(n, rng));
      const FrechetResult r = frechet_mean_detailed(pts);
      CHECK(r.residual <= 1e-8);
      Matrix tangent = Matrix::Zero(n, n);
      const ManifoldContext ctx(r.mean);
      for (const SpdMatrix& p : pts) tangent += log_map(ctx, p).matrix();
      CHECK((tangent / 6.0).norm() <= 1e-8);

      const Matrix a = testutil::random_invertible(n, rng);
      std::vector<SpdMatrix> moved;
      for (const SpdMatrix& p : pts) moved.emplace_back(a * p.matrix() * a.transpose());
      const Matrix expect = a * r.mean.matrix() * a.transpose();
      CHECK(testutil::rel_err(frechet_mean(moved).matrix(), expect) <= 1e-6);

      const std::vector<SpdMatrix> two{pts[0], pts[1]};
      CHECK(testutil::rel_err(frechet_mean(two).matrix(), geodesic_midpoint(pts[0], pts[1]).matrix()) <= 1e-6);
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(frechet_mean(std::vector<SpdMatrix>{}), DimensionError);
    Rng rng(37);
    std::vector<SpdMatrix> pts;
    for (int i = 0; i < 4; ++i) pts.emplace_back(testutil::random_spd(3, rng, 2.0));
    try {
      frechet_mean(pts, FrechetOptions{1e-14, 1, 1.0});
      FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
      CHECK(e.residual() > 1e-14);
    }
  }
}

TEST_CASE("ensure_spd") {
  Rng rng(41);
  const SymmetricMatrix sym_ok = SymmetricMatrix(testutil::random_spd(3, rng));
  CHECK(ensure_spd(sym_ok, 1e-6).matrix() == sym_ok.matrix());

  const double sing[] = {1.0, 0.0};
  const SpdMatrix clamped = ensure_spd(SymmetricMatrix::diagonal(sing), 1e-3);
  CHECK(clamped(0, 0) == doctest::Approx(1.0));
  CHECK(clamped(1, 1) == doctest::Approx(1e-3));

  // Rank-2 Gram matrix in 5 dimensions.
  const Matrix g = testutil::gaussian(5, 2, rng);
  const SpdMatrix fixed = ensure_spd(SymmetricMatrix(g * g.transpose()), 1e-4);
  CHECK(sym_eig(fixed).values(0) == doctest::Approx(1e-4).epsilon(1e-6));
}

TEST_CASE("vech conventions") {
  Matrix s(2, 2);
  s << 1.0, 2.0, 2.0, 3.0;
  const Vector v = vech(s, std::sqrt(2.0));
  CHECK(v(0) == 1.0);
  CHECK(v(1) == doctest::Approx(2.0 * std::sqrt(2.0)));
  CHECK(v(2) == 3.0);
  CHECK(unvech(v, 2, std::sqrt(2.0)).isApprox(s));
  CHECK(dim_from_tri_size(21) == 6);
  CHECK(dim_from_tri_size(20) == -1);
}
