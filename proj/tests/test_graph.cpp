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

#include "json.hpp"
#include "spdgan/graph.hpp"
#include "test_util.hpp"

using namespace spdgan;

namespace {
SpdMatrix scalar(double x) { return SpdMatrix(Matrix::Constant(1, 1, x)); }
}  // namespace

TEST_CASE("build_graph examples") {
  SUBCASE("identical samples") {
    testutil::Rng rng(1);
    const SpdMatrix x(testutil::random_spd(3, rng));
    const std::vector<SpdMatrix> s{x, x, x};
    const PopulationGraph g = build_graph(s, GraphMetric::geodesic, 1.0);
    CHECK(g.weights.isApprox(Matrix::Ones(3, 3)));
    CHECK_THROWS_AS(build_graph(s, GraphMetric::geodesic), BandwidthError);
  }
  SUBCASE("distance equal to sigma") {
    const std::vector<SpdMatrix> s{scalar(1.0), scalar(std::exp(0.5))};
    const PopulationGraph g = build_graph(s, GraphMetric::geodesic, 0.5);
    CHECK(g.weights(0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(g.weights(0, 1) == doctest::Approx(0.36788).epsilon(1e-5));
  }
  SUBCASE("scalar geodesic kernel") {
    const std::vector<SpdMatrix> s{scalar(1.0), scalar(std::exp(1.0)), scalar(std::exp(2.0))};
    const PopulationGraph g = build_graph(s, GraphMetric::geodesic, 1.0);
    CHECK(g.weights(0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-13));
    CHECK(g.weights(0, 2) == doctest::Approx(std::exp(-4.0)).epsilon(1e-13));
    CHECK(g.weights(1, 2) == doctest::Approx(std::exp(-1.0)).epsilon(1e-13));
    CHECK(g.weights(1, 0) == g.weights(0, 1));
    for (int i = 0; i < 3; ++i) CHECK(g.weights(i, i) == 1.0);
  }
  SUBCASE("euclidean uses all n^2 entries") {
    Matrix a = Matrix::Identity(2, 2), b = Matrix::Identity(2, 2);
    b(0, 1) = b(1, 0) = 0.5;
    const std::vector<SpdMatrix> s{SpdMatrix(a), SpdMatrix(b)};
    const Matrix d = pairwise_distances(s, GraphMetric::euclidean);
    CHECK(d(0, 1) == doctest::Approx(std::sqrt(0.5)));
  }
  CHECK_THROWS_AS(build_graph(std::vector<SpdMatrix>{scalar(1.0)}, GraphMetric::geodesic), DataError);
  CHECK_THROWS_AS(build_graph(std::vector<SpdMatrix>{scalar(1.0), scalar(2.0)}, GraphMetric::geodesic, -1.0),
                  ConfigError);
}

TEST_CASE("median_sigma") {
  const std::vector<SpdMatrix> s{scalar(1.0), scalar(std::exp(1.0)), scalar(std::exp(2.0))};
  CHECK(median_sigma(s, GraphMetric::geodesic) == doctest::Approx(1.0).epsilon(1e-13));
  const std::vector<SpdMatrix> two{scalar(1.0), scalar(std::exp(3.0))};
  CHECK(median_sigma(two, GraphMetric::geodesic) == doctest::Approx(3.0).epsilon(1e-13));

  // X u X: pairwise distances {1,1,2} twice, plus the cross pairs
  // {0,0,0,1,1,1,1,2,2}. Median of the 15 values is still 1.
  std::vector<SpdMatrix> doubled = s;
  doubled.insert(doubled.end(), s.begin(), s.end());
  CHECK(median_sigma(doubled, GraphMetric::geodesic) == doctest::Approx(1.0).epsilon(1e-13));

  // Mostly duplicates: 5 copies of one point and 1 other -> 10 zeros of 15.
  std::vector<SpdMatrix> dup(5, scalar(1.0));
  dup.push_back(scalar(2.0));
  CHECK_THROWS_AS(median_sigma(dup, GraphMetric::geodesic), BandwidthError);
}

TEST_CASE("batch_subgraph") {
  const std::vector<SpdMatrix> s{scalar(1.0), scalar(std::exp(1.0)), scalar(std::exp(2.0))};
  const PopulationGraph g = build_graph(s, GraphMetric::geodesic, 1.0);
  const int all[] = {0, 1, 2};
  CHECK(batch_subgraph(g, all) == g.weights);
  const int one[] = {1};
  CHECK(batch_subgraph(g, one)(0, 0) == 1.0);
  const int pair[] = {2, 0};
  const Matrix sub = batch_subgraph(g, pair);
  CHECK(sub(0, 0) == 1.0);
  CHECK(sub(1, 1) == 1.0);
  CHECK(sub(0, 1) == g.weights(2, 0));
  CHECK(sub(1, 0) == g.weights(0, 2));
  const int bad[] = {0, 3};
  CHECK_THROWS_AS(batch_subgraph(g, bad), DimensionError);
}

TEST_CASE("kernel properties") {
  testutil::Rng rng(2);
  std::vector<SpdMatrix> s;
  for (int i = 0; i < 12; ++i) s.emplace_back(testutil::random_spd(4, rng));
  const Matrix d = pairwise_distances(s, GraphMetric::geodesic);
  const PopulationGraph g = build_graph(s, GraphMetric::geodesic, 1.3);
  const PopulationGraph g2 = build_graph(s, GraphMetric::geodesic, 2.6);
  for (int i = 0; i < 12; ++i) {
    for (int j = 0; j < 12; ++j) {
      CHECK(g.weights(i, j) == g.weights(j, i));
      CHECK(g.weights(i, j) > 0.0);
      CHECK(g.weights(i, j) <= 1.0);
      CHECK(g2.weights(i, j) == doctest::Approx(std::pow(g.weights(i, j), 0.25)).epsilon(1e-12));
      for (int k = 0; k < 12; ++k) {
        for (int l = 0; l < 12; ++l) {
          if (d(i, j) < d(k, l)) CHECK(g.weights(i, j) > g.weights(k, l));
        }
      }
    }
  }
  // Joint congruence leaves the geodesic kernel unchanged.
  const Matrix a = testutil::random_invertible(4, rng);
  std::vector<SpdMatrix> moved;
  for (const SpdMatrix& x : s) moved.emplace_back(a * x.matrix() * a.transpose());
  const PopulationGraph gm = build_graph(moved, GraphMetric::geodesic, 1.3);
  CHECK((gm.weights - g.weights).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(build_graph(moved, GraphMetric::geodesic).sigma == doctest::Approx(build_graph(s, GraphMetric::geodesic).sigma));
}

TEST_CASE("knn mask is symmetric and keeps the diagonal") {
  testutil::Rng rng(3);
  std::vector<SpdMatrix> s;
  for (int i = 0; i < 10; ++i) s.emplace_back(testutil::random_spd(3, rng));
  const PopulationGraph g = build_graph(s, GraphMetric::geodesic, std::nullopt, 2);
  for (int i = 0; i < 10; ++i) {
    CHECK(g.weights(i, i) == 1.0);
    int nonzero = 0;
    for (int j = 0; j < 10; ++j) {
      CHECK(g.weights(i, j) == g.weights(j, i));
      if (j != i && g.weights(i, j) > 0.0) ++nonzero;
    }
    CHECK(nonzero >= 2);
  }
}

TEST_CASE("graph JSON export") {
  const std::vector<SpdMatrix> s{scalar(1.0), scalar(std::exp(1.0))};
  const PopulationGraph g = build_graph(s, GraphMetric::geodesic, 1.0);
  const nlohmann::json j = nlohmann::json::parse(graph_to_json(g));
  CHECK(j["sigma"].get<double>() == 1.0);
  CHECK(j["metric"].get<std::string>() == "geodesic");
  CHECK(j["weights"][0][1].get<double>() == g.weights(0, 1));
}
