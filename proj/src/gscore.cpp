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

#include "spdgan/gscore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace spdgan {

void PointCloud::validate() const {
  if (points.rows() < 4) throw DataError("point cloud needs at least 4 points, got " + std::to_string(points.rows()));
  if (points.cols() < 1) throw DataError("point cloud has no coordinates");
  if (!points.allFinite()) throw DataError("point cloud has non-finite coordinates");
}

ComplexKind parse_complex_kind(const std::string& name) {
  if (name == "witness") return ComplexKind::witness;
  if (name == "rips") return ComplexKind::rips;
  throw ConfigError("unknown complex '" + name + "' (expected witness or rips)");
}

std::string to_string(ComplexKind kind) { return kind == ComplexKind::witness ? "witness" : "rips"; }

void GscoreParams::validate() const {
  if (witness.landmarks < 3) throw ConfigError("gscore.landmarks must be at least 3");
  if (!(witness.alpha_frac > 0.0)) throw ConfigError("gscore.alpha_frac must be positive");
  if (witness.nu < 0) throw ConfigError("gscore.nu must be non-negative");
  if (runs < 1) throw ConfigError("gscore.runs must be at least 1");
  if (i_max < 1) throw ConfigError("gscore.i_max must be at least 1");
}

namespace {

bool simplex_less(const FilteredComplex::Simplex& a, const FilteredComplex::Simplex& b) {
  if (a.time != b.time) return a.time < b.time;
  if (a.vertices.size() != b.vertices.size()) return a.vertices.size() < b.vertices.size();
  return a.vertices < b.vertices;
}

}  // namespace

FilteredComplex landmark_complex(const PointCloud& cloud, std::span<const int> landmarks,
                                 const WitnessOptions& opts) {
  const int l = static_cast<int>(landmarks.size());
  if (l < 1) throw DataError("no landmarks");
  for (int idx : landmarks) {
    if (idx < 0 || idx >= cloud.size()) throw DimensionError("landmark index out of range");
  }
  Matrix ld(l, l);
  for (int a = 0; a < l; ++a) {
    for (int b = 0; b < l; ++b) ld(a, b) = (cloud.points.row(landmarks[a]) - cloud.points.row(landmarks[b])).norm();
  }
  FilteredComplex fc;
  fc.alpha_max = opts.alpha_frac * ld.maxCoeff();
  if (!(fc.alpha_max > 0.0)) throw TopologyError("degenerate point cloud: all landmarks coincide");

  const double inf = std::numeric_limits<double>::infinity();
  Matrix edge = Matrix::Constant(l, l, inf);
  std::vector<double> tri(static_cast<size_t>(l) * l * l, inf);
  auto tri_at = [&](int a, int b, int c) -> double& { return tri[(static_cast<size_t>(a) * l + b) * l + c]; };

  if (opts.complex == ComplexKind::rips) {
    edge = ld;
    for (int a = 0; a < l; ++a) {
      for (int b = a + 1; b < l; ++b) {
        for (int c = b + 1; c < l; ++c) tri_at(a, b, c) = std::max({ld(a, b), ld(a, c), ld(b, c)});
      }
    }
  } else {
    const int witnesses = cloud.size();
    std::vector<double> d(l), sorted(l);
    for (int w = 0; w < witnesses; ++w) {
      for (int a = 0; a < l; ++a) d[a] = (cloud.points.row(w) - cloud.points.row(landmarks[a])).norm();
      double offset = 0.0;
      if (opts.nu > 0) {
        sorted = d;
        const int k = std::min(opts.nu, l) - 1;
        std::nth_element(sorted.begin(), sorted.begin() + k, sorted.end());
        offset = sorted[k];
      }
      for (int a = 0; a < l; ++a) {
        for (int b = a + 1; b < l; ++b) {
          const double eab = std::max(d[a], d[b]) - offset;
          if (eab < edge(a, b)) edge(a, b) = eab;
          if (eab > fc.alpha_max) continue;  // no triangle through (a, b) can beat alpha_max
          for (int c = b + 1; c < l; ++c) {
            const double t = std::max(eab, d[c] - offset);
            double& slot = tri_at(a, b, c);
            if (t < slot) slot = t;
          }
        }
      }
    }
  }

  for (int a = 0; a < l; ++a) fc.simplices.push_back({{a}, 0.0});
  for (int a = 0; a < l; ++a) {
    for (int b = a + 1; b < l; ++b) {
      const double t = std::max(edge(a, b), 0.0);
      if (t <= fc.alpha_max) fc.simplices.push_back({{a, b}, t});
    }
  }
  for (int a = 0; a < l; ++a) {
    for (int b = a + 1; b < l; ++b) {
      for (int c = b + 1; c < l; ++c) {
        // A triangle never precedes its edges.
        const double t = std::max({tri_at(a, b, c), edge(a, b), edge(a, c), edge(b, c), 0.0});
        if (t <= fc.alpha_max) fc.simplices.push_back({{a, b, c}, t});
      }
    }
  }
  std::sort(fc.simplices.begin(), fc.simplices.end(), simplex_less);
  return fc;
}

PersistenceBarcode persistence_h1(const FilteredComplex& complex) {
  PersistenceBarcode bc;
  bc.alpha_max = complex.alpha_max;

  // Edge positions in filtration order.
  std::unordered_map<long long, int> edge_pos;
  std::vector<double> edge_time;
  std::vector<std::pair<int, int>> edge_vertices;
  int max_vertex = 0;
  for (const auto& s : complex.simplices) {
    for (int v : s.vertices) max_vertex = std::max(max_vertex, v);
  }
  const long long stride = max_vertex + 1;
  for (const auto& s : complex.simplices) {
    if (s.vertices.size() != 2) continue;
    edge_pos[s.vertices[0] * stride + s.vertices[1]] = static_cast<int>(edge_time.size());
    edge_time.push_back(s.time);
    edge_vertices.emplace_back(s.vertices[0], s.vertices[1]);
  }

  // Edges that merge components kill H0 and never create a cycle.
  std::vector<int> parent(static_cast<size_t>(stride));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<char> positive(edge_time.size(), 0);
  for (size_t e = 0; e < edge_vertices.size(); ++e) {
    const int ra = find(edge_vertices[e].first), rb = find(edge_vertices[e].second);
    if (ra == rb) {
      positive[e] = 1;
    } else {
      parent[std::max(ra, rb)] = std::min(ra, rb);
    }
  }

  // Triangle columns reduced left to right; pivot = largest edge position.
  std::vector<std::vector<int>> reduced;
  std::vector<int> owner(edge_time.size(), -1);
  std::vector<char> paired(edge_time.size(), 0);
  for (const auto& s : complex.simplices) {
    if (s.vertices.size() != 3) continue;
    const int a = s.vertices[0], b = s.vertices[1], c = s.vertices[2];
    std::vector<int> col{edge_pos.at(a * stride + b), edge_pos.at(a * stride + c), edge_pos.at(b * stride + c)};
    std::sort(col.begin(), col.end());
    while (!col.empty() && owner[col.back()] >= 0) {
      const std::vector<int>& other = reduced[owner[col.back()]];
      std::vector<int> sum;
      sum.reserve(col.size() + other.size());
      std::set_symmetric_difference(col.begin(), col.end(), other.begin(), other.end(), std::back_inserter(sum));
      col.swap(sum);
    }
    if (col.empty()) continue;
    const int low = col.back();
    owner[low] = static_cast<int>(reduced.size());
    reduced.push_back(std::move(col));
    paired[low] = 1;
    if (s.time > edge_time[low]) bc.intervals.emplace_back(edge_time[low], s.time);
  }
  for (size_t e = 0; e < edge_time.size(); ++e) {
    if (positive[e] && !paired[e] && edge_time[e] < bc.alpha_max) {
      bc.intervals.emplace_back(edge_time[e], bc.alpha_max);
    }
  }
  std::sort(bc.intervals.begin(), bc.intervals.end());
  return bc;
}

PersistenceBarcode witness_barcode(const PointCloud& cloud, const WitnessOptions& opts, Rng& rng) {
  cloud.validate();
  if (opts.landmarks > cloud.size()) {
    throw DataError("cannot draw " + std::to_string(opts.landmarks) + " landmarks from " +
                    std::to_string(cloud.size()) + " points");
  }
  if (!(opts.alpha_frac > 0.0)) throw ConfigError("alpha_frac must be positive");
  std::vector<int> idx(static_cast<size_t>(cloud.size()));
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < opts.landmarks; ++i) {
    std::uniform_int_distribution<int> pick(i, cloud.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(static_cast<size_t>(opts.landmarks));
  return persistence_h1(landmark_complex(cloud, idx, opts));
}

std::vector<double> rlt(const PersistenceBarcode& barcode, int i_max) {
  if (i_max < 1) throw ConfigError("i_max must be at least 1");
  if (!(barcode.alpha_max > 0.0)) throw TopologyError("barcode has an empty filtration range");
  std::vector<std::pair<double, int>> events;
  for (const auto& [b, d] : barcode.intervals) {
    const double lo = std::clamp(b, 0.0, barcode.alpha_max);
    const double hi = std::clamp(d, 0.0, barcode.alpha_max);
    if (hi <= lo) continue;
    events.emplace_back(lo, +1);
    events.emplace_back(hi, -1);
  }
  std::sort(events.begin(), events.end());
  std::vector<double> out(static_cast<size_t>(i_max), 0.0);
  double pos = 0.0;
  int alive = 0;
  for (const auto& [x, delta] : events) {
    if (alive < i_max) out[alive] += x - pos;
    pos = x;
    alive += delta;
  }
  if (alive < i_max) out[alive] += barcode.alpha_max - pos;
  for (double& v : out) v /= barcode.alpha_max;
  return out;
}

std::vector<double> mrlt(const PointCloud& cloud, const GscoreParams& params) {
  params.validate();
  std::vector<double> acc(static_cast<size_t>(params.i_max), 0.0);
  for (int r = 0; r < params.runs; ++r) {
    Rng rng(derive_seed(params.seed, static_cast<std::uint64_t>(r)));
    const std::vector<double> one = rlt(witness_barcode(cloud, params.witness, rng), params.i_max);
    for (size_t i = 0; i < acc.size(); ++i) acc[i] += one[i];
  }
  for (double& v : acc) v /= params.runs;
  return acc;
}

double geometry_score(std::span<const double> mrlt1, std::span<const double> mrlt2) {
  if (mrlt1.size() != mrlt2.size()) throw DimensionError("MRLT profiles differ in length");
  double s = 0.0;
  for (size_t i = 0; i < mrlt1.size(); ++i) s += (mrlt1[i] - mrlt2[i]) * (mrlt1[i] - mrlt2[i]);
  return s;
}

double geometry_score(const PointCloud& cloud1, const PointCloud& cloud2, const GscoreParams& params) {
  if (cloud1.dim() != cloud2.dim()) {
    throw DimensionError("clouds live in different dimensions (" + std::to_string(cloud1.dim()) + " vs " +
                         std::to_string(cloud2.dim()) + ")");
  }
  GscoreParams p = params;
  p.witness.landmarks = std::min({p.witness.landmarks, cloud1.size(), cloud2.size()});
  const std::vector<double> m1 = mrlt(cloud1, p);
  const std::vector<double> m2 = mrlt(cloud2, p);
  return geometry_score(m1, m2);
}

PointCloud spd_cloud(std::span<const SpdMatrix> samples, const ManifoldContext& ctx) {
  PointCloud pc;
  pc.points.resize(static_cast<Eigen::Index>(samples.size()), tri_size(ctx.dim()));
  for (size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].dim() != ctx.dim()) throw DimensionError("sample dimension does not match the base point");
    pc.points.row(static_cast<Eigen::Index>(i)) = vech(log_map(ctx, samples[i]).matrix(), std::sqrt(2.0)).transpose();
  }
  return pc;
}

}  // namespace spdgan
