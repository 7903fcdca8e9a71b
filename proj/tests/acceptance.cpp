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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Usage: acceptance [criterion ...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "gan_fixtures.hpp"
#include "spdgan/augment.hpp"
#include "spdgan/commands.hpp"
#include "spdgan/data.hpp"
#include "spdgan/gan.hpp"
#include "spdgan/gscore.hpp"
#include "spdgan/spd.hpp"
#include "temp_dir.hpp"
#include "test_util.hpp"

using namespace spdgan;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Eigen's own square roots, independent of the library's spectral code.
Matrix eigen_sqrt(const Matrix& a) { return Eigen::SelfAdjointEigenSolver<Matrix>(a).operatorSqrt(); }
Matrix eigen_inv_sqrt(const Matrix& a) { return Eigen::SelfAdjointEigenSolver<Matrix>(a).operatorInverseSqrt(); }

double min_eigenvalue(const Matrix& a) { return Eigen::SelfAdjointEigenSolver<Matrix>(a).eigenvalues()(0); }

Outcome geometry_kernel() {
  Timer t;
  testutil::Rng rng(101);
  std::uniform_real_distribution<double> radius(0.05, 3.0);
  double worst_rt = 0, worst_aff = 0, worst_inv = 0, worst_res = 0, worst_mid = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 7;

    const ManifoldContext ctx(SpdMatrix(testutil::random_spd(n, rng)));
    Matrix v = testutil::random_symmetric(n, rng);
    v *= radius(rng) / v.norm();
    const Matrix back = log_map(ctx, exp_map(ctx, SymmetricMatrix(v))).matrix();
    worst_rt = std::max(worst_rt, (back - v).norm() / (1e-8 * (1.0 + v.norm())));

    const SpdMatrix x(testutil::random_spd(n, rng)), z(testutil::random_spd(n, rng));
    const double d = geodesic_dist(x, z);
    const Matrix a = testutil::random_invertible(n, rng);
    const double da = geodesic_dist(SpdMatrix(a * x.matrix() * a.transpose()), SpdMatrix(a * z.matrix() * a.transpose()));
    const double di = geodesic_dist(SpdMatrix(x.matrix().inverse()), SpdMatrix(z.matrix().inverse()));
    worst_aff = std::max(worst_aff, std::abs(da - d) / d);
    worst_inv = std::max(worst_inv, std::abs(di - d) / d);

    std::vector<SpdMatrix> pts;
    for (int i = 0; i < 6; ++i) pts.emplace_back(testutil::random_spd(n, rng));
    const SpdMatrix mu = frechet_mean(pts);
    const ManifoldContext mctx(mu);
    Matrix tangent = Matrix::Zero(n, n);
    for (const SpdMatrix& p : pts) tangent += log_map(mctx, p).matrix();
    worst_res = std::max(worst_res, (tangent / 6.0).norm());

    const std::vector<SpdMatrix> two{x, z};
    const Matrix xs = eigen_sqrt(x.matrix()), xis = eigen_inv_sqrt(x.matrix());
    const Matrix inner = xis * z.matrix() * xis;
    const Matrix mid = xs * eigen_sqrt(0.5 * (inner + inner.transpose())) * xs;
    worst_mid = std::max(worst_mid, testutil::rel_err(frechet_mean(two).matrix(), mid));
  }
  const double secs = t.seconds();
  Outcome o;
  o.pass = worst_rt <= 1.0 && worst_aff <= 1e-8 && worst_inv <= 1e-8 && worst_res <= 1e-8 && worst_mid <= 1e-6 &&
           secs < 30;
  o.detail = "round-trip " + fmt("%.2g", worst_rt) + " of bound, affine " + fmt("%.2g", worst_aff) + ", inversion " +
             fmt("%.2g", worst_inv) + ", stationarity " + fmt("%.2g", worst_res) + ", midpoint " +
             fmt("%.2g", worst_mid) + ", " + fmt("%.1fs", secs);
  return o;
}

Outcome differentiation() {
  Timer t;
  testutil::Rng rng(202);
  struct Term {
    const char* name;
    Role role;
    LossWeights w;
  };
  const Term terms[] = {
      {"critic W", Role::critic, {1, 0, 0, 0, 0, 0}},
      {"critic W+GP", Role::critic, {1, 0, 0, 0, 0, 10}},
      {"gen adversarial", Role::generator, {1, 0, 0, 0, 0, 10}},
      {"L_M_rec", Role::generator, {0, 1, 0, 0, 0, 10}},
      {"L_T_rec", Role::generator, {0, 0, 1, 0, 0, 10}},
      {"L_M_graph", Role::generator, {0, 0, 0, 1, 0, 10}},
      {"L_T_graph", Role::generator, {0, 0, 0, 0, 1, 10}},
  };
  std::map<std::string, double> worst;
  for (int cfg = 0; cfg < 20; ++cfg) {
    const BasePointMode mode = cfg % 4 == 3 ? BasePointMode::per_class : BasePointMode::global;
    const GanModel m = testutil::random_model(4, 2, rng, mode);
    const Minibatch b = testutil::random_batch(m, 4, rng);
    const Matrix w = testutil::random_graph_weights(4, rng);
    for (const Term& term : terms) {
      const double e = testutil::role_gradient_error(m, b, w, term.role, term.w);
      worst[term.name] = std::max(worst[term.name], e);
    }
  }
  const double secs = t.seconds();
  Outcome o;
  double overall = 0;
  std::string worst_name;
  for (const auto& [name, e] : worst) {
    if (e >= overall) {
      overall = e;
      worst_name = name;
    }
  }
  o.pass = overall <= 1e-4 && secs < 120;
  o.detail = "7 terms x 20 configs, worst relative error " + fmt("%.2g", overall) + " (" + worst_name + "), " +
             fmt("%.1fs", secs);
  return o;
}

Outcome gradient_penalty_check() {
  testutil::Rng rng(303);
  GanModel m = testutil::random_model(4, 2, rng);
  const Minibatch b = testutil::random_batch(m, 8, rng);
  const int d = tri_size(4);

  // D(v, c) = w . (vech(v) ++ one_hot(c)) + bias with |w_vech| = 1
  Vector w = testutil::gaussian(d + 2, 1, rng);
  w.head(d) /= w.head(d).norm();
  DenseLayer lin;
  lin.weight = w.transpose();
  lin.bias = Vector::Constant(1, 0.25);
  lin.act = Activation::linear;
  GanModel linear = m;
  linear.critic.layers = {lin};
  const double gp_linear = gradient_penalty(linear, b);

  GanModel zero = m;
  for (auto& l : zero.critic.layers) {
    l.weight.setZero();
    l.bias.setZero();
  }
  zero.weights.lambda = 10.0;
  const AdversarialTerms t = adversarial_loss(zero, b);
  const double penalty = zero.weights.lambda * t.gradient_penalty;

  Outcome o;
  o.pass = std::abs(gp_linear) <= 1e-15 && penalty == zero.weights.lambda && t.critic_objective == zero.weights.lambda;
  o.detail = "linear critic GP " + fmt("%.3g", gp_linear) + ", zero critic penalty " + fmt("%.17g", penalty) +
             " (lambda 10)";
  return o;
}

struct ToyRun {
  GanModel trained, untrained;
  bool means_ok = false;
  double ratio = 0;
  double gs_trained = 0, gs_untrained = 0;
  double train_seconds = 0;
};

// Geometry score of `gen` against `real` in the tangent space at the real
// Frechet mean.
double score_against(const LabeledSpdDataset& real, const LabeledSpdDataset& gen, std::uint64_t seed) {
  const ManifoldContext ctx(frechet_mean(real.matrices()));
  GscoreParams p;
  p.seed = seed;
  return geometry_score(spd_cloud(real.matrices(), ctx), spd_cloud(gen.matrices(), ctx), p);
}

ToyRun toy_run(std::uint64_t seed) {
  SynthOptions so;
  so.seed = seed;
  const LabeledSpdDataset data = synth_benchmark(so).dataset;
  TrainConfig cfg;
  cfg.seed = seed;
  ToyRun r;
  Timer t;
  r.trained = train(data, cfg, LossWeights{}).model;
  r.train_seconds = t.seconds();
  cfg.epochs = 0;
  r.untrained = train(data, cfg, LossWeights{}).model;

  const std::vector<int> counts = data.class_counts();
  const LabeledSpdDataset gen = generate_dataset(r.trained, counts, derive_seed(seed, 1));
  const LabeledSpdDataset gen0 = generate_dataset(r.untrained, counts, derive_seed(seed, 1));
  r.means_ok = true;
  const SpdMatrix real0 = frechet_mean(data.subset(data.indices_of(0)).matrices());
  const SpdMatrix real1 = frechet_mean(data.subset(data.indices_of(1)).matrices());
  for (int c = 0; c < 2; ++c) {
    const SpdMatrix g = frechet_mean(gen.subset(gen.indices_of(c)).matrices());
    const double own = geodesic_dist(g, c == 0 ? real0 : real1);
    const double other = geodesic_dist(g, c == 0 ? real1 : real0);
    r.means_ok = r.means_ok && own < other;
  }
  r.gs_trained = score_against(data, gen, seed);
  r.gs_untrained = score_against(data, gen0, seed);
  r.ratio = r.gs_trained / r.gs_untrained;
  return r;
}

std::vector<ToyRun> toy_runs;

Outcome end_to_end() {
  Timer t;
  toy_runs.clear();
  std::vector<double> ratios;
  int means_ok = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    toy_runs.push_back(toy_run(seed));
    ratios.push_back(toy_runs.back().ratio);
    means_ok += toy_runs.back().means_ok;
  }
  const double secs = t.seconds();
  const double med = median(ratios);
  Outcome o;
  o.pass = means_ok == 5 && med <= 0.5 && secs < 600;
  o.detail = "class means correct in " + std::to_string(means_ok) + "/5 seeds, median GS ratio trained/untrained " +
             fmt("%.3f", med) + ", " + fmt("%.0fs", secs);
  return o;
}

Outcome spd_validity() {
  if (toy_runs.empty()) toy_runs.push_back(toy_run(0));
  testutil::TempDir dir("acceptance");
  int bad = 0, total = 0;
  double lowest = INFINITY;
  for (const GanModel* m : {&toy_runs[0].untrained, &toy_runs[0].trained}) {
    write_model(dir.file("checkpoint.json"), *m);
    const GanModel loaded = read_model(dir.file("checkpoint.json"));
    const std::vector<int> counts{5000, 5000};
    const LabeledSpdDataset gen = generate_dataset(loaded, counts, 77);
    for (const auto& s : gen.samples) {
      const double e = min_eigenvalue(s.matrix.matrix());
      lowest = std::min(lowest, e);
      bad += e > 1e-12 ? 0 : 1;
      ++total;
    }
  }
  Outcome o;
  o.pass = bad == 0 && total == 20000;
  o.detail = std::to_string(total - bad) + "/" + std::to_string(total) + " SPD, smallest eigenvalue " +
             fmt("%.3g", lowest);
  return o;
}

PointCloud circle_cloud(int count, testutil::Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
  PointCloud pc;
  pc.points.resize(count, 2);
  for (int i = 0; i < count; ++i) {
    const double a = u(rng);
    pc.points(i, 0) = std::cos(a);
    pc.points(i, 1) = std::sin(a);
  }
  return pc;
}

int argmax(const std::vector<double>& v) { return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin()); }

Outcome topology() {
  Timer t;
  int circle_ok = 0, blob_ok = 0;
  bool self_zero = true;
  for (int s = 0; s < 20; ++s) {
    testutil::Rng rng(1000 + s);
    GscoreParams p;
    p.seed = static_cast<std::uint64_t>(s);
    const PointCloud c = circle_cloud(256, rng);
    PointCloud b;
    b.points = testutil::gaussian(256, 2, rng);
    circle_ok += argmax(mrlt(c, p)) == 1;
    blob_ok += argmax(mrlt(b, p)) == 0;
    if (s < 3) self_zero = self_zero && geometry_score(c, c, p) == 0.0 && geometry_score(b, b, p) == 0.0;
  }
  const double secs = t.seconds();
  Outcome o;
  o.pass = circle_ok >= 18 && blob_ok >= 18 && self_zero && secs < 60;
  o.detail = "circle argmax 1 in " + std::to_string(circle_ok) + "/20, blob argmax 0 in " + std::to_string(blob_ok) +
             "/20, GS(X,X) " + (self_zero ? "0" : "nonzero") + ", " + fmt("%.1fs", secs);
  return o;
}

Outcome ablation() {
  Timer t;
  std::vector<double> full, ablated;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SynthOptions so;
    so.seed = seed;
    so.per_class = {30, 30};
    const LabeledSpdDataset data = synth_benchmark(so).dataset;
    TrainConfig cfg;
    cfg.seed = seed;
    for (double a : {1.0, 0.0}) {
      LossWeights w;
      w.alpha4 = w.alpha5 = a;
      const GanModel m = train(data, cfg, w).model;
      const LabeledSpdDataset gen = generate_dataset(m, data.class_counts(), derive_seed(seed, 1));
      (a > 0 ? full : ablated).push_back(score_against(data, gen, seed));
    }
  }
  const double secs = t.seconds();
  const double mf = median(full), ma = median(ablated);
  Outcome o;
  o.pass = mf <= ma && secs < 1800;
  o.detail = "median GS full " + fmt("%.4f", mf) + " vs ablation " + fmt("%.4f", ma) + ", " + fmt("%.0fs", secs);
  return o;
}

RunConfig command_config(const std::string& out, std::uint64_t seed) {
  RunConfig cfg;
  cfg.out_dir = out;
  cfg.seed = seed;
  cfg.propagate_seed();
  return cfg;
}

Outcome augmentation() {
  Timer t;
  testutil::TempDir dir("acceptance");
  // 38 per class: each of the 5 training splits holds 30 or 31 per class
  RunConfig cfg = command_config(dir.str(), 11);
  cfg.synth.per_class = {38, 38};
  cmd_synth_data(cfg);
  cmd_augment_eval(cfg);
  const std::string json1 = read_text_file(dir.file("augment_report.json"));
  const std::string csv1 = read_text_file(dir.file("augment_report.csv"));
  const EvalReport rep = augmentation_experiment(read_dataset(dir.file("dataset.json")), cfg.augment_config());
  cmd_augment_eval(cfg);
  const bool same = read_text_file(dir.file("augment_report.json")) == json1 &&
                    read_text_file(dir.file("augment_report.csv")) == csv1 && report_to_json(rep) == json1;

  double base = NAN, m3 = NAN;
  for (const auto& row : rep.rows) {
    if (row.multiplier == 0) base = row.mean.accuracy;
    if (row.multiplier == 3) m3 = row.mean.accuracy;
  }
  const double secs = t.seconds();
  Outcome o;
  o.pass = m3 >= base - 0.01 && same;
  o.detail = "accuracy m=0 " + fmt("%.4f", base) + ", m=3 " + fmt("%.4f", m3) + ", report " +
             (same ? "byte-identical" : "differs") + ", " + fmt("%.0fs", secs);
  return o;
}

Outcome determinism() {
  Timer t;
  std::vector<std::string> outputs[2];
  for (int run = 0; run < 2; ++run) {
    testutil::TempDir dir("acceptance");
    RunConfig cfg = command_config(dir.str(), 23);
    cfg.synth.per_class = {40, 40};
    cfg.train.epochs = 20;
    cmd_synth_data(cfg);
    cmd_train(cfg);
    cmd_augment_eval(cfg);
    for (auto f : {"checkpoint.json", "train_log.jsonl", "augment_report.json", "augment_report.csv"})
      outputs[run].push_back(read_text_file(dir.file(f)));
  }
  const bool same = outputs[0] == outputs[1];
  Outcome o;
  o.pass = same;
  o.detail = std::string("checkpoint, train log and augment reports ") + (same ? "byte-identical" : "differ") + ", " +
             fmt("%.0fs", t.seconds());
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"geometry kernel", geometry_kernel},
      {"differentiation", differentiation},
      {"gradient penalty", gradient_penalty_check},
      {"SPD validity", spd_validity},
      {"topology sanity", topology},
      {"end-to-end toy experiment", end_to_end},
      {"regularizer ablation", ablation},
      {"augmentation direction", augmentation},
      {"determinism", determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  // 6 runs first so 4 can reuse its checkpoints; lines print in order.
  std::vector<int> order{6, 1, 2, 3, 4, 5, 7, 8, 9};
  std::map<int, Outcome> results;
  for (int id : order) {
    if (!only.empty() && !only.count(id)) continue;
    try {
      results[id] = criteria[id - 1].second();
    } catch (const std::exception& e) {
      results[id] = Outcome{false, std::string("threw: ") + e.what()};
    }
  }
  int failed = 0;
  for (const auto& [id, r] : results) {
    std::printf("criterion %d (%s): %s - %s\n", id, criteria[id - 1].first, r.pass ? "PASS" : "FAIL", r.detail.c_str());
    failed += r.pass ? 0 : 1;
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
