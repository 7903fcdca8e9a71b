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

#include "spdgan/augment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "json_util.hpp"

namespace spdgan {

Vector tangent_features(const SpdMatrix& x, const ManifoldContext& ref) {
  return vech(log_map(ref, x).matrix(), std::sqrt(2.0));
}

void ClassifierParams::validate() const {
  if (!(l2 >= 0.0) || !std::isfinite(l2)) throw ConfigError("classifier.l2 must be non-negative");
  if (steps < 0) throw ConfigError("classifier.steps must be non-negative");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("classifier.learning_rate must be positive");
  }
}

double ClassifierModel::decision(const SpdMatrix& x) const {
  return weights.dot(tangent_features(x, reference)) + bias;
}

namespace {

double sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

}  // namespace

ClassifierModel fit_classifier(const LabeledSpdDataset& train, const ClassifierParams& params) {
  params.validate();
  if (train.empty()) throw DataError("classifier training set is empty");
  const std::vector<int> counts = train.class_counts();
  if (counts.size() != 2 || counts[0] == 0 || counts[1] == 0) {
    throw DataError("classifier needs samples of exactly two classes (labels 0 and 1)");
  }
  const auto mats = train.matrices();
  ClassifierModel m;
  m.reference = ManifoldContext(frechet_mean(mats));
  m.params = params;

  const auto count = static_cast<Eigen::Index>(train.size());
  Matrix x(count, tri_size(train.n));
  Vector y(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    x.row(i) = tangent_features(train.samples[i].matrix, m.reference).transpose();
    y(i) = train.samples[i].label;
  }
  m.weights = Vector::Zero(x.cols());
  m.bias = 0.0;
  for (int step = 0; step < params.steps; ++step) {
    const Vector z = (x * m.weights).array() + m.bias;
    Vector r(count);
    for (Eigen::Index i = 0; i < count; ++i) r(i) = sigmoid(z(i)) - y(i);
    const Vector gw = x.transpose() * r / static_cast<double>(count) + params.l2 * m.weights;
    const double gb = r.mean();
    m.weights -= params.learning_rate * gw;
    m.bias -= params.learning_rate * gb;
  }
  return m;
}

Metrics compute_metrics(std::span<const int> labels, std::span<const int> predictions,
                        std::span<const double> scores) {
  if (labels.size() != predictions.size() || labels.size() != scores.size()) {
    throw DimensionError("metric inputs differ in length");
  }
  if (labels.empty()) throw DataError("cannot evaluate on an empty test set");
  long long conf[2][2] = {{0, 0}, {0, 0}};  // [truth][prediction]
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] > 1 || predictions[i] < 0 || predictions[i] > 1) {
      throw DataError("metrics are defined for labels 0 and 1 only");
    }
    ++conf[labels[i]][predictions[i]];
  }
  auto ratio = [](double a, double b) { return b > 0.0 ? a / b : 0.0; };
  Metrics out;
  out.accuracy = static_cast<double>(conf[0][0] + conf[1][1]) / static_cast<double>(labels.size());
  for (int c = 0; c < 2; ++c) {
    const double tp = static_cast<double>(conf[c][c]);
    const double rec = ratio(tp, static_cast<double>(conf[c][0] + conf[c][1]));
    const double prec = ratio(tp, static_cast<double>(conf[0][c] + conf[1][c]));
    out.recall += rec / 2.0;
    out.precision += prec / 2.0;
    out.f1 += ratio(2.0 * prec * rec, prec + rec) / 2.0;
  }
  // Mann-Whitney statistic over positive/negative pairs.
  double wins = 0.0;
  long long pos = 0, neg = 0;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1) continue;
    ++pos;
    for (size_t j = 0; j < labels.size(); ++j) {
      if (labels[j] != 0) continue;
      wins += scores[i] > scores[j] ? 1.0 : (scores[i] == scores[j] ? 0.5 : 0.0);
    }
  }
  for (int l : labels) neg += l == 0 ? 1 : 0;
  out.roc_auc = pos > 0 && neg > 0 ? wins / (static_cast<double>(pos) * static_cast<double>(neg)) : 0.5;
  return out;
}

Metrics evaluate(const ClassifierModel& model, const LabeledSpdDataset& test) {
  std::vector<int> labels, preds;
  std::vector<double> scores;
  for (const LabeledSample& s : test.samples) {
    const double d = model.decision(s.matrix);
    labels.push_back(s.label);
    scores.push_back(d);
    preds.push_back(d > 0.0 ? 1 : 0);
  }
  return compute_metrics(labels, preds, scores);
}

void AugmentConfig::validate() const {
  if (folds < 2) throw ConfigError("augment.folds must be at least 2");
  if (multipliers.empty()) throw ConfigError("augment.multipliers must not be empty");
  for (int m : multipliers) {
    if (m < 0) throw ConfigError("augment.multipliers must be non-negative");
  }
  gan.validate();
  weights.validate();
  classifier.validate();
}

namespace {

using MetricField = double Metrics::*;
constexpr MetricField kFields[] = {&Metrics::accuracy, &Metrics::recall, &Metrics::precision, &Metrics::f1,
                                   &Metrics::roc_auc};
constexpr const char* kFieldNames[] = {"accuracy", "recall", "precision", "f1", "roc_auc"};

void summarize(MultiplierReport& row) {
  const double k = static_cast<double>(row.folds.size());
  for (MetricField f : kFields) {
    double mean = 0.0;
    for (const Metrics& m : row.folds) mean += m.*f;
    mean /= k;
    double var = 0.0;
    for (const Metrics& m : row.folds) var += (m.*f - mean) * (m.*f - mean);
    row.mean.*f = mean;
    row.std.*f = std::sqrt(var / k);
  }
}

}  // namespace

EvalReport augmentation_experiment(const LabeledSpdDataset& data, const AugmentConfig& cfg) {
  cfg.validate();
  data.validate(2);
  if (data.num_classes() != 2) throw DataError("the augmentation protocol expects exactly two classes");
  for (const LabeledSample& s : data.samples) {
    if (s.synthetic) throw DataError("sample '" + s.id + "' is synthetic; the protocol needs real data only");
  }
  const SplitPlan plan = stratified_kfold(data, cfg.folds, cfg.seed);
  const bool needs_gan = std::any_of(cfg.multipliers.begin(), cfg.multipliers.end(), [](int m) { return m > 0; });

  EvalReport report;
  report.folds = cfg.folds;
  report.seed = cfg.seed;
  for (int m : cfg.multipliers) report.rows.push_back({m, {}, {}, {}});

  for (int f = 0; f < cfg.folds; ++f) {
    const std::set<int> test_idx(plan.test[f].begin(), plan.test[f].end());
    for (int i : plan.train[f]) {
      if (test_idx.count(i)) throw NumericalError("split plan leaks test index " + std::to_string(i));
    }
    const LabeledSpdDataset real_train = data.subset(plan.train[f]);
    const LabeledSpdDataset test = data.subset(plan.test[f]);
    const std::uint64_t fold_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(f));

    GanModel model;
    if (needs_gan) {
      TrainConfig gc = cfg.gan;
      gc.seed = fold_seed;
      model = train(real_train, gc, cfg.weights).model;
      report.generator = model.generator.architecture();
    }
    const std::vector<int> counts = real_train.class_counts();
    for (size_t r = 0; r < cfg.multipliers.size(); ++r) {
      const int mult = cfg.multipliers[r];
      LabeledSpdDataset augmented = real_train;
      if (mult > 0) {
        std::vector<int> want(counts.size());
        for (size_t c = 0; c < counts.size(); ++c) want[c] = mult * counts[c];
        augmented = concat(real_train, generate_dataset(model, want, derive_seed(fold_seed, 1000 + mult)));
      }
      const ClassifierModel clf = fit_classifier(augmented, cfg.classifier);
      report.rows[r].folds.push_back(evaluate(clf, test));
    }
  }
  for (MultiplierReport& row : report.rows) summarize(row);
  return report;
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["folds"] = report.folds;
  j["seed"] = report.seed;
  j["generator"] = report.generator;
  auto metrics = [](const Metrics& m) {
    nlohmann::ordered_json o;
    for (size_t k = 0; k < std::size(kFields); ++k) o[kFieldNames[k]] = m.*kFields[k];
    return o;
  };
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const MultiplierReport& r : report.rows) {
    nlohmann::ordered_json jr;
    jr["multiplier"] = r.multiplier;
    jr["setting"] = r.multiplier == 0 ? "Real" : "Real + Synth. " + std::to_string(r.multiplier) + "x";
    jr["mean"] = metrics(r.mean);
    jr["std"] = metrics(r.std);
    nlohmann::ordered_json folds = nlohmann::ordered_json::array();
    for (const Metrics& m : r.folds) folds.push_back(metrics(m));
    jr["per_fold"] = std::move(folds);
    rows.push_back(std::move(jr));
  }
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

std::string report_to_csv(const EvalReport& report) {
  std::string out = "multiplier,setting";
  for (const char* name : kFieldNames) out += std::string(",") + name + "_mean," + name + "_std";
  out += "\n";
  char buf[64];
  for (const MultiplierReport& r : report.rows) {
    out += std::to_string(r.multiplier) + ",";
    out += r.multiplier == 0 ? "Real" : "Real + Synth. " + std::to_string(r.multiplier) + "x";
    for (MetricField f : kFields) {
      std::snprintf(buf, sizeof buf, ",%.6f,%.6f", r.mean.*f, r.std.*f);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace spdgan
