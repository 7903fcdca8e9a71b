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

#include "spdgan/gan.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "json_util.hpp"

namespace spdgan {

void LossWeights::validate() const {
  const double all[] = {alpha1, alpha2, alpha3, alpha4, alpha5, lambda};
  for (double w : all) {
    if (!std::isfinite(w) || w < 0.0) throw ConfigError("loss weights must be finite and non-negative");
  }
}

BasePointMode parse_base_point_mode(const std::string& name) {
  if (name == "global") return BasePointMode::global;
  if (name == "per_class") return BasePointMode::per_class;
  throw ConfigError("unknown base point mode '" + name + "' (expected global or per_class)");
}

std::string to_string(BasePointMode mode) {
  return mode == BasePointMode::global ? "global" : "per_class";
}

std::string to_string(Role role) { return role == Role::critic ? "critic" : "generator"; }

void TrainConfig::validate() const {
  if (batch_size < 2) throw ConfigError("train.batch_size must be at least 2");
  if (epochs < 0) throw ConfigError("train.epochs must be non-negative");
  if (critic_iters < 1) throw ConfigError("train.critic_iters must be at least 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("train.learning_rate must be positive");
  }
  if (noise_dim < 1) throw ConfigError("gen.noise_dim must be positive");
  for (int h : generator_hidden) {
    if (h < 1) throw ConfigError("gen.hidden widths must be positive");
  }
  for (int h : critic_hidden) {
    if (h < 1) throw ConfigError("critic.hidden widths must be positive");
  }
  if (graph_sigma && !(*graph_sigma > 0.0)) throw ConfigError("graph.sigma must be positive");
  if (graph_knn < 0) throw ConfigError("graph.knn must be non-negative");
  if (output_scale && !(*output_scale > 0.0)) throw ConfigError("gen.output_scale must be positive");
}

const ManifoldContext& GanModel::context(int label) const {
  if (base_points.empty()) throw DimensionError("model has no base point");
  if (base_point_mode == BasePointMode::global) return base_points.front();
  if (label < 0 || label >= static_cast<int>(base_points.size())) {
    throw DimensionError("class " + std::to_string(label) + " has no base point");
  }
  return base_points[label];
}

void GanModel::validate() const {
  generator.validate();
  critic.validate();
  const int tri = tri_size(n);
  if (n < 1 || num_classes < 1) throw DimensionError("model needs n >= 1 and at least one class");
  if (generator.input_dim() != noise_dim + num_classes || generator.output_dim() != tri) {
    throw DimensionError("generator shape " + generator.architecture() + " does not match n and class count");
  }
  if (critic.input_dim() != tri + num_classes || critic.output_dim() != 1) {
    throw DimensionError("critic shape " + critic.architecture() + " does not match n and class count");
  }
  const size_t expect = base_point_mode == BasePointMode::global ? 1 : static_cast<size_t>(num_classes);
  if (base_points.size() != expect) throw DimensionError("wrong number of base points");
  for (const auto& ctx : base_points) {
    if (ctx.dim() != n) throw DimensionError("base point dimension does not match n");
  }
}

GanModel init_model(int n, int num_classes, const TrainConfig& cfg, const LossWeights& weights,
                    std::vector<SpdMatrix> base_points, double output_scale, Rng& rng) {
  cfg.validate();
  weights.validate();
  GanModel m;
  m.n = n;
  m.num_classes = num_classes;
  m.noise_dim = cfg.noise_dim;
  m.output_scale = output_scale;
  m.weights = weights;
  m.base_point_mode = cfg.base_point_mode;
  for (SpdMatrix& b : base_points) m.base_points.emplace_back(std::move(b));

  std::vector<int> gw{cfg.noise_dim + num_classes};
  gw.insert(gw.end(), cfg.generator_hidden.begin(), cfg.generator_hidden.end());
  gw.push_back(tri_size(n));
  m.generator = init_mlp(gw, Activation::leaky_relu, Activation::tanh, rng);

  std::vector<int> cw{tri_size(n) + num_classes};
  cw.insert(cw.end(), cfg.critic_hidden.begin(), cfg.critic_hidden.end());
  cw.push_back(1);
  m.critic = init_mlp(cw, Activation::leaky_relu, Activation::linear, rng);

  m.generator_adam = AdamState::for_size(static_cast<Eigen::Index>(m.generator.parameter_count()), cfg.learning_rate);
  m.critic_adam = AdamState::for_size(static_cast<Eigen::Index>(m.critic.parameter_count()), cfg.learning_rate);
  m.rng_state = rng_state(rng);
  m.validate();
  return m;
}

Matrix tangent_columns(const GanModel& model, const LabeledSpdDataset& data) {
  Matrix out(tri_size(model.n), static_cast<Eigen::Index>(data.size()));
  for (size_t i = 0; i < data.size(); ++i) {
    const LabeledSample& s = data.samples[i];
    out.col(static_cast<Eigen::Index>(i)) = vech(log_map(model.context(s.label), s.matrix).matrix());
  }
  return out;
}

namespace {

Matrix one_hot_columns(std::span<const int> labels, int num_classes) {
  Matrix oh = Matrix::Zero(num_classes, static_cast<Eigen::Index>(labels.size()));
  for (size_t i = 0; i < labels.size(); ++i) {
    oh.col(static_cast<Eigen::Index>(i)) = one_hot(labels[i], num_classes);
  }
  return oh;
}

// Weights that turn the half-vectorization into full-matrix sums: 1 on the
// diagonal entries, `off` on the others.
Vector triangle_weights(int n, double off) {
  Vector w(tri_size(n));
  int k = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) w(k++) = i == j ? 1.0 : off;
  }
  return w;
}

Matrix repeat_cols(const Vector& v, Eigen::Index cols) { return v.replicate(1, cols); }

void check_batch(const GanModel& model, const Minibatch& batch) {
  const auto b = static_cast<Eigen::Index>(batch.size());
  if (b < 1) throw DimensionError("empty minibatch");
  if (batch.labels.size() != batch.indices.size() || batch.real.size() != batch.indices.size() ||
      batch.real_tangents.cols() != b || batch.noise.cols() != b || batch.epsilon.size() != b) {
    throw DimensionError("minibatch fields disagree in length");
  }
  if (batch.real_tangents.rows() != tri_size(model.n) || batch.noise.rows() != model.noise_dim) {
    throw DimensionError("minibatch shapes do not match the model");
  }
  for (int c : batch.labels) {
    if (c < 0 || c >= model.num_classes) throw DimensionError("minibatch label out of range");
  }
}

struct Graph {
  ad::Var generated;  // tri x B
  ad::Var wasserstein, penalty, critic_objective, generator_term;
  ad::Var m_rec, t_rec, m_graph, t_graph;
  bool has_pair_terms = false;
};

ad::Var generator_var(ad::Tape& tape, const GanModel& model, const MlpBinding& gb, const Matrix& noise,
                      const Matrix& onehots) {
  Matrix input(noise.rows() + onehots.rows(), noise.cols());
  input << noise, onehots;
  const MlpTrace tr = mlp_forward(model.generator, gb, tape.constant(std::move(input)));
  return ad::scale(tr.output, model.output_scale);
}

void adversarial_vars(ad::Tape& tape, const GanModel& model, const MlpBinding& cb, const Minibatch& batch,
                      const Matrix& onehots, Graph& g) {
  const auto b = static_cast<double>(batch.size());
  const ad::Var oh = tape.constant(onehots);
  const MlpTrace real = mlp_forward(model.critic, cb, ad::vstack(tape.constant(batch.real_tangents), oh));
  const MlpTrace fake = mlp_forward(model.critic, cb, ad::vstack(g.generated, oh));
  const ad::Var mean_real = ad::scale(ad::sum(real.output), 1.0 / b);
  const ad::Var mean_fake = ad::scale(ad::sum(fake.output), 1.0 / b);
  g.wasserstein = ad::sub(mean_real, mean_fake);
  g.generator_term = ad::scale(mean_fake, -1.0);

  const Matrix eps = batch.epsilon.transpose().replicate(batch.real_tangents.rows(), 1);
  const Matrix real_part = batch.real_tangents.array() * (1.0 - eps.array());
  const ad::Var xhat = ad::add(tape.constant(real_part), ad::hadamard(g.generated, tape.constant(eps)));
  const MlpTrace at_hat = mlp_forward(model.critic, cb, ad::vstack(xhat, oh));
  const ad::Var grad = ad::slice_rows(mlp_input_gradient(model.critic, cb, at_hat), 0, batch.real_tangents.rows());
  const ad::Var norms = ad::sqrt(ad::col_sum_sq(grad));
  g.penalty = ad::scale(ad::sum(ad::square(ad::add_scalar(norms, -1.0))), 1.0 / b);
  g.critic_objective = ad::add(g.wasserstein, ad::scale(g.penalty, model.weights.lambda));
}

void pair_vars(ad::Tape& tape, const GanModel& model, const Minibatch& batch, const Matrix& weights, Graph& g) {
  const int n = model.n;
  const int b = batch.size();
  const Eigen::Index tri = tri_size(n);

  // Tangent reconstruction: entrywise L1 over the full matrix.
  const ad::Var diff = ad::sub(g.generated, tape.constant(batch.real_tangents));
  g.t_rec = ad::scale(ad::sum_abs(ad::hadamard(diff, tape.constant(repeat_cols(triangle_weights(n, 2.0), b)))),
                      1.0 / b);

  // Whitened exponentials E_i = Exp(y^{-1/2} V_i y^{-1/2}); x~_i = y^{1/2} E_i y^{1/2}.
  std::vector<ad::Var> whitened(b), expo(b);
  for (int i = 0; i < b; ++i) {
    const ManifoldContext& ctx = model.context(batch.labels[i]);
    const ad::Var v = ad::unvech(ad::slice_cols(g.generated, i, 1), n);
    const ad::Var is = tape.constant(ctx.inv_sqrt());
    whitened[i] = ad::matmul(is, ad::matmul(v, is));
    expo[i] = ad::sym_fn(whitened[i], MatrixFunction::exp());
  }

  // d(x~_i, x_i) = ||Log(A E_i A^T)||_F with A = x_i^{-1/2} y^{1/2}.
  std::vector<ad::Var> rec(b);
  for (int i = 0; i < b; ++i) {
    const ManifoldContext& ctx = model.context(batch.labels[i]);
    const Matrix a = mat_fn(batch.real[i], MatrixFunction::inv_sqrt()).matrix() * ctx.sqrt();
    const ad::Var inner = ad::matmul(tape.constant(a), ad::matmul(expo[i], tape.constant(a.transpose())));
    rec[i] = ad::sum_sq(ad::sym_fn(inner, MatrixFunction::log()));
  }
  g.m_rec = ad::scale(ad::sum(ad::hstack(rec)), 1.0 / b);

  if (weights.rows() != b || weights.cols() != b) throw DimensionError("graph weights do not match the batch");
  const double pairs = b > 1 ? static_cast<double>(b) * (b - 1) : 1.0;
  Matrix w = weights;
  w.diagonal().setZero();

  // Tangent smoothness: sum_ij w_ij ||a_i - a_j||^2 with sqrt(2)-weighted columns.
  const ad::Var scaled = ad::hadamard(g.generated, tape.constant(repeat_cols(triangle_weights(n, std::sqrt(2.0)), b)));
  const Vector degree = w.rowwise().sum() + w.colwise().sum().transpose();
  const ad::Var sq = ad::matmul(ad::col_sum_sq(scaled), tape.constant(Matrix(degree)));
  const ad::Var cross = ad::sum(ad::hadamard(scaled, ad::matmul(scaled, tape.constant(w.transpose()))));
  g.t_graph = ad::scale(ad::sub(sq, ad::scale(cross, 2.0)), 1.0 / pairs);

  // Manifold smoothness. With one base point the congruence by y^{-1/2}
  // leaves distances unchanged, so E_i stand in for x~_i.
  const bool global = model.base_point_mode == BasePointMode::global;
  std::vector<ad::Var> point(b), root(b);
  bool any = false;
  for (int i = 0; i < b && !any; ++i) {
    for (int j = 0; j < b; ++j) any = any || (i != j && w(i, j) != 0.0);
  }
  if (any) {
    for (int i = 0; i < b; ++i) {
      if (global) {
        point[i] = expo[i];
        root[i] = ad::sym_fn(ad::scale(whitened[i], -0.5), MatrixFunction::exp());
      } else {
        const ad::Var s = tape.constant(model.context(batch.labels[i]).sqrt());
        point[i] = ad::matmul(s, ad::matmul(expo[i], s));
        root[i] = ad::sym_fn(point[i], MatrixFunction::inv_sqrt());
      }
    }
  }
  std::vector<ad::Var> d2;
  std::vector<double> coef;
  for (int i = 0; i < b; ++i) {
    for (int j = i + 1; j < b; ++j) {
      const double c = w(i, j) + w(j, i);
      if (c == 0.0) continue;
      const ad::Var inner = ad::matmul(root[i], ad::matmul(point[j], root[i]));
      d2.push_back(ad::sum_sq(ad::sym_fn(inner, MatrixFunction::log())));
      coef.push_back(c);
    }
  }
  if (d2.empty()) {
    g.m_graph = tape.constant(Matrix::Zero(1, 1));
  } else {
    const Matrix cw = Eigen::Map<const Matrix>(coef.data(), 1, static_cast<Eigen::Index>(coef.size()));
    g.m_graph = ad::scale(ad::sum(ad::hadamard(ad::hstack(d2), tape.constant(cw))), 1.0 / pairs);
  }
  g.has_pair_terms = true;
  (void)tri;
}

LossBreakdown read_terms(const Graph& g) {
  LossBreakdown out;
  out.adversarial.wasserstein = g.wasserstein.scalar();
  out.adversarial.gradient_penalty = g.penalty.scalar();
  out.adversarial.critic_objective = g.critic_objective.scalar();
  out.adversarial.generator_term = g.generator_term.scalar();
  if (g.has_pair_terms) {
    out.reconstruction = {g.m_rec.scalar(), g.t_rec.scalar()};
    out.graph = {g.m_graph.scalar(), g.t_graph.scalar()};
  }
  return out;
}

ad::Var weighted_sum(ad::Tape& tape, std::initializer_list<std::pair<double, ad::Var>> terms) {
  ad::Var acc = tape.constant(Matrix::Zero(1, 1));
  for (const auto& [w, v] : terms) {
    if (w != 0.0) acc = ad::add(acc, ad::scale(v, w));
  }
  return acc;
}

struct Evaluation {
  LossBreakdown terms;
  Vector gradient;
};

Evaluation evaluate(const GanModel& model, const Minibatch& batch, const Matrix* weights, Role role,
                    bool want_gradient) {
  check_batch(model, batch);
  ad::Tape tape;
  const Matrix onehots = one_hot_columns(batch.labels, model.num_classes);
  const bool train_gen = want_gradient && role == Role::generator;
  const bool train_critic = want_gradient && role == Role::critic;
  const MlpBinding gb = bind(tape, model.generator, train_gen);
  const MlpBinding cb = bind(tape, model.critic, train_critic);

  Graph g;
  if (role == Role::critic) {
    g.generated = tape.constant(generator_output(model, batch.noise, batch.labels));
  } else {
    g.generated = generator_var(tape, model, gb, batch.noise, onehots);
  }
  adversarial_vars(tape, model, cb, batch, onehots, g);
  const LossWeights& a = model.weights;
  ad::Var loss;
  if (role == Role::critic) {
    loss = ad::scale(ad::sub(ad::scale(g.penalty, a.lambda), g.wasserstein), a.alpha1);
  } else {
    pair_vars(tape, model, batch, weights ? *weights : Matrix::Zero(batch.size(), batch.size()), g);
    loss = weighted_sum(tape, {{a.alpha1, g.generator_term},
                               {a.alpha2, g.m_rec},
                               {a.alpha3, g.t_rec},
                               {a.alpha4, g.m_graph},
                               {a.alpha5, g.t_graph}});
  }
  Evaluation ev;
  ev.terms = read_terms(g);
  ev.terms.loss = loss.scalar();
  if (want_gradient) {
    tape.backward(loss);
    ev.gradient = binding_gradient(tape, role == Role::critic ? cb : gb);
  }
  return ev;
}

}  // namespace

Minibatch make_minibatch(const GanModel& model, const LabeledSpdDataset& train, const Matrix& tangents,
                         std::vector<int> indices, Rng& rng) {
  if (tangents.cols() != static_cast<Eigen::Index>(train.size())) {
    throw DimensionError("tangent cache does not match the training set");
  }
  Minibatch b;
  const auto size = static_cast<Eigen::Index>(indices.size());
  b.real_tangents.resize(tangents.rows(), size);
  b.noise.resize(model.noise_dim, size);
  b.epsilon.resize(size);
  for (Eigen::Index i = 0; i < size; ++i) {
    const int idx = indices[i];
    if (idx < 0 || idx >= static_cast<int>(train.size())) throw DimensionError("minibatch index out of range");
    b.labels.push_back(train.samples[idx].label);
    b.real.push_back(train.samples[idx].matrix);
    b.real_tangents.col(i) = tangents.col(idx);
  }
  for (Eigen::Index i = 0; i < size; ++i) b.noise.col(i) = sample_noise(rng, model.noise_dim);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Eigen::Index i = 0; i < size; ++i) b.epsilon(i) = unit(rng);
  b.indices = std::move(indices);
  return b;
}

Matrix generator_output(const GanModel& model, const Matrix& noise, std::span<const int> labels) {
  if (noise.rows() != model.noise_dim || noise.cols() != static_cast<Eigen::Index>(labels.size())) {
    throw DimensionError("noise shape does not match the model");
  }
  for (int c : labels) {
    if (c < 0 || c >= model.num_classes) throw DimensionError("class " + std::to_string(c) + " out of range");
  }
  Matrix input(noise.rows() + model.num_classes, noise.cols());
  input << noise, one_hot_columns(labels, model.num_classes);
  return mlp_forward(model.generator, input) * model.output_scale;
}

TangentVector generate_tangent(const GanModel& model, const Vector& z, int c) {
  const int labels[] = {c};
  return TangentVector(unvech(generator_output(model, z, labels).col(0), model.n));
}

SpdMatrix generate_spd(const GanModel& model, const Vector& z, int c) {
  return exp_map(model.context(c), generate_tangent(model, z, c));
}

double critic_score(const GanModel& model, const TangentVector& tangent, int c) {
  if (tangent.dim() != model.n) throw DimensionError("tangent dimension does not match the model");
  Matrix input(tri_size(model.n) + model.num_classes, 1);
  input << vech(tangent.matrix()), one_hot(c, model.num_classes);
  return mlp_forward(model.critic, input)(0, 0);
}

AdversarialTerms adversarial_loss(const GanModel& model, const Minibatch& batch) {
  return evaluate(model, batch, nullptr, Role::critic, false).terms.adversarial;
}

double gradient_penalty(const GanModel& model, const Minibatch& batch) {
  return adversarial_loss(model, batch).gradient_penalty;
}

double gradient_penalty(const GanModel& model, const Minibatch& batch, Rng& rng) {
  Minibatch b = batch;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Eigen::Index i = 0; i < b.epsilon.size(); ++i) b.epsilon(i) = unit(rng);
  return gradient_penalty(model, b);
}

PairLosses reconstruction_losses(const GanModel& model, const Minibatch& batch) {
  return evaluate(model, batch, nullptr, Role::generator, false).terms.reconstruction;
}

PairLosses graph_losses(const GanModel& model, const Minibatch& batch, const Matrix& weights) {
  return evaluate(model, batch, &weights, Role::generator, false).terms.graph;
}

LossBreakdown total_loss(const GanModel& model, const Minibatch& batch, const Matrix& weights, Role role) {
  return evaluate(model, batch, &weights, role, false).terms;
}

RoleGradient loss_gradient(const GanModel& model, const Minibatch& batch, const Matrix& weights, Role role) {
  Evaluation ev = evaluate(model, batch, &weights, role, true);
  return {ev.terms, std::move(ev.gradient)};
}

// ---------------------------------------------------------------------------
// Training

std::string to_json_line(const TrainRecord& r) {
  nlohmann::ordered_json j;
  j["step"] = r.step;
  j["role"] = to_string(r.role);
  j["wasserstein_est"] = r.wasserstein_est;
  j["l_adv"] = r.l_adv;
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(); };
  j["l_m_rec"] = opt(r.l_m_rec);
  j["l_t_rec"] = opt(r.l_t_rec);
  j["l_m_graph"] = opt(r.l_m_graph);
  j["l_t_graph"] = opt(r.l_t_graph);
  j["grad_norm"] = r.grad_norm;
  return j.dump();
}

long long generator_steps(const TrainConfig& cfg, size_t train_size) {
  const auto b = static_cast<long long>(std::min<size_t>(static_cast<size_t>(cfg.batch_size), train_size));
  if (b == 0) return 0;
  return static_cast<long long>(cfg.epochs) * ((static_cast<long long>(train_size) + b - 1) / b);
}

namespace {

double percentile_abs(const Matrix& tangents, int n, double q) {
  std::vector<double> vals;
  vals.reserve(static_cast<size_t>(tangents.cols()) * n * n);
  for (Eigen::Index c = 0; c < tangents.cols(); ++c) {
    const Matrix t = unvech(tangents.col(c), n);
    for (Eigen::Index i = 0; i < t.size(); ++i) vals.push_back(std::abs(t(i)));
  }
  if (vals.empty()) return 1.0;
  std::sort(vals.begin(), vals.end());
  const auto k = static_cast<size_t>(std::ceil(q * static_cast<double>(vals.size())));
  return vals[std::min(vals.size() - 1, k == 0 ? 0 : k - 1)];
}

std::vector<int> draw_indices(size_t population, int count, Rng& rng) {
  std::vector<int> idx(population);
  for (size_t i = 0; i < population; ++i) idx[i] = static_cast<int>(i);
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<size_t> pick(static_cast<size_t>(i), population - 1);
    std::swap(idx[static_cast<size_t>(i)], idx[pick(rng)]);
  }
  idx.resize(static_cast<size_t>(count));
  return idx;
}

void check_record(const TrainRecord& r) {
  const double vals[] = {r.wasserstein_est, r.l_adv, r.l_m_rec.value_or(0.0), r.l_t_rec.value_or(0.0),
                         r.l_m_graph.value_or(0.0), r.l_t_graph.value_or(0.0), r.grad_norm};
  bool finite = true;
  for (double v : vals) finite = finite && std::isfinite(v);
  if (finite && std::abs(r.wasserstein_est) <= 1e6) return;
  std::ostringstream os;
  os << "training diverged at step " << r.step << " (" << to_string(r.role) << "): " << to_json_line(r);
  throw NumericalError(os.str());
}

}  // namespace

TrainResult train(const LabeledSpdDataset& data, const TrainConfig& cfg, const LossWeights& weights,
                  const std::function<void(const TrainRecord&)>& on_record) {
  cfg.validate();
  weights.validate();
  data.validate(2);
  if (data.n < 2) throw DataError("training needs matrices of dimension at least 2");
  if (data.size() < 2) throw DataError("training needs at least 2 samples");

  Rng rng(cfg.seed);
  const int classes = data.num_classes();
  std::vector<SpdMatrix> bases;
  if (cfg.base_point_mode == BasePointMode::global) {
    const auto mats = data.matrices();
    bases.push_back(frechet_mean(mats));
  } else {
    for (int c = 0; c < classes; ++c) {
      const auto idx = data.indices_of(c);
      const auto mats = data.subset(idx).matrices();
      bases.push_back(frechet_mean(mats));
    }
  }
  // Provisional scale; tangents do not depend on it.
  TrainResult result;
  result.model = init_model(data.n, classes, cfg, weights, bases, 1.0, rng);
  GanModel& model = result.model;
  const Matrix tangents = tangent_columns(model, data);
  model.output_scale = cfg.output_scale ? *cfg.output_scale : std::max(percentile_abs(tangents, data.n, 0.99), 1e-6);

  const bool use_graph = weights.alpha4 > 0.0 || weights.alpha5 > 0.0;
  if (use_graph) {
    const auto mats = data.matrices();
    result.graph = build_graph(mats, cfg.graph_metric, cfg.graph_sigma, cfg.graph_knn);
  }

  const int b = std::min<int>(cfg.batch_size, static_cast<int>(data.size()));
  const long long steps = generator_steps(cfg, data.size());
  auto emit = [&](TrainRecord r) {
    check_record(r);
    if (on_record) on_record(r);
    result.log.push_back(std::move(r));
  };

  for (long long step = 0; step < steps; ++step) {
    for (int k = 0; k < cfg.critic_iters; ++k) {
      const Minibatch batch = make_minibatch(model, data, tangents, draw_indices(data.size(), b, rng), rng);
      const Matrix none = Matrix::Zero(b, b);
      const RoleGradient rg = loss_gradient(model, batch, none, Role::critic);
      TrainRecord r;
      r.step = step;
      r.role = Role::critic;
      r.wasserstein_est = rg.terms.adversarial.wasserstein;
      r.l_adv = rg.terms.adversarial.critic_objective;
      r.grad_norm = rg.gradient.norm();
      emit(r);
      adam_step(model.critic, rg.gradient, model.critic_adam);
    }
    const Minibatch batch = make_minibatch(model, data, tangents, draw_indices(data.size(), b, rng), rng);
    const Matrix w = use_graph ? batch_subgraph(result.graph, batch.indices) : Matrix::Zero(b, b);
    const RoleGradient rg = loss_gradient(model, batch, w, Role::generator);
    TrainRecord r;
    r.step = step;
    r.role = Role::generator;
    r.wasserstein_est = rg.terms.adversarial.wasserstein;
    r.l_adv = rg.terms.adversarial.generator_term;
    r.l_m_rec = rg.terms.reconstruction.manifold;
    r.l_t_rec = rg.terms.reconstruction.tangent;
    r.l_m_graph = rg.terms.graph.manifold;
    r.l_t_graph = rg.terms.graph.tangent;
    r.grad_norm = rg.gradient.norm();
    emit(r);
    adam_step(model.generator, rg.gradient, model.generator_adam);
  }
  model.rng_state = rng_state(rng);
  return result;
}

LabeledSpdDataset generate_dataset(const GanModel& model, std::span<const int> counts, std::uint64_t seed) {
  if (static_cast<int>(counts.size()) > model.num_classes) {
    throw DimensionError("more class counts than the model has classes");
  }
  LabeledSpdDataset out;
  out.n = model.n;
  Rng rng(seed);
  for (size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] < 0) throw DimensionError("class counts must be non-negative");
    if (counts[c] == 0) continue;
    Matrix noise(model.noise_dim, counts[c]);
    for (int k = 0; k < counts[c]; ++k) noise.col(k) = sample_noise(rng, model.noise_dim);
    const std::vector<int> labels(static_cast<size_t>(counts[c]), static_cast<int>(c));
    const Matrix out_tangents = generator_output(model, noise, labels);
    const ManifoldContext& ctx = model.context(static_cast<int>(c));
    for (int k = 0; k < counts[c]; ++k) {
      LabeledSample s;
      s.matrix = exp_map(ctx, TangentVector(unvech(out_tangents.col(k), model.n)));
      s.label = static_cast<int>(c);
      s.id = "gen-" + std::to_string(c) + "-" + std::to_string(k);
      s.synthetic = true;
      out.samples.push_back(std::move(s));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoints

std::string model_to_json(const GanModel& model) {
  using detail::json;
  json j;
  j["version"] = 1;
  j["n"] = model.n;
  j["num_classes"] = model.num_classes;
  j["noise_dim"] = model.noise_dim;
  j["output_scale"] = model.output_scale;
  j["base_point_mode"] = to_string(model.base_point_mode);
  j["base_point"] = detail::matrix_to_json(model.base_points.front().base_point().matrix());
  json bases = json::array();
  for (const auto& ctx : model.base_points) bases.push_back(detail::matrix_to_json(ctx.base_point().matrix()));
  j["base_points"] = std::move(bases);
  j["weights"] = {{"alpha1", model.weights.alpha1}, {"alpha2", model.weights.alpha2},
                  {"alpha3", model.weights.alpha3}, {"alpha4", model.weights.alpha4},
                  {"alpha5", model.weights.alpha5}, {"lambda", model.weights.lambda}};
  j["generator"] = detail::network_to_json(model.generator, model.generator_adam);
  j["critic"] = detail::network_to_json(model.critic, model.critic_adam);
  j["rng_state"] = model.rng_state;
  return j.dump() + "\n";
}

GanModel model_from_json(const std::string& text, const std::string& source) {
  using namespace detail;
  const json j = parse_json(text, source);
  const int version = get_int(member(j, "version", source, "$"), source, "$.version");
  if (version != 1) field_error(source, "$.version", "unsupported checkpoint version " + std::to_string(version));
  GanModel m;
  m.n = get_int(member(j, "n", source, "$"), source, "$.n");
  m.num_classes = get_int(member(j, "num_classes", source, "$"), source, "$.num_classes");
  m.noise_dim = get_int(member(j, "noise_dim", source, "$"), source, "$.noise_dim");
  m.output_scale = get_number(member(j, "output_scale", source, "$"), source, "$.output_scale");
  try {
    m.base_point_mode = parse_base_point_mode(get_string(member(j, "base_point_mode", source, "$"), source, "$.base_point_mode"));
  } catch (const ConfigError& e) {
    field_error(source, "$.base_point_mode", e.what());
  }
  const json& bases = member(j, "base_points", source, "$");
  if (!bases.is_array()) field_error(source, "$.base_points", "expected an array");
  for (size_t i = 0; i < bases.size(); ++i) {
    const std::string p = "$.base_points[" + std::to_string(i) + "]";
    try {
      m.base_points.emplace_back(SpdMatrix(matrix_from_json(bases[i], source, p)));
    } catch (const DataError& e) {
      field_error(source, p, e.what());
    } catch (const DimensionError& e) {
      field_error(source, p, e.what());
    }
  }
  const json& w = member(j, "weights", source, "$");
  auto weight = [&](const char* key) { return get_number(member(w, key, source, "$.weights"), source, std::string("$.weights.") + key); };
  m.weights = {weight("alpha1"), weight("alpha2"), weight("alpha3"), weight("alpha4"), weight("alpha5"), weight("lambda")};
  try {
    m.weights.validate();
  } catch (const ConfigError& e) {
    field_error(source, "$.weights", e.what());
  }
  network_from_json(member(j, "generator", source, "$"), source, "$.generator", m.generator, m.generator_adam);
  network_from_json(member(j, "critic", source, "$"), source, "$.critic", m.critic, m.critic_adam);
  m.rng_state = get_string(member(j, "rng_state", source, "$"), source, "$.rng_state");
  try {
    m.validate();
  } catch (const DimensionError& e) {
    throw DataError(source + ": inconsistent checkpoint: " + e.what());
  }
  return m;
}

void write_model(const std::string& path, const GanModel& model) { write_text_file(path, model_to_json(model)); }

GanModel read_model(const std::string& path) { return model_from_json(read_text_file(path), path); }

}  // namespace spdgan
