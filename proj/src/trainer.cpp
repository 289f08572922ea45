// Copyright 2026 The bioret Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bioret/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bioret/error.hpp"
#include "bioret/random.hpp"

namespace bioret {
namespace {

// Forward state of one context: attention weights per code and the pooled
// context vectors.
struct ContextForward {
  std::vector<Vector> attention;  // K x n
  Matrix vectors;                 // K x d
};

ContextForward forward_context(const Matrix& tokens, const Matrix& codes) {
  ContextForward f;
  const std::size_t n = tokens.rows();
  f.vectors = Matrix(codes.rows(), codes.cols());
  Vector logits(n);
  for (std::size_t k = 0; k < codes.rows(); ++k) {
    for (std::size_t t = 0; t < n; ++t) logits[t] = dot(codes.row(k), tokens.row(t));
    f.attention.push_back(softmax(logits));
    const auto& w = f.attention.back();
    auto dst = f.vectors.row(k);
    for (std::size_t t = 0; t < n; ++t) {
      auto h = tokens.row(t);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += w[t] * h[c];
    }
  }
  return f;
}

void check_batch(const PolyDprModel& model, const EncodedBatch& batch) {
  if (batch.queries.size() != batch.contexts.size() || batch.queries.empty())
    throw ValidationError("batch needs matching, non-empty query and context lists");
  const auto d = static_cast<std::size_t>(model.dimension());
  for (const auto& q : batch.queries)
    if (q.size() != d) throw ConfigError("query dimension does not match the model");
  for (const auto& h : batch.contexts) {
    if (h.cols() != d) throw ConfigError("context dimension does not match the model");
    if (h.rows() == 0) throw ValidationError("context without tokens in batch");
  }
}

}  // namespace

Matrix batch_scores(const PolyDprModel& model, const EncodedBatch& batch) {
  check_batch(model, batch);
  const std::size_t b = batch.size();
  std::vector<Vector> projected;
  for (const auto& q : batch.queries) projected.push_back(model.project_query(q));
  std::vector<Matrix> contexts;
  for (const auto& h : batch.contexts) contexts.push_back(encode_context(h, model.codes));
  Matrix s(b, b);
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t j = 0; j < b; ++j) s(i, j) = train_similarity(projected[i], contexts[j]);
  return s;
}

double batch_loss(const PolyDprModel& model, const EncodedBatch& batch) {
  return nll_loss(batch_scores(model, batch));
}

LossAndGradient loss_and_gradient(const PolyDprModel& model, const EncodedBatch& batch) {
  check_batch(model, batch);
  const std::size_t b = batch.size();
  const std::size_t kc = static_cast<std::size_t>(model.num_codes());
  const std::size_t d = static_cast<std::size_t>(model.dimension());

  std::vector<Vector> u;
  for (const auto& q : batch.queries) u.push_back(model.project_query(q));
  std::vector<ContextForward> ctx;
  for (const auto& h : batch.contexts) ctx.push_back(forward_context(h, model.codes));

  // Scores plus, per (i, j), the sensitivity of the score to each code
  // logit s_k = u_i . v_jk: gamma_k = beta_k * (1 + s_k - score).
  Matrix scores(b, b);
  std::vector<std::vector<Vector>> gamma(b, std::vector<Vector>(b));
  Vector logits(kc);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      for (std::size_t k = 0; k < kc; ++k) logits[k] = dot(u[i], ctx[j].vectors.row(k));
      const auto beta = softmax(logits);
      double score = 0.0;
      for (std::size_t k = 0; k < kc; ++k) score += beta[k] * logits[k];
      scores(i, j) = score;
      Vector g(kc);
      for (std::size_t k = 0; k < kc; ++k) g[k] = beta[k] * (1.0 + logits[k] - score);
      gamma[i][j] = std::move(g);
    }
  }

  LossAndGradient out;
  out.loss = nll_loss(scores);

  // dL/dS = (softmax(row) - onehot) / B
  Matrix ds(b, b);
  for (std::size_t i = 0; i < b; ++i) {
    const auto p = softmax(scores.row(i));
    for (std::size_t j = 0; j < b; ++j)
      ds(i, j) = (p[j] - (i == j ? 1.0 : 0.0)) / static_cast<double>(b);
  }

  std::vector<Vector> du(b, Vector(d, 0.0));
  std::vector<Matrix> dv(b, Matrix(kc, d));
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      const double gij = ds(i, j);
      for (std::size_t k = 0; k < kc; ++k) {
        const double coef = gij * gamma[i][j][k];
        auto v = ctx[j].vectors.row(k);
        auto dvj = dv[j].row(k);
        for (std::size_t c = 0; c < d; ++c) {
          du[i][c] += coef * v[c];
          dvj[c] += coef * u[i][c];
        }
      }
    }
  }

  out.grad.projection = Matrix(d, d);
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c) out.grad.projection(r, c) += du[i][r] * batch.queries[i][c];

  // Backprop through the attention pooling: dz_n = a_n (g . h_n - g . v_k),
  // dm_k = sum_n dz_n h_n.
  out.grad.codes = Matrix(kc, d);
  for (std::size_t j = 0; j < b; ++j) {
    const Matrix& h = batch.contexts[j];
    for (std::size_t k = 0; k < kc; ++k) {
      auto g = dv[j].row(k);
      const double gv = dot(g, ctx[j].vectors.row(k));
      auto dm = out.grad.codes.row(k);
      for (std::size_t t = 0; t < h.rows(); ++t) {
        const double dz = ctx[j].attention[k][t] * (dot(g, h.row(t)) - gv);
        auto ht = h.row(t);
        for (std::size_t c = 0; c < d; ++c) dm[c] += dz * ht[c];
      }
    }
  }
  return out;
}

Schedule parse_schedule(std::string_view name) {
  if (name == "sequential") return Schedule::kSequential;
  if (name == "multitask") return Schedule::kMultiTask;
  throw ConfigError("unknown training schedule: " + std::string(name));
}

void TrainConfig::validate() const {
  if (batch_size < 2) throw ConfigError("batch_size must be >= 2 for in-batch negatives");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(projection_learning_rate >= 0.0)) throw ConfigError("projection_learning_rate must be >= 0");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
}

std::vector<std::pair<Vector, Matrix>> encode_pairs(std::span<const TrainingPair> pairs,
                                                    const EmbeddingProvider& provider,
                                                    int* skipped) {
  std::vector<std::pair<Vector, Matrix>> out;
  int dropped = 0;
  for (const auto& p : pairs) {
    auto h = provider.token_vectors(p.positive_text);
    auto q = provider.query_vector(p.query_text);
    const bool empty_query = std::all_of(q.begin(), q.end(), [](double x) { return x == 0.0; });
    if (h.rows() == 0 || empty_query) {
      ++dropped;
      continue;
    }
    out.emplace_back(std::move(q), std::move(h));
  }
  if (skipped) *skipped = dropped;
  return out;
}

namespace {

using Encoded = std::vector<std::pair<Vector, Matrix>>;

// Seeded Fisher-Yates shuffle, partitioned into batches; a trailing batch of
// one example is dropped because it has no in-batch negative.
std::vector<std::vector<std::size_t>> make_batches(std::size_t n, int batch_size, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);
  std::vector<std::vector<std::size_t>> batches;
  const auto bs = static_cast<std::size_t>(batch_size);
  for (std::size_t start = 0; start < n; start += bs) {
    const std::size_t end = std::min(n, start + bs);
    if (end - start < 2) break;
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

double sgd_step(PolyDprModel& model, const Encoded& data, const std::vector<std::size_t>& idx,
                double lr, double projection_lr) {
  EncodedBatch batch;
  for (auto i : idx) {
    batch.queries.push_back(data[i].first);
    batch.contexts.push_back(data[i].second);
  }
  auto lg = loss_and_gradient(model, batch);
  auto m = model.codes.data();
  auto gm = lg.grad.codes.data();
  for (std::size_t i = 0; i < m.size(); ++i) m[i] -= lr * gm[i];
  auto p = model.projection.data();
  auto gp = lg.grad.projection.data();
  for (std::size_t i = 0; i < p.size(); ++i) p[i] -= projection_lr * gp[i];
  return lg.loss;
}

}  // namespace

TrainReport train(PolyDprModel& model, const EmbeddingProvider& provider, const TrainConfig& config,
                  std::span<const TrainingPair> pairs, std::span<const TrainingPair> pretrain_pairs) {
  config.validate();
  if (provider.dimension() != model.dimension())
    throw ConfigError("embedding dimension does not match the model");
  if (pairs.empty() && pretrain_pairs.empty()) throw ValidationError("no training pairs");

  TrainReport report;
  int skipped_main = 0, skipped_pre = 0;
  const Encoded main = encode_pairs(pairs, provider, &skipped_main);
  const Encoded pre = encode_pairs(pretrain_pairs, provider, &skipped_pre);
  report.skipped_pairs = skipped_main + skipped_pre;

  auto run_epoch = [&](std::vector<std::pair<const Encoded*, std::vector<std::size_t>>> plan) {
    double total = 0.0;
    for (const auto& [data, idx] : plan) {
      total += sgd_step(model, *data, idx, config.learning_rate, config.projection_learning_rate);
      ++report.steps;
    }
    report.epoch_losses.push_back(plan.empty() ? 0.0 : total / static_cast<double>(plan.size()));
  };

  auto single_task_plan = [&](const Encoded& data, Rng& rng) {
    std::vector<std::pair<const Encoded*, std::vector<std::size_t>>> plan;
    for (auto& b : make_batches(data.size(), config.batch_size, rng)) plan.emplace_back(&data, std::move(b));
    return plan;
  };

  Rng pre_rng(config.seed, "train-pretrain");
  Rng main_rng(config.seed, "train-main");
  if (config.schedule == Schedule::kSequential || pre.empty()) {
    if (!pre.empty())
      for (int e = 0; e < config.epochs; ++e) run_epoch(single_task_plan(pre, pre_rng));
    if (!main.empty())
      for (int e = 0; e < config.epochs; ++e) run_epoch(single_task_plan(main, main_rng));
  } else {
    for (int e = 0; e < config.epochs; ++e) {
      auto a = make_batches(pre.size(), config.batch_size, pre_rng);
      auto b = make_batches(main.size(), config.batch_size, main_rng);
      std::vector<std::pair<const Encoded*, std::vector<std::size_t>>> plan;
      for (std::size_t i = 0; i < std::max(a.size(), b.size()); ++i) {
        if (i < a.size()) plan.emplace_back(&pre, std::move(a[i]));
        if (i < b.size()) plan.emplace_back(&main, std::move(b[i]));
      }
      run_epoch(std::move(plan));
    }
  }
  return report;
}

GradCheckResult grad_check(const PolyDprModel& model, const EncodedBatch& batch, double epsilon,
                           std::optional<GradientCorruption> corruption) {
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  auto analytic = loss_and_gradient(model, batch).grad;
  if (corruption) {
    Matrix& target = corruption->projection ? analytic.projection : analytic.codes;
    if (corruption->row >= target.rows() || corruption->col >= target.cols())
      throw ConfigError("corruption index out of range");
    target(corruption->row, corruption->col) += corruption->delta;
  }

  GradCheckResult result;
  PolyDprModel probe = model;
  auto check = [&](Matrix PolyDprModel::*param, const Matrix& grad, const char* name) {
    Matrix& values = probe.*param;
    for (std::size_t r = 0; r < values.rows(); ++r) {
      for (std::size_t c = 0; c < values.cols(); ++c) {
        const double saved = values(r, c);
        values(r, c) = saved + epsilon;
        const double up = batch_loss(probe, batch);
        values(r, c) = saved - epsilon;
        const double down = batch_loss(probe, batch);
        values(r, c) = saved;
        const double numeric = (up - down) / (2.0 * epsilon);
        const double a = grad(r, c);
        const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
        const double rel = std::abs(a - numeric) / denom;
        ++result.parameters_checked;
        if (result.worst_parameter.empty() || rel > result.max_relative_error) {
          result.max_relative_error = rel;
          result.worst_parameter =
              std::string(name) + "[" + std::to_string(r) + "][" + std::to_string(c) + "]";
          result.worst_analytic = a;
          result.worst_numeric = numeric;
        }
      }
    }
  };
  check(&PolyDprModel::codes, analytic.codes, "codes");
  check(&PolyDprModel::projection, analytic.projection, "projection");
  return result;
}

EncodedBatch random_batch(int batch_size, int dimension, int min_tokens, int max_tokens,
                          std::uint64_t seed) {
  if (batch_size < 1 || dimension < 1 || min_tokens < 1 || max_tokens < min_tokens)
    throw ConfigError("invalid random batch shape");
  Rng rng(seed, "random-batch");
  const double scale = 1.0 / std::sqrt(static_cast<double>(dimension));
  EncodedBatch batch;
  const auto d = static_cast<std::size_t>(dimension);
  for (int i = 0; i < batch_size; ++i) {
    Vector q(d);
    for (double& x : q) x = rng.normal() * scale;
    const auto span = static_cast<std::uint64_t>(max_tokens - min_tokens + 1);
    const auto n = static_cast<std::size_t>(min_tokens) + rng.uniform_index(span);
    Matrix h(n, d);
    for (double& x : h.data()) x = rng.normal() * scale;
    batch.queries.push_back(std::move(q));
    batch.contexts.push_back(std::move(h));
  }
  return batch;
}

}  // namespace bioret
