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

#ifndef BIORET_TRAINER_HPP_
#define BIORET_TRAINER_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bioret/embedding.hpp"
#include "bioret/matrix.hpp"
#include "bioret/polydpr.hpp"
#include "bioret/pretrain.hpp"

namespace bioret {

/// A batch in embedding space: raw (unprojected) query vectors and the token
/// matrices of the matching positives. Row i of the in-batch score matrix
/// scores query i against every context.
struct EncodedBatch {
  std::vector<Vector> queries;
  std::vector<Matrix> contexts;

  std::size_t size() const { return queries.size(); }
};

struct Gradient {
  Matrix codes;
  Matrix projection;
};

struct LossAndGradient {
  double loss = 0.0;
  Gradient grad;
};

/// In-batch score matrix S[i][j] = train_similarity(P q_i, encode(H_j, M)).
Matrix batch_scores(const PolyDprModel& model, const EncodedBatch& batch);

double batch_loss(const PolyDprModel& model, const EncodedBatch& batch);

/// nll_loss(batch_scores) and its exact gradient w.r.t. codes and projection.
LossAndGradient loss_and_gradient(const PolyDprModel& model, const EncodedBatch& batch);

enum class Schedule { kSequential, kMultiTask };

Schedule parse_schedule(std::string_view name);  // "sequential" | "multitask"

struct TrainConfig {
  double learning_rate = 1.0;              // codes
  double projection_learning_rate = 100.0; // query projection; 0 freezes it
  int epochs = 1;
  int batch_size = 32;
  std::uint64_t seed = 0;
  Schedule schedule = Schedule::kSequential;

  /// Throws ConfigError unless batch_size >= 2, learning_rate > 0, projection_learning_rate >= 0
  /// and epochs >= 0.
  void validate() const;
};

struct TrainReport {
  int steps = 0;
  int skipped_pairs = 0;  // pairs whose query or positive has no tokens
  std::vector<double> epoch_losses;  // mean batch loss per epoch, in run order
};

/// Encodes pairs with the provider, dropping pairs without tokens.
std::vector<std::pair<Vector, Matrix>> encode_pairs(std::span<const TrainingPair> pairs,
                                                    const EmbeddingProvider& provider,
                                                    int* skipped = nullptr);

/// Plain SGD on the in-batch negative log likelihood.
///
/// With pretraining pairs, the Sequential schedule runs `epochs` over the
/// pretraining pairs and then `epochs` over `pairs`; MultiTask runs
/// `epochs` rounds that alternate one batch of each task. Batch order comes
/// from a seeded shuffle, so equal inputs give bitwise-equal models.
TrainReport train(PolyDprModel& model, const EmbeddingProvider& provider, const TrainConfig& config,
                  std::span<const TrainingPair> pairs,
                  std::span<const TrainingPair> pretrain_pairs = {});

/// Adds `delta` to one analytic gradient entry; negative control for grad_check.
struct GradientCorruption {
  bool projection = false;  // false: codes
  std::size_t row = 0;
  std::size_t col = 0;
  double delta = 0.1;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;  // e.g. "codes[2][5]"
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t parameters_checked = 0;
};

/// Compares every analytic gradient entry with the central difference
/// (f(theta + eps) - f(theta - eps)) / (2 eps). The relative error of an
/// entry is |a - n| / max(|a|, |n|, 1e-6).
GradCheckResult grad_check(const PolyDprModel& model, const EncodedBatch& batch, double epsilon,
                           std::optional<GradientCorruption> corruption = std::nullopt);

/// Random batch for gradient checks: queries and token rows ~ N(0, 1/d).
EncodedBatch random_batch(int batch_size, int dimension, int min_tokens, int max_tokens,
                          std::uint64_t seed);

}  // namespace bioret

#endif  // BIORET_TRAINER_HPP_
