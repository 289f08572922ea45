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

#ifndef BIORET_POLYDPR_HPP_
#define BIORET_POLYDPR_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bioret/corpus.hpp"
#include "bioret/embedding.hpp"
#include "bioret/lexical.hpp"
#include "bioret/matrix.hpp"

namespace bioret {

inline constexpr int kDefaultCodes = 6;
inline constexpr double kDefaultProjectionScale = 40.0;

/// Trainable state of a multi-vector retriever: K global codes that pool a
/// context's token vectors into K context vectors, plus a d x d projection
/// applied to query vectors.
struct PolyDprModel {
  Matrix codes;       // K x d
  Matrix projection;  // d x d
  std::uint64_t seed = 0;
  std::map<std::string, std::string> provenance;

  /// Codes drawn from a seeded standard normal scaled by 1/sqrt(d);
  /// projection starts at the identity.
  // The projection starts as projection_scale * I: ranking-neutral, but it sets the
  // softmax temperature seen by the loss.
  static PolyDprModel initialize(int num_codes, int dimension, std::uint64_t seed,
                                 double projection_scale = kDefaultProjectionScale);

  int num_codes() const { return static_cast<int>(codes.rows()); }
  int dimension() const { return static_cast<int>(codes.cols()); }

  Vector project_query(std::span<const double> query) const;
  std::uint64_t codes_checksum() const;

  void save(const std::filesystem::path& path) const;
  static PolyDprModel load(const std::filesystem::path& path);
};

/// Numerically stable softmax.
Vector softmax(std::span<const double> logits);

/// Row i of the result is sum_n softmax_n(codes_i . h_n) h_n over the rows h_n
/// of `tokens`. Throws ValidationError for zero tokens and ConfigError when
/// the dimensions disagree.
Matrix encode_context(const Matrix& tokens, const Matrix& codes);

/// Query-attended pooling used during training: the context vectors are
/// mixed with weights softmax(q . v_k) and the result is dotted with q.
double train_similarity(std::span<const double> query, const Matrix& context);

/// Inference score: max_k q . v_k.
double infer_similarity(std::span<const double> query, const Matrix& context);

/// Mean over rows of -log softmax(row)[i]; row i scores query i against all
/// in-batch contexts with the positive on the diagonal. Throws
/// ValidationError for a non-square or empty matrix.
double nll_loss(const Matrix& scores);

/// Flat multi-vector index: `count` entries of K x d context vectors stored
/// row-major.
struct DenseIndex {
  static inline constexpr std::uint32_t kFormatVersion = 1;

  int dimension = 0;
  int num_codes = 0;
  std::string embedder_id;
  std::uint64_t codes_checksum = 0;
  std::vector<std::string> refs;
  std::vector<double> values;

  std::size_t size() const { return refs.size(); }
  std::span<const double> code(std::size_t entry, int k) const;
  Matrix entry(std::size_t i) const;

  /// Checksum of the full serialized content.
  std::uint64_t checksum() const;

  /// Header {magic "BRDENSE1", version, d, K, count, embedder-id,
  /// codes-checksum}, then refs, then row-major f64 values.
  void save(const std::filesystem::path& path) const;
  static DenseIndex load(const std::filesystem::path& path);
};

/// Throws ConfigError when the provider and model dimensions differ and
/// ValidationError on duplicate refs or units without tokens.
DenseIndex build_dense_index(std::span<const TextUnit> units, const EmbeddingProvider& provider,
                             const PolyDprModel& model);
DenseIndex build_dense_index(std::span<const Segment> segments, const EmbeddingProvider& provider,
                             const PolyDprModel& model);

/// Exhaustive max-inner-product scan. Entry score = max over its K codes;
/// hits ordered by (score desc, ref asc), truncated to top_k.
std::vector<ScoredHit> search_dense(const DenseIndex& index, std::span<const double> query,
                                    int top_k);

/// Encodes and projects `query` with the model, then scans.
std::vector<ScoredHit> search_dense(const DenseIndex& index, std::string_view query,
                                    const EmbeddingProvider& provider, const PolyDprModel& model,
                                    int top_k);

}  // namespace bioret

#endif  // BIORET_POLYDPR_HPP_
