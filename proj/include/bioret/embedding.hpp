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

#ifndef BIORET_EMBEDDING_HPP_
#define BIORET_EMBEDDING_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bioret/matrix.hpp"

namespace bioret {

/// Maps text to token vectors (n x d, one row per token) and to a single
/// query vector (d). Implementations must be deterministic.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual int dimension() const = 0;
  virtual std::string id() const = 0;
  virtual Matrix token_vectors(std::string_view text) const = 0;
  virtual Vector query_vector(std::string_view text) const = 0;
};

/// Feature-hashing embedder. Each token owns `nnz` distinct coordinates
/// chosen by a seeded hash, each set to +-1/sqrt(nnz), so token vectors are
/// unit length. The query vector is the L2-normalized mean of the token
/// vectors (zero for text without tokens).
class HashingEmbedder final : public EmbeddingProvider {
 public:
  explicit HashingEmbedder(int dimension, std::uint64_t seed = 0, int nnz = 4);

  int dimension() const override { return dim_; }
  std::string id() const override;
  Matrix token_vectors(std::string_view text) const override;
  Vector query_vector(std::string_view text) const override;

  Vector token_vector(std::string_view token) const;

 private:
  int dim_;
  std::uint64_t seed_;
  int nnz_;
};

/// Precomputed vectors read from a binary file, keyed by the exact text.
///
/// Layout (little-endian): magic "BRVECS01", u32 d, u64 count, then per
/// record: u32 key_len, key bytes, u32 rows, rows*d f64 values.
/// A 1-row record used as a query returns that row; a multi-row record
/// returns the normalized row mean.
class VectorFileProvider final : public EmbeddingProvider {
 public:
  static VectorFileProvider load(const std::filesystem::path& path);

  int dimension() const override { return dim_; }
  std::string id() const override { return id_; }
  /// Throws LookupError for texts absent from the file.
  Matrix token_vectors(std::string_view text) const override;
  Vector query_vector(std::string_view text) const override;

  std::size_t size() const { return records_.size(); }

 private:
  int dim_ = 0;
  std::string id_;
  std::map<std::string, Matrix, std::less<>> records_;
};

void write_vector_file(const std::filesystem::path& path, int dimension,
                       const std::vector<std::pair<std::string, Matrix>>& records);

/// Normalized mean of the rows, or a zero vector when the mean vanishes.
Vector normalized_mean(const Matrix& rows);

}  // namespace bioret

#endif  // BIORET_EMBEDDING_HPP_
