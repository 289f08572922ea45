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

#include "bioret/embedding.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "bioret/error.hpp"
#include "bioret/random.hpp"
#include "bioret/text.hpp"

namespace bioret {

Vector normalized_mean(const Matrix& rows) {
  Vector v(rows.cols(), 0.0);
  if (rows.rows() == 0) return v;
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    auto row = rows.row(r);
    for (std::size_t c = 0; c < v.size(); ++c) v[c] += row[c];
  }
  const double norm = std::sqrt(dot(v, v));
  if (norm == 0.0) return v;
  for (double& x : v) x /= norm;
  return v;
}

HashingEmbedder::HashingEmbedder(int dimension, std::uint64_t seed, int nnz)
    : dim_(dimension), seed_(seed), nnz_(nnz) {
  if (dimension < 1) throw ConfigError("embedding dimension must be >= 1");
  if (nnz < 1 || nnz > dimension) throw ConfigError("hashing nnz must lie in [1, dimension]");
}

std::string HashingEmbedder::id() const {
  return "hash-d" + std::to_string(dim_) + "-nnz" + std::to_string(nnz_) + "-seed" +
         std::to_string(seed_);
}

Vector HashingEmbedder::token_vector(std::string_view token) const {
  Vector v(static_cast<std::size_t>(dim_), 0.0);
  const double value = 1.0 / std::sqrt(static_cast<double>(nnz_));
  const std::uint64_t base = fnv1a64(token) ^ splitmix64_mix(seed_);
  int placed = 0;
  for (std::uint64_t probe = 0; placed < nnz_; ++probe) {
    const std::uint64_t h = splitmix64_mix(base + (probe + 1) * Rng::kGamma);
    const auto idx = static_cast<std::size_t>(h % static_cast<std::uint64_t>(dim_));
    if (v[idx] != 0.0) continue;
    v[idx] = (h >> 63) ? -value : value;
    ++placed;
  }
  return v;
}

Matrix HashingEmbedder::token_vectors(std::string_view text) const {
  auto toks = tokenize(text);
  Matrix m(toks.size(), static_cast<std::size_t>(dim_));
  for (std::size_t i = 0; i < toks.size(); ++i) {
    auto v = token_vector(toks[i]);
    std::copy(v.begin(), v.end(), m.row(i).begin());
  }
  return m;
}

Vector HashingEmbedder::query_vector(std::string_view text) const {
  return normalized_mean(token_vectors(text));
}

namespace {

constexpr char kVecMagic[8] = {'B', 'R', 'V', 'E', 'C', 'S', '0', '1'};

static_assert(std::endian::native == std::endian::little,
              "vector files are little-endian; add byte swapping for this platform");

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw DataError("truncated vector file");
  return value;
}

}  // namespace

void write_vector_file(const std::filesystem::path& path, int dimension,
                       const std::vector<std::pair<std::string, Matrix>>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(kVecMagic, sizeof(kVecMagic));
  write_pod(out, static_cast<std::uint32_t>(dimension));
  write_pod(out, static_cast<std::uint64_t>(records.size()));
  for (const auto& [key, m] : records) {
    if (m.cols() != static_cast<std::size_t>(dimension))
      throw ConfigError("vector record '" + key + "' has the wrong dimension");
    write_pod(out, static_cast<std::uint32_t>(key.size()));
    out.write(key.data(), static_cast<std::streamsize>(key.size()));
    write_pod(out, static_cast<std::uint32_t>(m.rows()));
    out.write(reinterpret_cast<const char*>(m.data().data()),
              static_cast<std::streamsize>(m.data().size() * sizeof(double)));
  }
}

VectorFileProvider VectorFileProvider::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::istringstream stream(bytes);
  char magic[8];
  stream.read(magic, sizeof(magic));
  if (!stream || std::memcmp(magic, kVecMagic, sizeof(magic)) != 0)
    throw DataError("not a vector file: " + path.string());
  VectorFileProvider p;
  p.dim_ = static_cast<int>(read_pod<std::uint32_t>(stream));
  if (p.dim_ < 1) throw DataError("vector file has zero dimension");
  const auto count = read_pod<std::uint64_t>(stream);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto key_len = read_pod<std::uint32_t>(stream);
    std::string key(key_len, '\0');
    stream.read(key.data(), key_len);
    const auto rows = read_pod<std::uint32_t>(stream);
    Matrix m(rows, static_cast<std::size_t>(p.dim_));
    stream.read(reinterpret_cast<char*>(m.data().data()),
                static_cast<std::streamsize>(m.data().size() * sizeof(double)));
    if (!stream) throw DataError("truncated vector file");
    for (double x : m.data())
      if (!std::isfinite(x)) throw DataError("non-finite value in vector record '" + key + "'");
    p.records_.insert_or_assign(std::move(key), std::move(m));
  }
  p.id_ = "vecfile-" + std::to_string(fnv1a64(bytes));
  return p;
}

Matrix VectorFileProvider::token_vectors(std::string_view text) const {
  auto it = records_.find(text);
  if (it == records_.end()) throw LookupError("no vectors for text: " + std::string(text));
  return it->second;
}

Vector VectorFileProvider::query_vector(std::string_view text) const {
  const Matrix m = token_vectors(text);
  if (m.rows() == 1) return Vector(m.row(0).begin(), m.row(0).end());
  return normalized_mean(m);
}

}  // namespace bioret
