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

#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "bioret/embedding.hpp"
#include "bioret/error.hpp"
#include "helpers.hpp"

using namespace bioret;

namespace {

double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

}  // namespace

TEST_CASE("hashing embedder: unit token vectors with nnz coordinates") {
  const HashingEmbedder emb(64, 3, 4);
  const auto v = emb.token_vector("kinase");
  int nonzero = 0;
  for (double x : v)
    if (x != 0.0) {
      ++nonzero;
      CHECK(std::abs(x) == doctest::Approx(0.5));
    }
  CHECK(nonzero == 4);
  CHECK(norm(v) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(emb.token_vector("kinase") == v);
  CHECK_FALSE(HashingEmbedder(64, 4, 4).token_vector("kinase") == v);
  CHECK(emb.id() != HashingEmbedder(64, 4, 4).id());
  CHECK_THROWS_AS(HashingEmbedder(0), ConfigError);
  CHECK_THROWS_AS(HashingEmbedder(8, 0, 9), ConfigError);
}

TEST_CASE("hashing embedder: text encodings") {
  const HashingEmbedder emb(32);
  const auto m = emb.token_vectors("The kinase, the KINASE.");
  REQUIRE(m.rows() == 4);
  CHECK(m.cols() == 32);
  // Tokens are normalized before hashing.
  CHECK(std::vector<double>(m.row(1).begin(), m.row(1).end()) ==
        std::vector<double>(m.row(3).begin(), m.row(3).end()));
  const auto q = emb.query_vector("kinase receptor");
  CHECK(norm(q) == doctest::Approx(1.0).epsilon(1e-12));
  const auto z = emb.query_vector("...");
  CHECK(norm(z) == 0.0);
  CHECK(emb.token_vectors("").rows() == 0);
  for (double x : emb.query_vector("a b c d e f")) CHECK(std::isfinite(x));
}

TEST_CASE("vector file provider round trip") {
  testing::TempDir dir;
  Matrix two(2, 3);
  two(0, 0) = 1.0;
  two(1, 1) = 1.0;
  Matrix one(1, 3);
  one(0, 2) = 2.0;
  write_vector_file(dir / "v.bin", 3, {{"context text", two}, {"query", one}});
  const auto p = VectorFileProvider::load(dir / "v.bin");
  CHECK(p.dimension() == 3);
  CHECK(p.size() == 2);
  CHECK(p.token_vectors("context text") == two);
  CHECK(p.query_vector("query") == Vector{0.0, 0.0, 2.0});
  const auto mean = p.query_vector("context text");
  CHECK(mean[0] == doctest::Approx(std::sqrt(0.5)));
  CHECK(mean[1] == doctest::Approx(std::sqrt(0.5)));
  CHECK_THROWS_AS(p.token_vectors("unknown"), LookupError);

  testing::write_file(dir / "bad.bin", "BRVECS01");
  CHECK_THROWS_AS(VectorFileProvider::load(dir / "bad.bin"), DataError);
  testing::write_file(dir / "magic.bin", "WHATEVER12345678");
  CHECK_THROWS_AS(VectorFileProvider::load(dir / "magic.bin"), DataError);
  CHECK_THROWS_AS(write_vector_file(dir / "w.bin", 4, {{"x", one}}), ConfigError);
}

TEST_CASE("normalized_mean") {
  Matrix m(2, 2);
  m(0, 0) = 1.0;
  m(1, 0) = -1.0;
  CHECK(normalized_mean(m) == Vector{0.0, 0.0});
  m(1, 0) = 3.0;
  CHECK(normalized_mean(m) == Vector{1.0, 0.0});
}
