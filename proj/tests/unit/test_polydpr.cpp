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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "bioret/corpus.hpp"
#include "bioret/embedding.hpp"
#include "bioret/error.hpp"
#include "bioret/polydpr.hpp"
#include "bioret/random.hpp"
#include "helpers.hpp"

using namespace bioret;

namespace {

Matrix rows(std::initializer_list<std::initializer_list<double>> r) {
  Matrix m(r.size(), r.begin()->size());
  std::size_t i = 0;
  for (const auto& row : r) {
    std::size_t j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c) {
  Matrix m(r, c);
  for (auto& x : m.data()) x = rng.normal();
  return m;
}

Vector random_vector(Rng& rng, std::size_t n) {
  Vector v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

}  // namespace

TEST_CASE("softmax sums to one and is shift safe") {
  const auto w = softmax(Vector{1000.0, 1000.0, 999.0});
  CHECK(w[0] == doctest::Approx(w[1]));
  CHECK(w[0] + w[1] + w[2] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("encode_context examples") {
  Rng rng(5);
  const auto codes = random_matrix(rng, 4, 3);
  const auto same = rows({{0.2, -1.0, 3.0}, {0.2, -1.0, 3.0}, {0.2, -1.0, 3.0}});
  const auto v = encode_context(same, codes);
  for (std::size_t k = 0; k < 4; ++k)
    for (std::size_t j = 0; j < 3; ++j) CHECK(v(k, j) == doctest::Approx(same(0, j)).epsilon(1e-15));
  const auto single = rows({{1.5, 2.5, -0.5}});
  const auto s = encode_context(single, codes);
  for (std::size_t k = 0; k < 4; ++k) CHECK(s.row(k)[1] == 2.5);

  const auto h = rows({{1.0, 0.0}, {0.0, 1.0}});
  const auto m = rows({{std::log(3.0), 0.0}});
  const auto r = encode_context(h, m);
  CHECK(r(0, 0) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(r(0, 1) == doctest::Approx(0.25).epsilon(1e-15));

  CHECK_THROWS_AS(encode_context(Matrix(0, 3), codes), ValidationError);
  CHECK_THROWS_AS(encode_context(h, codes), ConfigError);
}

TEST_CASE("train and infer similarity examples") {
  const auto v = rows({{2.0, 0.0}, {0.0, 3.0}});
  const Vector q{1.0, 0.0};
  const double e2 = std::exp(2.0);
  CHECK(train_similarity(q, v) == doctest::Approx(2.0 * e2 / (e2 + 1.0)).epsilon(1e-14));
  CHECK(train_similarity(q, v) == doctest::Approx(1.7616).epsilon(1e-4));
  CHECK(infer_similarity(q, v) == 2.0);
  CHECK(train_similarity(Vector{0.0, 0.0}, v) == 0.0);
  const auto one = rows({{0.3, -0.7}});
  const Vector q2{1.1, 0.4};
  CHECK(train_similarity(q2, one) == dot(q2, one.row(0)));
  CHECK(infer_similarity(q2, one) == train_similarity(q2, one));
}

TEST_CASE("nll_loss examples") {
  CHECK(nll_loss(Matrix(4, 4, 0.7)) == doctest::Approx(std::log(4.0)).epsilon(1e-14));
  CHECK(nll_loss(rows({{2.0, 0.0}, {0.0, 2.0}})) ==
        doctest::Approx(-std::log(std::exp(2.0) / (std::exp(2.0) + 1.0))).epsilon(1e-14));
  CHECK(nll_loss(rows({{2.0, 0.0}, {0.0, 2.0}})) == doctest::Approx(0.1269).epsilon(1e-3));
  CHECK(nll_loss(rows({{800.0, 0.0}, {0.0, 800.0}})) < 1e-300);
  CHECK_THROWS_AS(nll_loss(Matrix(2, 3)), ValidationError);
  CHECK_THROWS_AS(nll_loss(Matrix()), ValidationError);
}

TEST_CASE("property: similarity invariants") {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 1 + rng.uniform_index(8), k = 1 + rng.uniform_index(6), n = 1 + rng.uniform_index(7);
    const auto codes = random_matrix(rng, k, d);
    const auto h = random_matrix(rng, n, d);
    const auto v = encode_context(h, codes);
    const auto q = random_vector(rng, d);
    // Convex hull check along random directions.
    for (int dir = 0; dir < 5; ++dir) {
      const auto u = random_vector(rng, d);
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (std::size_t j = 0; j < n; ++j) {
        lo = std::min(lo, dot(h.row(j), u));
        hi = std::max(hi, dot(h.row(j), u));
      }
      for (std::size_t i = 0; i < k; ++i) {
        CHECK(dot(v.row(i), u) >= lo - 1e-9);
        CHECK(dot(v.row(i), u) <= hi + 1e-9);
      }
    }
    // Code weights are a distribution.
    for (std::size_t i = 0; i < k; ++i) {
      Vector logits;
      for (std::size_t j = 0; j < n; ++j) logits.push_back(dot(codes.row(i), h.row(j)));
      const auto w = softmax(logits);
      double sum = 0;
      for (double x : w) {
        CHECK(x >= 0.0);
        sum += x;
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
    // Max over rows, invariant under row permutation.
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i) best = std::max(best, dot(q, v.row(i)));
    CHECK(infer_similarity(q, v) == best);
    Matrix rev(k, d);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < d; ++j) rev(i, j) = v(k - 1 - i, j);
    CHECK(infer_similarity(q, rev) == best);
  }
}

TEST_CASE("property: one code collapses to a single-vector dot product") {
  Rng rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t d = 1 + rng.uniform_index(16), n = 1 + rng.uniform_index(10);
    const auto v = encode_context(random_matrix(rng, n, d), random_matrix(rng, 1, d));
    const auto q = random_vector(rng, d);
    const double plain = dot(q, v.row(0));
    CHECK(train_similarity(q, v) == plain);
    CHECK(infer_similarity(q, v) == plain);
  }
}

TEST_CASE("model init, save and load") {
  testing::TempDir dir;
  const auto m = PolyDprModel::initialize(6, 16, 3);
  CHECK(m.num_codes() == 6);
  CHECK(m.dimension() == 16);
  CHECK(m.projection == [] {
    Matrix p = Matrix::identity(16);
    for (auto& x : p.data()) x *= kDefaultProjectionScale;
    return p;
  }());
  // Codes follow the seeded normal scaled by 1/sqrt(d).
  double sq = 0;
  for (double x : m.codes.data()) sq += x * x;
  CHECK(sq / 96.0 == doctest::Approx(1.0 / 16.0).epsilon(0.5));
  CHECK(PolyDprModel::initialize(6, 16, 3).codes == m.codes);
  CHECK_FALSE(PolyDprModel::initialize(6, 16, 4).codes == m.codes);
  CHECK_THROWS_AS(PolyDprModel::initialize(0, 16, 3), ConfigError);
  CHECK_THROWS_AS(PolyDprModel::initialize(6, 16, 3, 0.0), ConfigError);

  m.save(dir / "m.json");
  const auto back = PolyDprModel::load(dir / "m.json");
  CHECK(back.codes == m.codes);
  CHECK(back.projection == m.projection);
  CHECK(back.codes_checksum() == m.codes_checksum());
  testing::write_file(dir / "bad.json", "{\"d\": 2}");
  CHECK_THROWS_AS(PolyDprModel::load(dir / "bad.json"), DataError);
}

TEST_CASE("dense index: shape, determinism and file round trip") {
  testing::TempDir dir;
  const HashingEmbedder emb(64, 0);
  const auto model = PolyDprModel::initialize(6, 64, 1);
  const std::vector<TextUnit> units = {{"a", "kinase receptor"}, {"b", "ligand binding site"}, {"c", "autophagy"}};
  const auto idx = build_dense_index(units, emb, model);
  CHECK(idx.size() == 3);
  CHECK(idx.entry(0).rows() == 6);
  CHECK(idx.entry(0).cols() == 64);
  CHECK(idx.values.size() == 3 * 6 * 64);
  CHECK(build_dense_index(units, emb, model).checksum() == idx.checksum());
  CHECK(idx.embedder_id == emb.id());
  CHECK(idx.codes_checksum == model.codes_checksum());

  idx.save(dir / "d.idx");
  const auto back = DenseIndex::load(dir / "d.idx");
  CHECK(back.checksum() == idx.checksum());
  CHECK(back.refs == idx.refs);
  CHECK(back.values == idx.values);
  testing::write_file(dir / "junk.idx", "NOTANIDX");
  CHECK_THROWS_AS(DenseIndex::load(dir / "junk.idx"), DataError);

  const HashingEmbedder small(32, 0);
  CHECK_THROWS_AS(build_dense_index(units, small, model), ConfigError);
  const std::vector<TextUnit> dup = {{"a", "x"}, {"a", "y"}};
  CHECK_THROWS_AS(build_dense_index(dup, emb, model), ValidationError);
}

TEST_CASE("search_dense matches a naive double loop") {
  Rng rng(2024);
  const int d = 64, k = 6;
  DenseIndex idx;
  idx.dimension = d;
  idx.num_codes = k;
  for (int i = 0; i < 1000; ++i) {
    char ref[16];
    std::snprintf(ref, sizeof(ref), "seg%04d", i);
    idx.refs.push_back(ref);
    for (int j = 0; j < k * d; ++j) idx.values.push_back(rng.normal());
  }
  for (int trial = 0; trial < 5; ++trial) {
    const auto q = random_vector(rng, d);
    std::vector<ScoredHit> naive;
    for (std::size_t e = 0; e < idx.refs.size(); ++e) {
      double best = -std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        double s = 0;
        for (int j = 0; j < d; ++j) s += q[j] * idx.values[(e * k + c) * d + j];
        best = std::max(best, s);
      }
      naive.push_back({idx.refs[e], best});
    }
    std::sort(naive.begin(), naive.end(), hit_before);
    naive.resize(100);
    CHECK(search_dense(idx, q, 100) == naive);

    // Positive scaling of the query keeps the order.
    Vector scaled = q;
    for (auto& x : scaled) x *= 3.5;
    const auto a = search_dense(idx, q, 50), b = search_dense(idx, scaled, 50);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].ref == b[i].ref);
  }
  DenseIndex one = idx;
  one.refs.resize(1);
  one.values.resize(k * d);
  CHECK(search_dense(one, random_vector(rng, d), 10).size() == 1);
  CHECK(search_dense(idx, random_vector(rng, d), 1000).size() == 1000);
  CHECK(search_dense(DenseIndex{}, Vector{}, 10).empty());
}
