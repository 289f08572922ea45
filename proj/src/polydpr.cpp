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

#include "bioret/polydpr.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <set>
#include <sstream>

#include "bioret/error.hpp"
#include "bioret/random.hpp"
#include "jsonl.hpp"

namespace bioret {

using internal::json;

PolyDprModel PolyDprModel::initialize(int num_codes, int dimension, std::uint64_t seed,
                                      double projection_scale) {
  if (num_codes < 1) throw ConfigError("number of codes K must be >= 1");
  if (!(projection_scale > 0.0)) throw ConfigError("projection scale must be > 0");
  if (dimension < 1) throw ConfigError("dimension must be >= 1");
  PolyDprModel model;
  model.codes = Matrix(static_cast<std::size_t>(num_codes), static_cast<std::size_t>(dimension));
  Rng rng(seed, "polydpr-codes");
  const double scale = 1.0 / std::sqrt(static_cast<double>(dimension));
  for (double& x : model.codes.data()) x = rng.normal() * scale;
  model.projection = Matrix::identity(static_cast<std::size_t>(dimension));
  for (double& x : model.projection.data()) x *= projection_scale;
  model.seed = seed;
  return model;
}

Vector PolyDprModel::project_query(std::span<const double> query) const {
  if (query.size() != projection.cols())
    throw ConfigError("query dimension does not match the model");
  return matvec(projection, query);
}

std::uint64_t PolyDprModel::codes_checksum() const {
  auto d = codes.data();
  return fnv1a64({reinterpret_cast<const char*>(d.data()), d.size() * sizeof(double)});
}

namespace {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, std::size_t rows, std::size_t cols) {
  if (!j.is_array() || j.size() != rows) throw DataError("matrix has the wrong number of rows");
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto& row = j[r];
    if (!row.is_array() || row.size() != cols) throw DataError("matrix row has the wrong length");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = row[c].get<double>();
  }
  return m;
}

}  // namespace

void PolyDprModel::save(const std::filesystem::path& path) const {
  json obj;
  obj["format"] = "bioret-polydpr";
  obj["version"] = 1;
  obj["d"] = dimension();
  obj["K"] = num_codes();
  obj["seed"] = seed;
  obj["codes"] = matrix_to_json(codes);
  obj["projection"] = matrix_to_json(projection);
  obj["provenance"] = provenance;
  auto out = internal::open_out(path);
  out << obj.dump() << '\n';
}

PolyDprModel PolyDprModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    auto obj = json::parse(in);
    if (obj.value("format", "") != "bioret-polydpr") throw DataError("not a model file");
    const auto d = obj.at("d").get<std::size_t>();
    const auto k = obj.at("K").get<std::size_t>();
    if (d < 1 || k < 1) throw DataError("model has empty shape");
    PolyDprModel model;
    model.codes = matrix_from_json(obj.at("codes"), k, d);
    model.projection = matrix_from_json(obj.at("projection"), d, d);
    model.seed = obj.at("seed").get<std::uint64_t>();
    model.provenance = obj.value("provenance", std::map<std::string, std::string>{});
    return model;
  } catch (const json::exception& e) {
    throw DataError("malformed model file " + path.string() + ": " + e.what());
  }
}

Vector softmax(std::span<const double> logits) {
  Vector w(logits.begin(), logits.end());
  if (w.empty()) return w;
  const double mx = *std::max_element(w.begin(), w.end());
  double sum = 0.0;
  for (double& x : w) {
    x = std::exp(x - mx);
    sum += x;
  }
  for (double& x : w) x /= sum;
  return w;
}

Matrix encode_context(const Matrix& tokens, const Matrix& codes) {
  if (tokens.rows() == 0) throw ValidationError("cannot encode a context without tokens");
  if (tokens.cols() != codes.cols())
    throw ConfigError("token dimension does not match the code dimension");
  const std::size_t n = tokens.rows();
  Matrix out(codes.rows(), codes.cols());
  Vector logits(n);
  for (std::size_t k = 0; k < codes.rows(); ++k) {
    for (std::size_t t = 0; t < n; ++t) logits[t] = dot(codes.row(k), tokens.row(t));
    const auto w = softmax(logits);
    auto dst = out.row(k);
    for (std::size_t t = 0; t < n; ++t) {
      auto h = tokens.row(t);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += w[t] * h[c];
    }
  }
  return out;
}

double train_similarity(std::span<const double> query, const Matrix& context) {
  if (query.size() != context.cols()) throw ConfigError("query/context dimension mismatch");
  Vector logits(context.rows());
  for (std::size_t k = 0; k < context.rows(); ++k) logits[k] = dot(query, context.row(k));
  const auto w = softmax(logits);
  Vector pooled(context.cols(), 0.0);
  for (std::size_t k = 0; k < context.rows(); ++k) {
    auto v = context.row(k);
    for (std::size_t c = 0; c < pooled.size(); ++c) pooled[c] += w[k] * v[c];
  }
  return dot(query, pooled);
}

double infer_similarity(std::span<const double> query, const Matrix& context) {
  if (query.size() != context.cols()) throw ConfigError("query/context dimension mismatch");
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < context.rows(); ++k) best = std::max(best, dot(query, context.row(k)));
  return best;
}

double nll_loss(const Matrix& scores) {
  if (scores.rows() == 0 || scores.rows() != scores.cols())
    throw ValidationError("score matrix must be square and non-empty");
  double total = 0.0;
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    auto row = scores.row(i);
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double s : row) sum += std::exp(s - mx);
    total += mx + std::log(sum) - row[i];
  }
  return total / static_cast<double>(scores.rows());
}

std::span<const double> DenseIndex::code(std::size_t entry, int k) const {
  const auto d = static_cast<std::size_t>(dimension);
  const auto offset = (entry * static_cast<std::size_t>(num_codes) + static_cast<std::size_t>(k)) * d;
  return {values.data() + offset, d};
}

Matrix DenseIndex::entry(std::size_t i) const {
  Matrix m(static_cast<std::size_t>(num_codes), static_cast<std::size_t>(dimension));
  for (int k = 0; k < num_codes; ++k) {
    auto src = code(i, k);
    std::copy(src.begin(), src.end(), m.row(static_cast<std::size_t>(k)).begin());
  }
  return m;
}

namespace {

constexpr char kDenseMagic[8] = {'B', 'R', 'D', 'E', 'N', 'S', 'E', '1'};

static_assert(std::endian::native == std::endian::little,
              "index files are little-endian; add byte swapping for this platform");

template <typename T>
void put(std::string& out, const T& v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

void put_string(std::string& out, const std::string& s) {
  put(out, static_cast<std::uint32_t>(s.size()));
  out += s;
}

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string get_string() {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }

  void read_doubles(std::span<double> out) {
    need(out.size() * sizeof(double));
    std::memcpy(out.data(), data_.data() + pos_, out.size() * sizeof(double));
    pos_ += out.size() * sizeof(double);
  }

  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw DataError("truncated dense index file");
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

std::string serialize_index(const DenseIndex& index) {
  std::string out(kDenseMagic, sizeof(kDenseMagic));
  put(out, DenseIndex::kFormatVersion);
  put(out, static_cast<std::uint32_t>(index.dimension));
  put(out, static_cast<std::uint32_t>(index.num_codes));
  put(out, static_cast<std::uint64_t>(index.refs.size()));
  put_string(out, index.embedder_id);
  put(out, index.codes_checksum);
  for (const auto& r : index.refs) put_string(out, r);
  out.append(reinterpret_cast<const char*>(index.values.data()),
             index.values.size() * sizeof(double));
  return out;
}

}  // namespace

std::uint64_t DenseIndex::checksum() const { return fnv1a64(serialize_index(*this)); }

void DenseIndex::save(const std::filesystem::path& path) const {
  auto out = internal::open_out(path);
  const auto bytes = serialize_index(*this);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

DenseIndex DenseIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < sizeof(kDenseMagic) ||
      std::memcmp(bytes.data(), kDenseMagic, sizeof(kDenseMagic)) != 0)
    throw DataError("not a dense index file: " + path.string());
  Reader r(std::string_view(bytes).substr(sizeof(kDenseMagic)));
  if (r.get<std::uint32_t>() != kFormatVersion) throw DataError("unsupported dense index version");
  DenseIndex index;
  index.dimension = static_cast<int>(r.get<std::uint32_t>());
  index.num_codes = static_cast<int>(r.get<std::uint32_t>());
  const auto count = r.get<std::uint64_t>();
  index.embedder_id = r.get_string();
  index.codes_checksum = r.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < count; ++i) index.refs.push_back(r.get_string());
  index.values.resize(count * static_cast<std::size_t>(index.num_codes) *
                      static_cast<std::size_t>(index.dimension));
  r.read_doubles(index.values);
  if (!r.done()) throw DataError("trailing bytes in dense index file");
  return index;
}

DenseIndex build_dense_index(std::span<const TextUnit> units, const EmbeddingProvider& provider,
                             const PolyDprModel& model) {
  if (provider.dimension() != model.dimension())
    throw ConfigError("embedding dimension " + std::to_string(provider.dimension()) +
                      " does not match model dimension " + std::to_string(model.dimension()));
  DenseIndex index;
  index.dimension = model.dimension();
  index.num_codes = model.num_codes();
  index.embedder_id = provider.id();
  index.codes_checksum = model.codes_checksum();
  index.values.reserve(units.size() * static_cast<std::size_t>(index.num_codes * index.dimension));
  std::set<std::string> seen;
  for (const auto& unit : units) {
    if (!seen.insert(unit.id).second) throw ValidationError("duplicate dense index ref: " + unit.id);
    const Matrix tokens = provider.token_vectors(unit.text);
    if (tokens.rows() == 0) throw ValidationError("unit " + unit.id + " has no tokens");
    const Matrix v = encode_context(tokens, model.codes);
    index.refs.push_back(unit.id);
    index.values.insert(index.values.end(), v.data().begin(), v.data().end());
  }
  return index;
}

DenseIndex build_dense_index(std::span<const Segment> segments, const EmbeddingProvider& provider,
                             const PolyDprModel& model) {
  std::vector<TextUnit> units;
  units.reserve(segments.size());
  for (const auto& s : segments) units.push_back({s.segment_id, s.text});
  return build_dense_index(std::span<const TextUnit>(units), provider, model);
}

std::vector<ScoredHit> search_dense(const DenseIndex& index, std::span<const double> query,
                                    int top_k) {
  if (top_k < 1) throw ConfigError("top_k must be >= 1");
  if (index.size() == 0) return {};
  if (query.size() != static_cast<std::size_t>(index.dimension))
    throw ConfigError("query dimension does not match the index");
  std::vector<ScoredHit> hits;
  hits.reserve(index.size());
  for (std::size_t e = 0; e < index.size(); ++e) {
    double best = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < index.num_codes; ++k) best = std::max(best, dot(query, index.code(e, k)));
    hits.push_back({index.refs[e], best});
  }
  const auto k = std::min(hits.size(), static_cast<std::size_t>(top_k));
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(k), hits.end(),
                    hit_before);
  hits.resize(k);
  return hits;
}

std::vector<ScoredHit> search_dense(const DenseIndex& index, std::string_view query,
                                    const EmbeddingProvider& provider, const PolyDprModel& model,
                                    int top_k) {
  const auto q = model.project_query(provider.query_vector(query));
  return search_dense(index, q, top_k);
}

}  // namespace bioret
