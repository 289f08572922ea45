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

#include "bioret/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "bioret/corpus.hpp"
#include "bioret/embedding.hpp"
#include "bioret/error.hpp"
#include "bioret/fusion.hpp"
#include "bioret/lexical.hpp"
#include "bioret/polydpr.hpp"
#include "bioret/pretrain.hpp"
#include "bioret/random.hpp"
#include "bioret/templates.hpp"
#include "bioret/text.hpp"
#include "bioret/trainer.hpp"
#include "jsonl.hpp"

namespace bioret {

namespace fs = std::filesystem;
using json = nlohmann::json;

const std::map<std::string, std::string>& pipeline_defaults() {
  static const std::map<std::string, std::string> defaults = {
      {"corpus", ""},
      {"queries", ""},
      {"qrels", ""},
      {"questions", ""},
      {"lexicon", ""},
      {"abbreviations", ""},
      {"vectors", ""},
      {"work_dir", "bioret-work"},
      {"methods", "bm25,dense,hybrid"},
      {"unit_kind", "two-sent"},
      {"token_budget", "0"},
      {"include_title", "false"},
      {"k1", "0.9"},
      {"b", "0.4"},
      {"top_k", "100"},
      {"doc_top_n", "100"},
      {"cutoff", "10"},
      {"pretrain_task", "rsm"},
      {"etm_m", "10"},
      {"rsm_m", "8"},
      {"finetune", "tempqg"},
      {"tempqg_setting", "short"},
      {"df_threshold", "5"},
      {"cluster_threshold", "0.75"},
      {"representative", "smallest"},
      {"n_templates", "10"},
      {"k", "6"},
      {"dim", "64"},
      {"nnz", "4"},
      {"embed_seed", "0"},
      {"projection_scale", "40"},
      {"learning_rate", "1.0"},
      {"projection_learning_rate", "100"},
      {"epochs", "8"},
      {"batch", "32"},
      {"schedule", "sequential"},
      {"seed", "1"},
  };
  return defaults;
}

namespace {

std::string checksum_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_lower(item));
  }
  return out;
}

}  // namespace

std::string file_checksum(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return checksum_hex(fnv1a64(ss.str()));
}

PipelineConfig PipelineConfig::parse(std::string_view text) {
  PipelineConfig config;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    config.set(key, trim(line.substr(eq + 1)));
  }
  return config;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  auto config = parse(ss.str());
  config.base_dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  return config;
}

void PipelineConfig::set(const std::string& key, const std::string& value) { values_[key] = value; }

std::string PipelineConfig::get(const std::string& key, const std::string& fallback) const {
  if (auto it = values_.find(key); it != values_.end()) return it->second;
  if (auto it = pipeline_defaults().find(key); it != pipeline_defaults().end() && !it->second.empty())
    return it->second;
  return fallback;
}

int PipelineConfig::get_int(const std::string& key, int fallback) const {
  const auto s = get(key);
  if (s.empty()) return fallback;
  try {
    std::size_t used = 0;
    int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' expects an integer, got '" + s + "'");
  }
}

double PipelineConfig::get_double(const std::string& key, double fallback) const {
  const auto s = get(key);
  if (s.empty()) return fallback;
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' expects a number, got '" + s + "'");
  }
}

bool PipelineConfig::get_bool(const std::string& key, bool fallback) const {
  const auto s = to_lower(get(key));
  if (s.empty()) return fallback;
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("config key '" + key + "' expects a boolean, got '" + s + "'");
}

void PipelineConfig::validate() const {
  for (const auto& [key, value] : values_)
    if (!pipeline_defaults().count(key)) throw ConfigError("unknown config key '" + key + "'");

  const auto methods = split_list(get("methods"));
  if (methods.empty()) throw ConfigError("methods must name at least one of bm25, dense, hybrid");
  for (const auto& m : methods)
    if (m != "bm25" && m != "dense" && m != "hybrid") throw ConfigError("unknown method '" + m + "'");

  auto require_file = [&](const std::string& key) {
    const auto value = get(key);
    if (value.empty()) throw ConfigError("config key '" + key + "' is required");
    const fs::path p = base_dir / value;
    if (!fs::exists(p)) throw ConfigError("config key '" + key + "': no such file " + p.string());
  };
  require_file("corpus");
  require_file("queries");
  require_file("qrels");
  for (const auto* key : {"abbreviations", "vectors"})
    if (!get(key).empty()) require_file(key);

  parse_unit_kind(get("unit_kind"));
  if (get_int("token_budget", 0) < 0) throw ConfigError("token_budget must be >= 0");
  get_bool("include_title", false);
  if (get_double("k1", 0.9) < 0.0) throw ConfigError("k1 must be >= 0");
  const double b = get_double("b", 0.4);
  if (b < 0.0 || b > 1.0) throw ConfigError("b must be in [0, 1]");
  for (const auto* key : {"top_k", "doc_top_n", "cutoff", "k", "dim", "nnz", "batch", "n_templates",
                          "etm_m", "rsm_m", "df_threshold"})
    if (get_int(key, 1) < 1) throw ConfigError(std::string(key) + " must be >= 1");
  if (get_int("batch", 32) < 2) throw ConfigError("batch must be >= 2 for in-batch negatives");
  if (get_int("epochs", 0) < 0) throw ConfigError("epochs must be >= 0");
  if (!(get_double("learning_rate", 1.0) > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(get_double("projection_learning_rate", 0.0) >= 0.0))
    throw ConfigError("projection_learning_rate must be >= 0");
  if (!(get_double("projection_scale", 1.0) > 0.0)) throw ConfigError("projection_scale must be > 0");
  const double threshold = get_double("cluster_threshold", 0.75);
  if (!(threshold > 0.0 && threshold <= 1.0)) throw ConfigError("cluster_threshold must be in (0, 1]");
  get_int("seed", 1);
  get_int("embed_seed", 0);
  parse_representative(get("representative"));
  parse_schedule(get("schedule"));

  const auto task = to_lower(get("pretrain_task"));
  if (task != "none") {
    const auto t = parse_task(task);
    if (t != Task::kEtm && t != Task::kRsm && t != Task::kIct)
      throw ConfigError("pretrain_task must be etm, rsm, ict or none");
  }
  const auto finetune = to_lower(get("finetune"));
  if (finetune != "tempqg" && finetune != "none") throw ConfigError("finetune must be tempqg or none");
  const auto setting = to_lower(get("tempqg_setting"));
  if (setting != "short" && setting != "long") throw ConfigError("tempqg_setting must be short or long");
  const bool dense = std::count(methods.begin(), methods.end(), "bm25") != static_cast<long>(methods.size());
  if (dense && finetune == "tempqg") {
    require_file("questions");
    require_file("lexicon");
  }
}

namespace {

// One cached unit of work. Inputs and outputs are files; params captures
// every setting that changes the outputs.
struct StageSpec {
  explicit StageSpec(std::string n) : name(std::move(n)) {}

  std::string name;
  json params = json::object();
  std::vector<std::pair<std::string, fs::path>> inputs;
  std::vector<std::pair<std::string, fs::path>> outputs;
  std::function<void()> run;
};

class Runner {
 public:
  Runner(fs::path work_dir, std::ostream* log) : work_dir_(std::move(work_dir)), log_(log) {}

  fs::path dir(const std::string& stage) const { return work_dir_ / stage; }

  void run(const StageSpec& st, PipelineResult& result) {
    json manifest;
    manifest["stage"] = st.name;
    manifest["tool"] = "bioret 0.1.0";
    manifest["params"] = st.params;
    json inputs = json::object();
    for (const auto& [name, path] : st.inputs) inputs[name] = file_checksum(path);
    manifest["inputs"] = inputs;

    const fs::path manifest_path = dir(st.name) / "manifest.json";
    if (auto cached = cached_manifest(manifest_path, manifest, st)) {
      if (log_) *log_ << "[" << st.name << "] cached\n";
      chain_.push_back(*cached);
      result.stages.push_back({st.name, true});
      return;
    }

    if (log_) *log_ << "[" << st.name << "] running\n";
    try {
      fs::create_directories(dir(st.name));
      st.run();
      json outputs = json::object();
      for (const auto& [name, path] : st.outputs) outputs[name] = file_checksum(path);
      manifest["outputs"] = outputs;
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(st.name, e.what());
    }
    auto out = internal::open_out(manifest_path);
    out << manifest.dump(2) << '\n';
    chain_.push_back(manifest);
    result.stages.push_back({st.name, false});
  }

  const json& chain() const { return chain_; }

 private:
  static std::optional<json> cached_manifest(const fs::path& path, const json& fresh,
                                             const StageSpec& st) {
    if (!fs::exists(path)) return std::nullopt;
    json old;
    try {
      std::ifstream in(path);
      old = json::parse(in);
    } catch (const std::exception&) {
      return std::nullopt;
    }
    for (const auto* key : {"stage", "tool", "params", "inputs"})
      if (!old.contains(key) || old[key] != fresh[key]) return std::nullopt;
    if (!old.contains("outputs")) return std::nullopt;
    for (const auto& [name, p] : st.outputs) {
      if (!fs::exists(p) || !old["outputs"].contains(name)) return std::nullopt;
      if (old["outputs"][name] != file_checksum(p)) return std::nullopt;
    }
    return old;
  }

  fs::path work_dir_;
  std::ostream* log_;
  json chain_ = json::array();
};

std::map<std::string, std::string> segment_doc_map(const fs::path& segments_path) {
  std::map<std::string, std::string> out;
  for (const auto& s : load_segments(segments_path)) out[s.segment_id] = s.doc_id;
  return out;
}

Run aggregate_run(const Run& segment_run, const std::map<std::string, std::string>& seg_to_doc,
                  int top_n) {
  Run out;
  for (const auto& [qid, list] : segment_run) out[qid] = aggregate_documents(list, seg_to_doc, top_n);
  return out;
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config, std::ostream* log) {
  config.validate();
  const auto path_of = [&](const std::string& key) { return config.base_dir / config.get(key); };
  const fs::path work = config.base_dir / config.get("work_dir");

  const auto methods = split_list(config.get("methods"));
  auto wants = [&](const char* m) { return std::find(methods.begin(), methods.end(), m) != methods.end(); };
  const bool need_bm25 = wants("bm25") || wants("hybrid");
  const bool need_dense = wants("dense") || wants("hybrid");

  PipelineResult result;
  result.work_dir = work;
  Runner runner(work, log);

  const fs::path corpus = path_of("corpus");
  const fs::path queries = path_of("queries");
  const fs::path qrels = path_of("qrels");
  const std::string seed_str = config.get("seed");
  const auto seed = static_cast<std::uint64_t>(config.get_int("seed", 1));
  const int top_k = config.get_int("top_k", 100);
  const int doc_top_n = config.get_int("doc_top_n", 100);

  std::optional<SentenceSplitter> splitter;
  if (!config.get("abbreviations").empty()) splitter = SentenceSplitter::from_file(path_of("abbreviations"));
  const SentenceSplitter* splitter_ptr = splitter ? &*splitter : nullptr;

  // segment
  const fs::path segments = runner.dir("segment") / "segments.jsonl";
  {
    StageSpec s("segment");
    s.params = {{"unit_kind", config.get("unit_kind")},
                {"token_budget", config.get_int("token_budget", 0)},
                {"include_title", config.get_bool("include_title", false)}};
    s.inputs = {{"corpus", corpus}};
    if (splitter) s.inputs.push_back({"abbreviations", path_of("abbreviations")});
    s.outputs = {{"segments", segments}};
    s.run = [&] {
      SegmentOptions opt;
      opt.kind = parse_unit_kind(config.get("unit_kind"));
      opt.token_budget = config.get_int("token_budget", 0);
      opt.include_title = config.get_bool("include_title", false);
      opt.splitter = splitter_ptr;
      const auto docs = load_corpus(corpus);
      write_segments(segments, segment_corpus(docs, opt));
    };
    runner.run(s, result);
  }

  // stats (document level; feeds the pre-training generators)
  const fs::path stats = runner.dir("stats") / "stats.json";
  {
    StageSpec s("stats");
    s.inputs = {{"corpus", corpus}};
    s.outputs = {{"stats", stats}};
    s.run = [&] {
      const auto docs = load_corpus(corpus);
      write_stats(stats, compute_stats(std::span<const Document>(docs)));
    };
    runner.run(s, result);
  }

  if (need_bm25) {
    const fs::path index = runner.dir("bm25-index") / "bm25.json";
    StageSpec s("bm25-index");
    s.params = {{"k1", config.get_double("k1", 0.9)}, {"b", config.get_double("b", 0.4)}};
    s.inputs = {{"segments", segments}};
    s.outputs = {{"index", index}};
    s.run = [&] {
      Bm25Params p{config.get_double("k1", 0.9), config.get_double("b", 0.4)};
      const auto segs = load_segments(segments);
      Bm25Index::build(std::span<const Segment>(segs), p).save(index);
    };
    runner.run(s, result);

    const fs::path run_path = runner.dir("bm25-search") / "run.trec";
    StageSpec q("bm25-search");
    q.params = {{"top_k", top_k}, {"doc_top_n", doc_top_n}};
    q.inputs = {{"index", index}, {"queries", queries}, {"segments", segments}};
    q.outputs = {{"run", run_path}};
    q.run = [&] {
      const auto idx = Bm25Index::load(index);
      Run seg_run;
      for (const auto& query : load_questions(queries))
        seg_run[query.id] = RunList{query.id, idx.search(query.text, top_k), "bm25"};
      write_trec_run(run_path, aggregate_run(seg_run, segment_doc_map(segments), doc_top_n));
    };
    runner.run(q, result);
    result.runs["bm25"] = run_path;
  }

  if (need_dense) {
    const auto task_name_cfg = to_lower(config.get("pretrain_task"));
    const bool finetune = to_lower(config.get("finetune")) == "tempqg";

    std::optional<fs::path> pretrain_pairs;
    if (task_name_cfg != "none") {
      pretrain_pairs = runner.dir("pretrain") / "pairs.jsonl";
      const Task task = parse_task(task_name_cfg);
      StageSpec s("pretrain");
      s.params = {{"task", std::string(task_name(task))},
                  {"etm_m", config.get_int("etm_m", 10)},
                  {"rsm_m", config.get_int("rsm_m", 8)},
                  {"seed", seed_str}};
      s.inputs = {{"corpus", corpus}, {"stats", stats}};
      if (splitter) s.inputs.push_back({"abbreviations", path_of("abbreviations")});
      s.outputs = {{"pairs", *pretrain_pairs}};
      s.run = [&, task] {
        const auto docs = load_corpus(corpus);
        const auto st = load_stats(stats);
        PairBatch batch;
        switch (task) {
          case Task::kEtm: batch = build_etm_pairs(docs, st, config.get_int("etm_m", 10)); break;
          case Task::kRsm:
            batch = build_rsm_pairs(docs, st, config.get_int("rsm_m", 8), config.get_int("etm_m", 10),
                                    splitter_ptr);
            break;
          default: batch = build_ict_pairs(docs, seed, splitter_ptr); break;
        }
        write_pairs(*pretrain_pairs, batch.pairs);
      };
      runner.run(s, result);
    }

    std::optional<fs::path> main_pairs;
    if (finetune) {
      const fs::path templates = runner.dir("templates") / "templates.jsonl";
      const fs::path pool = runner.dir("templates") / "pool.jsonl";
      StageSpec t("templates");
      t.params = {{"df_threshold", config.get_int("df_threshold", 5)},
                  {"cluster_threshold", config.get_double("cluster_threshold", 0.75)},
                  {"representative", config.get("representative")}};
      t.inputs = {{"questions", path_of("questions")}, {"lexicon", path_of("lexicon")}};
      t.outputs = {{"templates", templates}, {"pool", pool}};
      t.run = [&] {
        const auto lexicon = EntityLexicon::load(path_of("lexicon"));
        const auto extracted = extract_templates(load_questions(path_of("questions")), lexicon,
                                                 config.get_int("df_threshold", 5));
        const auto clusters = cluster_templates(extracted, config.get_double("cluster_threshold", 0.75));
        write_template_pool(templates, extracted);
        write_template_pool(pool, representative_pool(extracted, clusters,
                                                      parse_representative(config.get("representative"))));
      };
      runner.run(t, result);

      const fs::path generated = runner.dir("questions") / "generated.jsonl";
      StageSpec g("questions");
      g.params = {{"n_templates", config.get_int("n_templates", 10)}, {"scorer", "lexical"}};
      g.inputs = {{"segments", segments}, {"pool", pool}, {"lexicon", path_of("lexicon")}};
      g.outputs = {{"questions", generated}};
      g.run = [&] {
        const auto pool_t = load_template_pool(pool);
        const auto lexicon = EntityLexicon::load(path_of("lexicon"));
        LexicalTemplateScorer scorer(pool_t);
        write_generated_questions(generated, generate_questions(load_segments(segments), pool_t, scorer,
                                                                lexicon, config.get_int("n_templates", 10)));
      };
      runner.run(g, result);

      main_pairs = runner.dir("tempqg") / "pairs.jsonl";
      const bool long_setting = to_lower(config.get("tempqg_setting")) == "long";
      StageSpec p("tempqg");
      p.params = {{"setting", long_setting ? "long" : "short"}};
      p.inputs = {{"questions", generated}, {"segments", segments}};
      if (long_setting) p.inputs.push_back({"corpus", corpus});
      p.outputs = {{"pairs", *main_pairs}};
      p.run = [&, long_setting] {
        std::vector<Document> docs;
        if (long_setting) docs = load_corpus(corpus);
        write_pairs(*main_pairs,
                    tempqg_pairs(load_generated_questions(generated), load_segments(segments), docs).pairs);
      };
      runner.run(p, result);
    }

    std::unique_ptr<EmbeddingProvider> provider;
    const bool external = !config.get("vectors").empty();
    if (external)
      provider = std::make_unique<VectorFileProvider>(VectorFileProvider::load(path_of("vectors")));
    else
      provider = std::make_unique<HashingEmbedder>(config.get_int("dim", 64),
                                                   static_cast<std::uint64_t>(config.get_int("embed_seed", 0)),
                                                   config.get_int("nnz", 4));

    const fs::path model_path = runner.dir("train") / "model.json";
    {
      StageSpec s("train");
      s.params = {{"k", config.get_int("k", 6)},
                  {"embedder", provider->id()},
                  {"projection_scale", config.get_double("projection_scale", 40.0)},
                  {"learning_rate", config.get_double("learning_rate", 1.0)},
                  {"projection_learning_rate", config.get_double("projection_learning_rate", 100.0)},
                  {"epochs", config.get_int("epochs", 8)},
                  {"batch", config.get_int("batch", 32)},
                  {"schedule", to_lower(config.get("schedule"))},
                  {"seed", seed_str}};
      if (pretrain_pairs) s.inputs.push_back({"pretrain_pairs", *pretrain_pairs});
      if (main_pairs) s.inputs.push_back({"pairs", *main_pairs});
      if (external) s.inputs.push_back({"vectors", path_of("vectors")});
      s.outputs = {{"model", model_path}};
      s.run = [&] {
        auto model = PolyDprModel::initialize(config.get_int("k", 6), provider->dimension(), seed,
                                              config.get_double("projection_scale", 40.0));
        std::vector<TrainingPair> main, pre;
        if (main_pairs) main = load_pairs(*main_pairs);
        if (pretrain_pairs) pre = load_pairs(*pretrain_pairs);
        if (main.empty()) std::swap(main, pre);  // a single task trains as the main task
        model.provenance["embedder"] = provider->id();
        if (main.empty()) {
          model.provenance["training"] = "untrained";
        } else {
          TrainConfig tc;
          tc.learning_rate = config.get_double("learning_rate", 1.0);
          tc.projection_learning_rate = config.get_double("projection_learning_rate", 100.0);
          tc.epochs = config.get_int("epochs", 8);
          tc.batch_size = config.get_int("batch", 32);
          tc.seed = seed;
          tc.schedule = parse_schedule(config.get("schedule"));
          const auto report = train(model, *provider, tc, main, pre);
          model.provenance["training"] = pre.empty() ? "single-task" : to_lower(config.get("schedule"));
          model.provenance["steps"] = std::to_string(report.steps);
          model.provenance["pairs"] = std::to_string(main.size() + pre.size());
        }
        model.save(model_path);
      };
      runner.run(s, result);
    }

    const fs::path index = runner.dir("dense-index") / "dense.idx";
    {
      StageSpec s("dense-index");
      s.params = {{"embedder", provider->id()}};
      s.inputs = {{"segments", segments}, {"model", model_path}};
      if (external) s.inputs.push_back({"vectors", path_of("vectors")});
      s.outputs = {{"index", index}};
      s.run = [&] {
        const auto model = PolyDprModel::load(model_path);
        const auto segs = load_segments(segments);
        build_dense_index(std::span<const Segment>(segs), *provider, model).save(index);
      };
      runner.run(s, result);
    }

    const fs::path run_path = runner.dir("dense-search") / "run.trec";
    {
      StageSpec s("dense-search");
      s.params = {{"top_k", top_k}, {"doc_top_n", doc_top_n}, {"embedder", provider->id()}};
      s.inputs = {{"index", index}, {"model", model_path}, {"queries", queries}, {"segments", segments}};
      if (external) s.inputs.push_back({"vectors", path_of("vectors")});
      s.outputs = {{"run", run_path}};
      s.run = [&] {
        const auto model = PolyDprModel::load(model_path);
        const auto idx = DenseIndex::load(index);
        Run seg_run;
        for (const auto& query : load_questions(queries))
          seg_run[query.id] = RunList{query.id, search_dense(idx, query.text, *provider, model, top_k), "dense"};
        write_trec_run(run_path, aggregate_run(seg_run, segment_doc_map(segments), doc_top_n));
      };
      runner.run(s, result);
    }
    result.runs["dense"] = run_path;
  }

  if (wants("hybrid")) {
    const fs::path run_path = runner.dir("hybrid") / "run.trec";
    StageSpec s("hybrid");
    s.inputs = {{"bm25_run", result.runs.at("bm25")}, {"dense_run", result.runs.at("dense")}};
    s.outputs = {{"run", run_path}};
    s.run = [&] {
      const auto a = load_trec_run(result.runs.at("bm25"));
      const auto b = load_trec_run(result.runs.at("dense"));
      Run fused;
      for (const auto& [qid, list] : a) {
        auto it = b.find(qid);
        fused[qid] = hybrid_fuse(list, it == b.end() ? RunList{qid, {}, "dense"} : it->second);
      }
      for (const auto& [qid, list] : b)
        if (!fused.count(qid)) fused[qid] = hybrid_fuse(RunList{qid, {}, "bm25"}, list);
      write_trec_run(run_path, fused);
    };
    runner.run(s, result);
    result.runs["hybrid"] = run_path;
  }

  // eval: one report per requested method, each embedding the manifest chain so far.
  {
    StageSpec s("eval");
    const int cutoff = config.get_int("cutoff", 10);
    s.params = {{"cutoff", cutoff}, {"methods", methods}};
    s.inputs = {{"qrels", qrels}};
    for (const auto& m : methods) {
      s.inputs.push_back({m + "_run", result.runs.at(m)});
      s.outputs.push_back({m, runner.dir("eval") / (m + ".json")});
    }
    const std::string chain = runner.chain().dump();
    s.run = [&] {
      const auto q = load_qrels(qrels);
      for (const auto& m : methods)
        write_eval_report(runner.dir("eval") / (m + ".json"),
                          evaluate_run(load_trec_run(result.runs.at(m)), q, cutoff), chain);
    };
    runner.run(s, result);
    const auto q = load_qrels(qrels);
    for (const auto& m : methods) result.reports[m] = evaluate_run(load_trec_run(result.runs.at(m)), q, cutoff);
  }
  return result;
}

}  // namespace bioret
