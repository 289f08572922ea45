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

#ifndef BIORET_PIPELINE_HPP_
#define BIORET_PIPELINE_HPP_

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "bioret/eval.hpp"

namespace bioret {

/// Flat key=value settings. '#' starts a comment; blank lines are ignored.
class PipelineConfig {
 public:
  static PipelineConfig parse(std::string_view text);
  static PipelineConfig load(const std::filesystem::path& path);

  /// Later calls win, so command-line overrides are applied after load().
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get(const std::string& key, const std::string& fallback = "") const;
  int get_int(const std::string& key, int fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  /// Rejects unknown keys and values outside module ranges; relative paths
  /// are resolved against base_dir.
  void validate() const;

  const std::map<std::string, std::string>& values() const { return values_; }
  std::filesystem::path base_dir;

 private:
  std::map<std::string, std::string> values_;
};

/// Keys accepted by PipelineConfig::validate, with their defaults ("" = unset).
const std::map<std::string, std::string>& pipeline_defaults();

struct StageOutcome {
  std::string name;
  bool cached = false;
};

struct PipelineResult {
  std::filesystem::path work_dir;
  std::vector<StageOutcome> stages;
  std::map<std::string, EvalReport> reports;  // by method: bm25, dense, hybrid
  std::map<std::string, std::filesystem::path> runs;
};

/// Runs every stage needed for the configured methods in dependency order.
/// A stage is skipped when its manifest matches the current parameters and
/// input checksums and its outputs are intact. Failures surface as StageError.
PipelineResult run_pipeline(const PipelineConfig& config, std::ostream* log = nullptr);

/// 64-bit content checksum of a file, as 16 hex digits.
std::string file_checksum(const std::filesystem::path& path);

}  // namespace bioret

#endif  // BIORET_PIPELINE_HPP_
