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

#ifndef BIORET_SRC_JSONL_HPP_
#define BIORET_SRC_JSONL_HPP_

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

#include <json.hpp>

#include "bioret/error.hpp"

namespace bioret::internal {

using json = nlohmann::json;

/// Calls `fn(object, line_number)` for every non-blank line. Malformed JSON
/// and non-object lines raise ParseError with the 1-based line number.
inline void for_each_jsonl(const std::filesystem::path& path,
                           const std::function<void(const json&, std::size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), lineno);
    }
    if (!obj.is_object()) throw ParseError("expected a JSON object", lineno);
    fn(obj, lineno);
  }
}

inline std::string required_string(const json& obj, const char* key, std::size_t lineno) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string("missing field \"") + key + "\"", lineno);
  if (!it->is_string()) throw ParseError(std::string("field \"") + key + "\" must be a string", lineno);
  return it->get<std::string>();
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

}  // namespace bioret::internal

#endif  // BIORET_SRC_JSONL_HPP_
