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

#ifndef BIORET_ERROR_HPP_
#define BIORET_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bioret {

// Base class for every error raised by the library. The CLI maps the
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters or configuration (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data (CLI exit code 3).
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public DataError {
 public:
  using DataError::DataError;
};

class LookupError : public DataError {
 public:
  using DataError::DataError;
};

// A pipeline stage failed (CLI exit code 4).
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& cause)
      : Error("stage '" + stage + "' failed: " + cause), stage_(std::move(stage)) {}

  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace bioret

#endif  // BIORET_ERROR_HPP_
