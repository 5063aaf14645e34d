// Copyright 2026 The Commitgen Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef COMMITGEN_ERRORS_H_
#define COMMITGEN_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace commitgen {

// Bad input data: malformed diffs, corpora, vocabularies or checkpoints.
// The CLI maps these to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A unified diff that cannot be parsed. `line()` is 1-based.
class DiffParseError : public DataError {
 public:
  DiffParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Tensor shapes disagree with the model configuration.
class ShapeError : public DataError {
 public:
  using DataError::DataError;
};

// A git invocation failed or a repository could not be read.
class RepositoryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Training produced a non-finite loss.
class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace commitgen

#endif  // COMMITGEN_ERRORS_H_
