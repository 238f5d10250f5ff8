// Copyright 2026 The ddsmc Authors
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

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ddsmc {

struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// An operation was called on a state that does not satisfy its precondition.
struct StateError : std::logic_error {
  using std::logic_error::logic_error;
};

/// Cholesky failure, non-finite intermediate, or an undefined expectation.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegeneracyError : std::runtime_error {
  DegeneracyError(std::size_t step, const std::string &what)
      : std::runtime_error(what), step(step) {}
  std::size_t step;
};

/// A proposal put mass on a choice the prior forbids.
struct InvalidProposal : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  ParseError(std::size_t line, const std::string &what)
      : std::runtime_error(what), line(line) {}
  std::size_t line;
};

/// A versioned file carries a version this build does not read.
struct VersionMismatch : ParseError {
  using ParseError::ParseError;
};

/// Well-formed file whose array shapes do not match what the reader expects.
struct DimensionMismatch : ParseError {
  using ParseError::ParseError;
};

struct TrainingDiverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A file could not be opened for reading or writing.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

} // namespace ddsmc
