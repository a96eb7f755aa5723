// Copyright 2026 The detoracle Authors.
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

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace detoracle {

// Base for every failure the library reports. Validation findings on
// recordings are data (see Violation), not exceptions.
class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (not parseable as the expected document/record).
class ParseError : public OracleError {
 public:
  using OracleError::OracleError;
};

// Well-formed document with unknown keys or out-of-range values.
class SchemaError : public OracleError {
 public:
  using OracleError::OracleError;
};

// Degenerate or ill-conditioned geometric input.
class GeometryError : public OracleError {
 public:
  using OracleError::OracleError;
};

// A policy cannot be applied to the given data (e.g. missing latency).
class PolicyError : public OracleError {
 public:
  using OracleError::OracleError;
};

// Input recordings violate their invariants; details lists each finding.
class ValidationError : public OracleError {
 public:
  ValidationError(const std::string& what, std::vector<std::string> details)
      : OracleError(what), details_(std::move(details)) {}
  const std::vector<std::string>& details() const { return details_; }

 private:
  std::vector<std::string> details_;
};

}  // namespace detoracle
