// Copyright 2026 The geolayout Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace geolayout {

// Base of every error raised by the library.
class LayoutError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The cluster description violates a structural invariant (bad factors,
// duplicate node ids, partition bits out of range...).
class InvalidSpecError : public LayoutError {
 public:
  using LayoutError::LayoutError;
};

// No assignment satisfies the replication, scattering and capacity
// constraints, even with a partition size of one unit.
class InfeasibleError : public LayoutError {
 public:
  static constexpr const char* kDiagnostic =
      "capacities too small or constraints too strong";

  explicit InfeasibleError(const std::string& detail)
      : LayoutError(std::string(kDiagnostic) + ": " + detail) {}
};

// Two inputs that must describe the same universe do not (different
// partition counts, different flow network topologies).
class IncompatibleError : public LayoutError {
 public:
  using LayoutError::LayoutError;
};

// A cycle was applied to a flow in which one of its arcs has no residual
// capacity left.
class StaleCycleError : public LayoutError {
 public:
  using LayoutError::LayoutError;
};

// The brute-force oracle refuses instances outside its enumeration range.
class OracleGuardError : public LayoutError {
 public:
  using LayoutError::LayoutError;
};

// Malformed input document or unreadable file.
class FormatError : public LayoutError {
 public:
  using LayoutError::LayoutError;
};

}  // namespace geolayout
