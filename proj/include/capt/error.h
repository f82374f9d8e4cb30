// Copyright 2026 The CAPT Toolkit Authors.
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
#include <string_view>

namespace capt {

// Error kinds are part of the observable contract: the CLI prints
// to_string(kind) in its structured stderr line.
enum class ErrorKind {
  kStateSpaceTooLarge,
  kCyclicGraph,
  kInvalidModel,
  kZeroProbabilityEvidence,
  kUnknownVariable,
  kOutOfRangeState,
  kRoleShapeMismatch,
  kMissingDataField,
  kUndecidableQuery,
  kEventNotFound,
  kEndpointError,
  kTimeout,
  kExtractionFailed,
  kUncoveredPlaceholder,
  kAmbiguousCode,
  kJournalMismatch,
  kIoError,
  kParseError,
  kEventFreedomViolation,
  kExistsError,
  kInvalidArgument,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, int attempts = 0)
      : std::runtime_error(message), kind_(kind), attempts_(attempts) {}

  ErrorKind kind() const { return kind_; }
  // Number of attempts made before giving up (transport and retry loops).
  int attempts() const { return attempts_; }

 private:
  ErrorKind kind_;
  int attempts_;
};

}  // namespace capt
