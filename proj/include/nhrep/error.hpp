// Copyright 2026 The NH-Rep Authors.
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

namespace nhrep {

/// Every failure raised by the library carries one of these kinds. The CLI
/// prints the kind name as the machine-readable part of its error line.
enum class ErrorKind {
  kParse,
  kTopology,
  kLabel,
  kDegenerateGeometry,
  kQuota,
  kBoundaryEdge,
  kDecompositionFailure,
  kArityMismatch,
  kNonFiniteLoss,
  kEmptyLevelSet,
  kEmptySet,
  kNoFeatures,
  kOpenGroundTruth,
  kPrecondition,
  kIo,
  kFormat,
};

constexpr std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse: return "ParseError";
    case ErrorKind::kTopology: return "TopologyError";
    case ErrorKind::kLabel: return "LabelError";
    case ErrorKind::kDegenerateGeometry: return "DegenerateGeometry";
    case ErrorKind::kQuota: return "QuotaError";
    case ErrorKind::kBoundaryEdge: return "BoundaryEdge";
    case ErrorKind::kDecompositionFailure: return "DecompositionFailure";
    case ErrorKind::kArityMismatch: return "ArityMismatch";
    case ErrorKind::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::kEmptyLevelSet: return "EmptyLevelSet";
    case ErrorKind::kEmptySet: return "EmptySet";
    case ErrorKind::kNoFeatures: return "NoFeatures";
    case ErrorKind::kOpenGroundTruth: return "OpenGroundTruth";
    case ErrorKind::kPrecondition: return "PreconditionError";
    case ErrorKind::kIo: return "IoError";
    case ErrorKind::kFormat: return "FormatError";
  }
  return "Error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }
  std::string_view kind_name() const { return ErrorKindName(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace nhrep
