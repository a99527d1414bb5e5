/* Copyright 2026 The dagplace Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dagplace {

enum class ErrorCode {
  kCycleDetected,
  kDanglingEdge,
  kDuplicateEdge,
  kSelfLoop,
  kInvalidNodeIds,
  kTypeIndexOutOfRange,
  kShapeMismatch,
  kNonScalarLoss,
  kMissingCost,
  kNonPositiveLatency,
  kTooLarge,
  kEmptyBuffer,
  kInvalidConfig,
  kParse,
  kIo,
};

inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kCycleDetected: return "CycleDetected";
    case ErrorCode::kDanglingEdge: return "DanglingEdge";
    case ErrorCode::kDuplicateEdge: return "DuplicateEdge";
    case ErrorCode::kSelfLoop: return "SelfLoop";
    case ErrorCode::kInvalidNodeIds: return "InvalidNodeIds";
    case ErrorCode::kTypeIndexOutOfRange: return "TypeIndexOutOfRange";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kNonScalarLoss: return "NonScalarLoss";
    case ErrorCode::kMissingCost: return "MissingCost";
    case ErrorCode::kNonPositiveLatency: return "NonPositiveLatency";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kEmptyBuffer: return "EmptyBuffer";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kParse: return "ParseError";
    case ErrorCode::kIo: return "IoError";
  }
  return "Unknown";
}

// All library failures surface as this exception; code() identifies the kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dagplace
