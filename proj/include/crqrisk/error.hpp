// Copyright 2026 The crqrisk Authors.
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

#ifndef CRQRISK_ERROR_HPP_
#define CRQRISK_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace crqrisk {

enum class ErrorCode {
  kMissingId,
  kUnknownRiskLevel,
  kEmptyQaMap,
  kInvalidImportance,
  kInvalidDataset,
  kInvalidConfig,
  kParseError,
  kValidationError,
  kSchemaMismatch,
  kAllMissingFeature,
  kTooFewMinority,
  kMissingValuesPresent,
  kSingleClassDataset,
  kEmptyDataset,
  kTooManyMembers,
  kEmptySample,
  kInvalidAlpha,
  kOutOfRange,
  kEmptyEnsemble,
  kNoPendingItem,
  kDuplicateVerdict,
  kSingleClassValidation,
  kZeroCrq,
  kNoActiveModel,
  kUnknownVersion,
  kTrainingFailed,
  kIoError,
};

constexpr std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMissingId: return "MissingId";
    case ErrorCode::kUnknownRiskLevel: return "UnknownRiskLevel";
    case ErrorCode::kEmptyQaMap: return "EmptyQaMap";
    case ErrorCode::kInvalidImportance: return "InvalidImportance";
    case ErrorCode::kInvalidDataset: return "InvalidDataset";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kValidationError: return "ValidationError";
    case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
    case ErrorCode::kAllMissingFeature: return "AllMissingFeature";
    case ErrorCode::kTooFewMinority: return "TooFewMinority";
    case ErrorCode::kMissingValuesPresent: return "MissingValuesPresent";
    case ErrorCode::kSingleClassDataset: return "SingleClassDataset";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kTooManyMembers: return "TooManyMembers";
    case ErrorCode::kEmptySample: return "EmptySample";
    case ErrorCode::kInvalidAlpha: return "InvalidAlpha";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kEmptyEnsemble: return "EmptyEnsemble";
    case ErrorCode::kNoPendingItem: return "NoPendingItem";
    case ErrorCode::kDuplicateVerdict: return "DuplicateVerdict";
    case ErrorCode::kSingleClassValidation: return "SingleClassValidation";
    case ErrorCode::kZeroCrq: return "ZeroCrq";
    case ErrorCode::kNoActiveModel: return "NoActiveModel";
    case ErrorCode::kUnknownVersion: return "UnknownVersion";
    case ErrorCode::kTrainingFailed: return "TrainingFailed";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

/// Domain error carrying a stable code; what() reads "<Code>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace crqrisk

#endif  // CRQRISK_ERROR_HPP_
