// Copyright 2026 The primflow Authors. All Rights Reserved.
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


#include "primflow/core/error.h"

namespace primflow {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kCyclicGraph: return "CyclicGraph";
    case ErrorCode::kInvalidGraph: return "InvalidGraph";
    case ErrorCode::kConfigMissing: return "ConfigMissing";
    case ErrorCode::kInvalidMode: return "InvalidMode";
    case ErrorCode::kUnknownRoleKind: return "UnknownRoleKind";
    case ErrorCode::kEmptyProfile: return "EmptyProfile";
    case ErrorCode::kCapacityExceeded: return "CapacityExceeded";
    case ErrorCode::kEmptyBatch: return "EmptyBatch";
    case ErrorCode::kDuplicateQueryId: return "DuplicateQueryId";
    case ErrorCode::kUnknownNode: return "UnknownNode";
    case ErrorCode::kNonQuiescent: return "NonQuiescent";
    case ErrorCode::kConfigParse: return "ConfigParse";
    case ErrorCode::kUnknownApp: return "UnknownApp";
    case ErrorCode::kProfileMissing: return "ProfileMissing";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

}  // namespace primflow
