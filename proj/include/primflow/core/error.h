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

#ifndef PRIMFLOW_CORE_ERROR_H_
#define PRIMFLOW_CORE_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace primflow {

enum class ErrorCode {
  kCyclicGraph,
  kInvalidGraph,
  kConfigMissing,
  kInvalidMode,
  kUnknownRoleKind,
  kEmptyProfile,
  kCapacityExceeded,
  kEmptyBatch,
  kDuplicateQueryId,
  kUnknownNode,
  kNonQuiescent,
  kConfigParse,
  kUnknownApp,
  kProfileMissing,
  kIoFailure,
  kInternal,
};

std::string_view error_code_name(ErrorCode code);

// Every failure raised by the library carries one of the codes above; the
// CLI maps them to distinct exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace primflow

#endif  // PRIMFLOW_CORE_ERROR_H_
