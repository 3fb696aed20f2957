/* Copyright 2026 The graphscan Authors. All Rights Reserved.

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

#ifndef GRAPHSCAN_ERRORS_H_
#define GRAPHSCAN_ERRORS_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace graphscan {

// Error categories surfaced by the core. The C API maps these one-to-one
// onto GS_Code values, so the order here is part of the ABI.
enum class ErrorCode {
  kNotFound = 1,
  kUnrecognized,
  kParseError,
  kTooLarge,  // A ParseError subtype: input exceeds the size guard.
  kNoServableMetaGraph,
  kRuleParseError,
  kDuplicateRule,
  kUnknownNode,
  kDigestOverflow,
  kTimeout,
  kHttpError,
  kAuthMissing,
  kUnknownChainId,
  kInvalidArgument,
  kInternal,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

  // TooLarge inputs are parse failures as far as callers are concerned.
  bool IsParseError() const {
    return code_ == ErrorCode::kParseError || code_ == ErrorCode::kTooLarge;
  }

 private:
  ErrorCode code_;
};

class HttpError : public Error {
 public:
  // status == 0 means the request never produced an HTTP response.
  HttpError(int status, const std::string& message)
      : Error(ErrorCode::kHttpError, message), status_(status) {}

  int status() const { return status_; }

 private:
  int status_;
};

}  // namespace graphscan

#endif  // GRAPHSCAN_ERRORS_H_
