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

#include "graphscan/errors.h"

namespace graphscan {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound:
      return "NotFound";
    case ErrorCode::kUnrecognized:
      return "Unrecognized";
    case ErrorCode::kParseError:
      return "ParseError";
    case ErrorCode::kTooLarge:
      return "TooLarge";
    case ErrorCode::kNoServableMetaGraph:
      return "NoServableMetaGraph";
    case ErrorCode::kRuleParseError:
      return "RuleParseError";
    case ErrorCode::kDuplicateRule:
      return "DuplicateRule";
    case ErrorCode::kUnknownNode:
      return "UnknownNode";
    case ErrorCode::kDigestOverflow:
      return "DigestOverflow";
    case ErrorCode::kTimeout:
      return "Timeout";
    case ErrorCode::kHttpError:
      return "HttpError";
    case ErrorCode::kAuthMissing:
      return "AuthMissing";
    case ErrorCode::kUnknownChainId:
      return "UnknownChainId";
    case ErrorCode::kInvalidArgument:
      return "InvalidArgument";
    case ErrorCode::kInternal:
      return "Internal";
  }
  return "Unknown";
}

}  // namespace graphscan
