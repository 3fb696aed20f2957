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

// Static loading of SavedModel directories and standalone GraphDef files.
// Loading never executes the model: bytes are decoded with the vendored
// protobuf schema and converted into graphscan::Graph values. Weights under
// `variables/` and files under `assets/` are never opened.
//
// All functions throw graphscan::Error on failure.

#ifndef GRAPHSCAN_MODEL_LOADER_H_
#define GRAPHSCAN_MODEL_LOADER_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "graphscan/graph.h"

namespace graphscan {

inline constexpr uint64_t kMaxModelFileBytes = uint64_t{1} << 30;
inline constexpr std::string_view kSavedModelFileName = "saved_model.pb";
inline constexpr std::string_view kServeTag = "serve";

struct LoadOptions {
  // Files larger than this are refused with ErrorCode::kTooLarge.
  uint64_t max_file_bytes = kMaxModelFileBytes;
};

// Directory check first, then a binary GraphDef parse, then a text parse.
// Throws kNotFound or kUnrecognized.
ModelFormat DetectFormat(const std::filesystem::path& path,
                         const LoadOptions& options = {});

ModelBundle LoadSavedModel(const std::filesystem::path& path,
                           const LoadOptions& options = {});

ModelBundle LoadGraphDef(const std::filesystem::path& path,
                         const LoadOptions& options = {});

// DetectFormat followed by the matching loader.
ModelBundle LoadModel(const std::filesystem::path& path,
                      const LoadOptions& options = {});

const Graph* ResolveFunction(const FunctionTable& table, std::string_view name);

// `name`, `name:3` or `^name` as found in GraphDef.node.input. Control inputs
// are reported through `is_control`. Throws kParseError on an empty suffix.
InputRef ParseGraphInput(std::string_view text, bool* is_control);

// FunctionDef.node_def input syntax: `arg`, `node:output_arg:3`, `^node`.
InputRef ParseFunctionInput(std::string_view text, bool* is_control);

}  // namespace graphscan

#endif  // GRAPHSCAN_MODEL_LOADER_H_
