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

// The static pipeline for one model: load, flatten, classify, gather string
// evidence, propagate taint, find chains, score and assemble the report.

#ifndef GRAPHSCAN_SCANNER_H_
#define GRAPHSCAN_SCANNER_H_

#include <filesystem>
#include <string>
#include <string_view>

#include "graphscan/chain_analyzer.h"
#include "graphscan/llm_triage.h"
#include "graphscan/model_loader.h"
#include "graphscan/op_taxonomy.h"
#include "graphscan/risk_report.h"

namespace graphscan {

std::string_view ToolVersion();

struct ScanOptions {
  int max_depth = kDefaultMaxInlineDepth;
  size_t max_nodes = kDefaultMaxFlatNodes;
  LoadOptions load;
};

struct ScanResult {
  ScanReport report;
  GraphDigest digest;  // Input for an optional triage pass.
};

// Throws the loader's errors (kNotFound, kUnrecognized, kParseError, ...).
ScanResult ScanModel(const std::filesystem::path& path, const RuleSet& rules,
                     const ScanOptions& options = {});

// The same pipeline over an already loaded bundle.
ScanResult ScanBundle(const ModelBundle& bundle, const RuleSet& rules,
                      const ScanOptions& options = {});

// One line per rule in rule order: op type, categories, confidence,
// predicate summary ("-" when ungated) and the quoted note. kJson renders an
// array of objects with the same fields; kSarif is rejected.
std::string RenderRules(const RuleSet& rules, ReportFormat format);

// 1 when `verdict` is at or above `threshold`, else 0.
int ExitCodeFor(Severity verdict, Severity threshold);

}  // namespace graphscan

#endif  // GRAPHSCAN_SCANNER_H_
