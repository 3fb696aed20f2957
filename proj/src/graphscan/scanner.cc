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

#include "graphscan/scanner.h"

#include <algorithm>
#include <utility>

#include "graphscan/errors.h"
#include "json.hpp"

namespace graphscan {

std::string_view ToolVersion() { return GRAPHSCAN_VERSION_STRING; }

ScanResult ScanBundle(const ModelBundle& bundle, const RuleSet& rules,
                      const ScanOptions& options) {
  const FlatGraph flat = Flatten(bundle, options.max_depth, options.max_nodes);
  const std::vector<CategoryHit> hits = ClassifyFlatGraph(flat, rules);
  const std::vector<EvidenceString> evidence = ExtractStringEvidence(flat, hits);
  const TaintState taint = PropagateTaint(flat, hits);
  const std::vector<Chain> chains = FindChains(flat, taint, evidence);

  ScanMetadata meta;
  meta.tool_version = std::string(ToolVersion());
  meta.rules_version = rules.version();
  meta.model_path = bundle.source_path;
  meta.format = bundle.format;
  meta.node_count = bundle.TotalNodeCount();
  meta.function_count = bundle.functions.size();

  ScanResult result;
  result.report = Assemble(meta, Score(hits, chains, evidence), flat.warnings());
  result.digest = BuildDigest(flat, hits);
  return result;
}

ScanResult ScanModel(const std::filesystem::path& path, const RuleSet& rules,
                     const ScanOptions& options) {
  const ModelBundle bundle = LoadModel(path, options.load);
  return ScanBundle(bundle, rules, options);
}

std::string RenderRules(const RuleSet& rules, ReportFormat format) {
  struct Row {
    std::string op, categories, confidence, predicate, note;
  };
  std::vector<Row> rows;
  for (const auto& rule : rules.rules()) {
    Row row{rule.op_type, "", std::string(ConfidenceName(rule.confidence)),
            rule.predicate ? rule.predicate->Summary() : "-", rule.note};
    for (size_t i = 0; i < rule.categories.size(); ++i) {
      if (i > 0) row.categories += ",";
      row.categories += CoreFunctionName(rule.categories[i]);
    }
    rows.push_back(std::move(row));
  }

  if (format == ReportFormat::kJson) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : rows) {
      out.push_back({{"op_type", r.op},
                     {"categories", r.categories},
                     {"confidence", r.confidence},
                     {"predicate", r.predicate},
                     {"note", r.note}});
    }
    return out.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) +
           "\n";
  }
  if (format != ReportFormat::kText) {
    throw Error(ErrorCode::kInvalidArgument, "rules can be listed as text or json");
  }

  size_t w_op = 0, w_cat = 0, w_conf = 0, w_pred = 0;
  for (const auto& r : rows) {
    w_op = std::max(w_op, r.op.size());
    w_cat = std::max(w_cat, r.categories.size());
    w_conf = std::max(w_conf, r.confidence.size());
    w_pred = std::max(w_pred, r.predicate.size());
  }
  auto pad = [](const std::string& s, size_t n) {
    return s + std::string(n - s.size() + 2, ' ');
  };
  std::string out;
  for (const auto& r : rows) {
    out += pad(r.op, w_op) + pad(r.categories, w_cat) +
           pad(r.confidence, w_conf) + pad(r.predicate, w_pred) + "\"" +
           SanitizeUtf8(r.note) + "\"\n";
  }
  return out;
}

int ExitCodeFor(Severity verdict, Severity threshold) {
  return verdict >= threshold ? 1 : 0;
}

}  // namespace graphscan
