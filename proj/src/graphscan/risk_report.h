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

#ifndef GRAPHSCAN_RISK_REPORT_H_
#define GRAPHSCAN_RISK_REPORT_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "graphscan/chain_analyzer.h"
#include "graphscan/graph.h"
#include "graphscan/op_taxonomy.h"

namespace graphscan {

enum class Severity { kClean, kInformational, kSuspicious, kMalicious };

// Lower-case names: "clean", "informational", "suspicious", "malicious".
std::string_view SeverityName(Severity severity);
std::optional<Severity> ParseSeverity(std::string_view name);

struct Finding {
  std::string id;  // Content hash; see FindingId().
  Severity severity = Severity::kClean;
  std::string title;
  std::optional<Chain> chain;
  std::vector<CategoryHit> hits;
  std::vector<EvidenceString> evidence;
  std::string explanation;
};

enum class TriageOutcome { kBenign, kSuspicious, kMalicious, kIndeterminate };

std::string_view TriageOutcomeName(TriageOutcome outcome);
std::optional<TriageOutcome> ParseTriageOutcome(std::string_view name);

struct TriageVerdict {
  TriageOutcome verdict = TriageOutcome::kIndeterminate;
  std::string risk_rationale;
  std::vector<std::string> chains_confirmed;
  bool raw_degraded = false;
};

inline constexpr std::string_view kReportSchemaVersion = "1";

struct ScanMetadata {
  std::string tool_version;
  std::string rules_version;
  std::string model_path;
  ModelFormat format = ModelFormat::kGraphDefText;
  size_t node_count = 0;
  size_t function_count = 0;
};

struct ScanReport {
  std::string tool_version;
  std::string rules_version;
  std::string model_path;
  ModelFormat format = ModelFormat::kGraphDefText;
  size_t node_count = 0;
  size_t function_count = 0;
  std::vector<Finding> findings;  // Severity desc, then id asc.
  Severity verdict = Severity::kClean;
  std::vector<std::string> warnings;
  std::optional<TriageVerdict> triage;
};

// Stable id: "f-" + 16 hex digits of SHA-256 over the finding's kind,
// source, sink and rule notes.
std::string FindingId(std::string_view kind, std::string_view source,
                      std::string_view sink,
                      const std::vector<std::string>& notes);

// Scoring:
//   - a named-kind chain (Exfiltration, Dropper, RemoteToExec,
//     ReadToPersistence) is Malicious; a Generic chain is Suspicious;
//   - a hit node on no chain is Suspicious (Explicit/Hidden rules) or
//     Informational (Informational rules);
//   - escalate one level (capped at Malicious) for RemoteEndpoint evidence
//     on a network hit, PersistencePath evidence on a FileWrite hit, or an
//     OpaqueExec hit anywhere on a chain path.
// Hits on a chain path are reported inside that chain's finding only.
std::vector<Finding> Score(const std::vector<CategoryHit>& hits,
                           const std::vector<Chain>& chains,
                           const std::vector<EvidenceString>& evidence);

ScanReport Assemble(const ScanMetadata& meta, std::vector<Finding> findings,
                    std::vector<std::string> warnings);

// Re-sorts findings and recomputes the verdict (max severity, or Clean).
void Normalize(ScanReport& report);

enum class ReportFormat { kText, kJson, kSarif };

std::optional<ReportFormat> ParseReportFormat(std::string_view name);

std::string Render(const ScanReport& report, ReportFormat format);

// The canonical JSON report wrapped with wall-clock data that is kept out
// of the report body: {"envelope": {...}, "report": {...}}.
std::string RenderEnvelope(const ScanReport& report,
                           std::string_view scanned_at_utc,
                           double duration_seconds);

}  // namespace graphscan

#endif  // GRAPHSCAN_RISK_REPORT_H_
