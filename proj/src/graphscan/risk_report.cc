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

#include "graphscan/risk_report.h"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace graphscan {
namespace {

using json = nlohmann::json;

Severity Escalate(Severity s) {
  return s == Severity::kMalicious ? s : static_cast<Severity>(static_cast<int>(s) + 1);
}

bool HasEvidence(const std::vector<EvidenceString>& evidence,
                 std::string_view node, Interpretation interpretation) {
  return std::any_of(evidence.begin(), evidence.end(), [&](const auto& e) {
    return e.origin_node == node && e.interpretation == interpretation;
  });
}

// Escalator conditions that apply to a single hit.
bool HitEscalates(const CategoryHit& hit,
                  const std::vector<EvidenceString>& evidence) {
  if (IsNetworkCategory(hit.category) &&
      HasEvidence(evidence, hit.node_name, Interpretation::kRemoteEndpoint)) {
    return true;
  }
  return hit.category == CoreFunction::kFileWrite &&
         HasEvidence(evidence, hit.node_name, Interpretation::kPersistencePath);
}

std::string ChainTitle(const Chain& chain) {
  std::string title(ChainKindName(chain.kind));
  title += " chain: ";
  title += CoreFunctionName(chain.source_category);
  title += " at " + chain.source + " reaches ";
  title += CoreFunctionName(chain.sink_category);
  title += " at " + chain.sink;
  return title;
}

std::string ChainExplanation(const Chain& chain,
                             const std::vector<CategoryHit>& hits,
                             const std::vector<std::string>& escalations) {
  std::ostringstream out;
  std::string source_note, sink_note;
  for (const auto& hit : hits) {
    if (hit.node_name == chain.source && hit.category == chain.source_category)
      source_note = hit.rule_note;
    if (hit.node_name == chain.sink && hit.category == chain.sink_category)
      sink_note = hit.rule_note;
  }
  out << "Output of " << chain.source << " (" << CoreFunctionName(chain.source_category);
  if (!source_note.empty()) out << ": " << source_note;
  out << ") flows through " << (chain.path.size() - 1) << " edge(s) into "
      << chain.sink << " (" << CoreFunctionName(chain.sink_category);
  if (!sink_note.empty()) out << ": " << sink_note;
  out << ").";
  if (chain.kind == ChainKind::kGeneric) {
    out << " The source/sink pair matches no named attack pattern.";
  }
  if (chain.enumeration_assisted) {
    out << " Directory enumeration feeds the chain.";
  }
  for (const auto& e : escalations) out << " Escalated: " << e << ".";
  return out.str();
}

json HitJson(const CategoryHit& hit) {
  return {{"node", hit.node_name},
          {"category", CoreFunctionName(hit.category)},
          {"confidence", ConfidenceName(hit.confidence)},
          {"note", hit.rule_note}};
}

json EvidenceJson(const EvidenceString& e) {
  return {{"value", e.value},
          {"origin_node", e.origin_node},
          {"via", e.via},
          {"interpretation", InterpretationName(e.interpretation)}};
}

json ChainJson(const Chain& chain) {
  json annotations = json::array();
  if (chain.enumeration_assisted) annotations.push_back(kEnumerationAssisted);
  return {{"kind", ChainKindName(chain.kind)},
          {"source", {{"id", chain.source},
                      {"category", CoreFunctionName(chain.source_category)}}},
          {"sink", {{"id", chain.sink},
                    {"category", CoreFunctionName(chain.sink_category)}}},
          {"path", chain.path},
          {"annotations", annotations}};
}

json TriageJson(const TriageVerdict& triage) {
  return {{"verdict", TriageOutcomeName(triage.verdict)},
          {"risk_rationale", triage.risk_rationale},
          {"chains_confirmed", triage.chains_confirmed},
          {"raw_degraded", triage.raw_degraded}};
}

json ReportJson(const ScanReport& report) {
  json findings = json::array();
  for (const auto& f : report.findings) {
    json hits = json::array();
    for (const auto& h : f.hits) hits.push_back(HitJson(h));
    json evidence = json::array();
    for (const auto& e : f.evidence) evidence.push_back(EvidenceJson(e));
    findings.push_back({{"id", f.id},
                        {"severity", SeverityName(f.severity)},
                        {"title", f.title},
                        {"chain", f.chain ? ChainJson(*f.chain) : json(nullptr)},
                        {"hits", hits},
                        {"evidence", evidence},
                        {"explanation", f.explanation}});
  }
  return {{"schema_version", kReportSchemaVersion},
          {"tool_version", report.tool_version},
          {"rules_version", report.rules_version},
          {"model_path", report.model_path},
          {"format", ModelFormatName(report.format)},
          {"node_count", report.node_count},
          {"function_count", report.function_count},
          {"verdict", SeverityName(report.verdict)},
          {"findings", findings},
          {"warnings", report.warnings},
          {"triage", report.triage ? TriageJson(*report.triage) : json(nullptr)}};
}

std::string Dump(const json& j) {
  return j.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

std::string_view SarifLevel(Severity s) {
  switch (s) {
    case Severity::kMalicious:
      return "error";
    case Severity::kSuspicious:
      return "warning";
    case Severity::kInformational:
      return "note";
    case Severity::kClean:
      break;
  }
  return "none";
}

std::string RuleIdFor(const Finding& f) {
  if (f.chain) return "chain/" + std::string(ChainKindName(f.chain->kind));
  std::string id = "hit";
  for (const auto& h : f.hits) {
    id += "/";
    id += CoreFunctionName(h.category);
  }
  return id;
}

json LogicalLocation(const std::string& qualified_id) {
  const auto slash = qualified_id.rfind('/');
  const std::string name =
      slash == std::string::npos ? qualified_id : qualified_id.substr(slash + 1);
  return json::array({{{"name", name},
                       {"fullyQualifiedName", qualified_id},
                       {"kind", "member"}}});
}

std::string RenderSarif(const ScanReport& report) {
  std::set<std::string> rule_ids;
  json results = json::array();
  for (const auto& f : report.findings) {
    const std::string rule_id = RuleIdFor(f);
    rule_ids.insert(rule_id);
    json result = {
        {"ruleId", rule_id},
        {"level", SarifLevel(f.severity)},
        {"message", {{"text", f.title + ". " + f.explanation}}},
        {"partialFingerprints", {{"graphscanFindingId/v1", f.id}}},
        {"properties", {{"severity", SeverityName(f.severity)},
                        {"findingId", f.id}}},
    };
    const std::string anchor =
        f.chain ? f.chain->sink : (f.hits.empty() ? "" : f.hits.front().node_name);
    if (!anchor.empty()) {
      result["locations"] =
          json::array({{{"logicalLocations", LogicalLocation(anchor)}}});
    }
    if (f.chain) {
      json steps = json::array();
      for (const auto& id : f.chain->path) {
        steps.push_back({{"location", {{"logicalLocations", LogicalLocation(id)}}}});
      }
      result["codeFlows"] =
          json::array({{{"threadFlows", json::array({{{"locations", steps}}})}}});
    }
    results.push_back(std::move(result));
  }

  json rules = json::array();
  for (const auto& id : rule_ids) {
    rules.push_back({{"id", id},
                     {"shortDescription", {{"text", "graphscan " + id}}}});
  }
  json run = {
      {"tool", {{"driver", {{"name", "graphscan"},
                            {"version", report.tool_version},
                            {"semanticVersion", report.tool_version},
                            {"rules", rules}}}}},
      {"results", results},
      {"properties", {{"verdict", SeverityName(report.verdict)},
                      {"rulesVersion", report.rules_version},
                      {"modelPath", report.model_path}}},
  };
  json doc = {{"$schema", "https://json.schemastore.org/sarif-2.1.0.json"},
              {"version", "2.1.0"},
              {"runs", json::array({run})}};
  return Dump(doc);
}

std::string RenderText(const ScanReport& report) {
  std::ostringstream out;
  std::string verdict(SeverityName(report.verdict));
  std::transform(verdict.begin(), verdict.end(), verdict.begin(), ::toupper);
  out << "graphscan " << report.tool_version << "\n"
      << "model:    " << report.model_path << " ("
      << ModelFormatName(report.format) << ")\n"
      << "rules:    " << report.rules_version << "\n"
      << "graph:    " << report.node_count << " nodes, "
      << report.function_count << " functions\n"
      << "verdict:  " << verdict << "\n";
  if (report.findings.empty()) out << "\nNo findings.\n";
  for (const auto& f : report.findings) {
    out << "\n[" << SeverityName(f.severity) << "] " << f.id << "  " << f.title
        << "\n";
    if (f.chain) {
      out << "  path: ";
      for (size_t i = 0; i < f.chain->path.size(); ++i) {
        if (i > 0) out << " → ";
        out << f.chain->path[i];
      }
      out << "\n";
      if (f.chain->enumeration_assisted) {
        out << "  annotations: " << kEnumerationAssisted << "\n";
      }
    }
    for (const auto& h : f.hits) {
      out << "  hit: " << h.node_name << " " << CoreFunctionName(h.category)
          << " (" << ConfidenceName(h.confidence) << ") " << h.rule_note << "\n";
    }
    for (const auto& e : f.evidence) {
      out << "  evidence: " << InterpretationName(e.interpretation) << " \""
          << e.value << "\" at " << e.origin_node;
      if (!e.via.empty()) out << " via " << e.via;
      out << "\n";
    }
    out << "  " << f.explanation << "\n";
  }
  if (!report.warnings.empty()) {
    out << "\nwarnings:\n";
    for (const auto& w : report.warnings) out << "  - " << w << "\n";
  }
  if (report.triage) {
    out << "\ntriage:   " << TriageOutcomeName(report.triage->verdict);
    if (report.triage->raw_degraded) out << " (degraded reply)";
    out << "\n";
    if (!report.triage->risk_rationale.empty()) {
      out << "  " << report.triage->risk_rationale << "\n";
    }
    for (const auto& id : report.triage->chains_confirmed) {
      out << "  confirmed: " << id << "\n";
    }
  }
  return out.str();
}

}  // namespace

std::string_view SeverityName(Severity severity) {
  switch (severity) {
    case Severity::kClean:
      return "clean";
    case Severity::kInformational:
      return "informational";
    case Severity::kSuspicious:
      return "suspicious";
    case Severity::kMalicious:
      return "malicious";
  }
  return "unknown";
}

std::optional<Severity> ParseSeverity(std::string_view name) {
  for (auto s : {Severity::kClean, Severity::kInformational,
                 Severity::kSuspicious, Severity::kMalicious}) {
    if (SeverityName(s) == name) return s;
  }
  return std::nullopt;
}

std::string_view TriageOutcomeName(TriageOutcome outcome) {
  switch (outcome) {
    case TriageOutcome::kBenign:
      return "benign";
    case TriageOutcome::kSuspicious:
      return "suspicious";
    case TriageOutcome::kMalicious:
      return "malicious";
    case TriageOutcome::kIndeterminate:
      return "indeterminate";
  }
  return "unknown";
}

std::optional<TriageOutcome> ParseTriageOutcome(std::string_view name) {
  for (auto o : {TriageOutcome::kBenign, TriageOutcome::kSuspicious,
                 TriageOutcome::kMalicious, TriageOutcome::kIndeterminate}) {
    if (TriageOutcomeName(o) == name) return o;
  }
  return std::nullopt;
}

std::optional<ReportFormat> ParseReportFormat(std::string_view name) {
  if (name == "text") return ReportFormat::kText;
  if (name == "json") return ReportFormat::kJson;
  if (name == "sarif") return ReportFormat::kSarif;
  return std::nullopt;
}

std::string FindingId(std::string_view kind, std::string_view source,
                      std::string_view sink,
                      const std::vector<std::string>& notes) {
  // Length-prefixed fields so that no two inputs share an encoding.
  std::string material;
  auto append = [&](std::string_view field) {
    material += std::to_string(field.size());
    material += ':';
    material += field;
  };
  append(kind);
  append(source);
  append(sink);
  for (const auto& note : notes) append(note);

  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_Digest(material.data(), material.size(), digest, &length, EVP_sha256(),
             nullptr);
  std::string id = "f-";
  char hex[3];
  for (unsigned int i = 0; i < 8 && i < length; ++i) {
    std::snprintf(hex, sizeof(hex), "%02x", digest[i]);
    id += hex;
  }
  return id;
}

std::vector<Finding> Score(const std::vector<CategoryHit>& hits,
                           const std::vector<Chain>& chains,
                           const std::vector<EvidenceString>& evidence) {
  std::vector<Finding> findings;
  std::set<std::string> on_chain;

  for (const auto& chain : chains) {
    const std::set<std::string> path_nodes(chain.path.begin(), chain.path.end());
    on_chain.insert(path_nodes.begin(), path_nodes.end());

    Finding f;
    f.chain = chain;
    f.title = ChainTitle(chain);
    f.evidence = chain.evidence;
    for (const auto& hit : hits) {
      if (path_nodes.contains(hit.node_name)) f.hits.push_back(hit);
    }

    f.severity = chain.kind == ChainKind::kGeneric ? Severity::kSuspicious
                                                   : Severity::kMalicious;
    std::vector<std::string> escalations;
    for (const auto& hit : f.hits) {
      if (IsNetworkCategory(hit.category) &&
          HasEvidence(evidence, hit.node_name, Interpretation::kRemoteEndpoint)) {
        escalations.push_back("remote endpoint on " + hit.node_name);
      } else if (hit.category == CoreFunction::kFileWrite &&
                 HasEvidence(evidence, hit.node_name,
                             Interpretation::kPersistencePath)) {
        escalations.push_back("persistence path on " + hit.node_name);
      } else if (hit.category == CoreFunction::kOpaqueExec) {
        escalations.push_back("opaque callback at " + hit.node_name);
      }
    }
    std::sort(escalations.begin(), escalations.end());
    escalations.erase(std::unique(escalations.begin(), escalations.end()),
                      escalations.end());
    if (!escalations.empty()) f.severity = Escalate(f.severity);
    f.explanation = ChainExplanation(chain, f.hits, escalations);

    std::vector<std::string> notes;
    for (const auto& hit : f.hits) {
      if ((hit.node_name == chain.source && hit.category == chain.source_category) ||
          (hit.node_name == chain.sink && hit.category == chain.sink_category)) {
        notes.push_back(hit.rule_note);
      }
    }
    const std::string kind = std::string(ChainKindName(chain.kind)) + ":" +
                             std::string(CoreFunctionName(chain.source_category)) +
                             ">" +
                             std::string(CoreFunctionName(chain.sink_category));
    f.id = FindingId(kind, chain.source, chain.sink, notes);
    findings.push_back(std::move(f));
  }

  // Hits off every chain, grouped per node in first-seen order.
  std::vector<std::string> order;
  std::map<std::string, std::vector<CategoryHit>> by_node;
  for (const auto& hit : hits) {
    if (on_chain.contains(hit.node_name)) continue;
    auto [it, inserted] = by_node.try_emplace(hit.node_name);
    if (inserted) order.push_back(hit.node_name);
    it->second.push_back(hit);
  }
  for (const auto& node : order) {
    Finding f;
    f.hits = by_node[node];
    bool escalate = false;
    std::string kind = "hit";
    std::vector<std::string> notes;
    std::string categories;
    for (const auto& hit : f.hits) {
      const Severity base = hit.confidence == Confidence::kInformational
                                ? Severity::kInformational
                                : Severity::kSuspicious;
      f.severity = std::max(f.severity, base);
      escalate = escalate || HitEscalates(hit, evidence);
      kind += ":";
      kind += CoreFunctionName(hit.category);
      notes.push_back(hit.rule_note);
      if (!categories.empty()) categories += ", ";
      categories += CoreFunctionName(hit.category);
    }
    for (const auto& e : evidence) {
      if (e.origin_node == node) f.evidence.push_back(e);
    }
    if (escalate) f.severity = Escalate(f.severity);
    f.title = categories + " capability at " + node;
    f.explanation = "Isolated " + categories + " operation (" + notes.front() +
                    ") not connected to a source/sink chain.";
    if (escalate) f.explanation += " Escalated by string evidence on the node.";
    f.id = FindingId(kind, node, "", notes);
    findings.push_back(std::move(f));
  }
  return findings;
}

void Normalize(ScanReport& report) {
  std::stable_sort(report.findings.begin(), report.findings.end(),
                   [](const Finding& a, const Finding& b) {
                     if (a.severity != b.severity) return a.severity > b.severity;
                     return a.id < b.id;
                   });
  report.verdict = Severity::kClean;
  for (const auto& f : report.findings) {
    report.verdict = std::max(report.verdict, f.severity);
  }
}

ScanReport Assemble(const ScanMetadata& meta, std::vector<Finding> findings,
                    std::vector<std::string> warnings) {
  ScanReport report;
  report.tool_version = meta.tool_version;
  report.rules_version = meta.rules_version;
  report.model_path = meta.model_path;
  report.format = meta.format;
  report.node_count = meta.node_count;
  report.function_count = meta.function_count;
  report.findings = std::move(findings);
  report.warnings = std::move(warnings);
  Normalize(report);
  return report;
}

std::string Render(const ScanReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::kText:
      return RenderText(report);
    case ReportFormat::kJson:
      return Dump(ReportJson(report));
    case ReportFormat::kSarif:
      return RenderSarif(report);
  }
  return {};
}

std::string RenderEnvelope(const ScanReport& report,
                           std::string_view scanned_at_utc,
                           double duration_seconds) {
  json doc = {{"envelope", {{"scanned_at", scanned_at_utc},
                            {"duration_seconds", duration_seconds}}},
              {"report", ReportJson(report)}};
  return Dump(doc);
}

}  // namespace graphscan
