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

#include "graphscan/c_api.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <optional>
#include <string>

#include "graphscan/corpus.h"
#include "graphscan/errors.h"
#include "graphscan/llm_triage.h"
#include "graphscan/scanner.h"

struct GS_Status {
  GS_Code code = GS_OK;
  std::string message;
  int http_status = 0;
};

struct GS_RuleSet {
  graphscan::RuleSet rules;
};

struct GS_ScanOptions {
  graphscan::ScanOptions options;
};

struct GS_Report {
  graphscan::ScanResult result;
};

struct GS_TriageOptions {
  graphscan::TriageOptions options;
};

struct GS_Corpus {
  graphscan::CorpusResult result;
};

namespace {

using graphscan::ErrorCode;

void Set(GS_Status* status, GS_Code code, std::string message) {
  if (status == nullptr) return;
  status->code = code;
  status->message = std::move(message);
  status->http_status = 0;
}

void Clear(GS_Status* status) { Set(status, GS_OK, ""); }

// Runs `body`, translating exceptions into `status`. Returns the body's
// value, or `fallback` on error.
template <typename T, typename F>
T Guard(GS_Status* status, T fallback, F&& body) {
  Clear(status);
  try {
    return body();
  } catch (const graphscan::HttpError& e) {
    Set(status, GS_HTTP_ERROR, e.what());
    if (status != nullptr) status->http_status = e.status();
  } catch (const graphscan::Error& e) {
    Set(status, static_cast<GS_Code>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    Set(status, GS_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    Set(status, GS_INTERNAL, e.what());
  }
  return fallback;
}

bool Require(GS_Status* status, bool ok, const char* what) {
  if (!ok) Set(status, GS_INVALID_ARGUMENT, what);
  return ok;
}

char* CopyString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

graphscan::Severity ToSeverity(GS_Severity s) {
  return static_cast<graphscan::Severity>(s);
}

graphscan::ReportFormat ToFormat(GS_Format f) {
  switch (f) {
    case GS_FORMAT_TEXT:
      return graphscan::ReportFormat::kText;
    case GS_FORMAT_JSON:
      return graphscan::ReportFormat::kJson;
    case GS_FORMAT_SARIF:
      return graphscan::ReportFormat::kSarif;
  }
  throw graphscan::Error(ErrorCode::kInvalidArgument, "unknown format");
}

}  // namespace

extern "C" {

GS_Status* GS_NewStatus(void) { return new GS_Status; }
void GS_DeleteStatus(GS_Status* status) { delete status; }
GS_Code GS_GetCode(const GS_Status* status) { return status->code; }
const char* GS_Message(const GS_Status* status) {
  return status->message.c_str();
}
int GS_HttpStatus(const GS_Status* status) { return status->http_status; }

const char* GS_CodeName(GS_Code code) {
  if (code == GS_OK) return "OK";
  if (code < GS_NOT_FOUND || code > GS_INTERNAL) return "Unknown";
  return graphscan::ErrorCodeName(static_cast<ErrorCode>(code)).data();
}

void GS_FreeString(char* str) { std::free(str); }

const char* GS_Version(void) { return graphscan::ToolVersion().data(); }

const char* GS_SeverityName(GS_Severity severity) {
  return graphscan::SeverityName(ToSeverity(severity)).data();
}

int GS_ParseSeverity(const char* name, GS_Severity* out) {
  if (name == nullptr || out == nullptr) return 0;
  const auto s = graphscan::ParseSeverity(name);
  if (!s) return 0;
  *out = static_cast<GS_Severity>(*s);
  return 1;
}

int GS_ParseFormat(const char* name, GS_Format* out) {
  if (name == nullptr || out == nullptr) return 0;
  const auto f = graphscan::ParseReportFormat(name);
  if (!f) return 0;
  switch (*f) {
    case graphscan::ReportFormat::kText:
      *out = GS_FORMAT_TEXT;
      break;
    case graphscan::ReportFormat::kJson:
      *out = GS_FORMAT_JSON;
      break;
    case graphscan::ReportFormat::kSarif:
      *out = GS_FORMAT_SARIF;
      break;
  }
  return 1;
}

int GS_ExitCode(GS_Severity verdict, GS_Severity threshold) {
  return graphscan::ExitCodeFor(ToSeverity(verdict), ToSeverity(threshold));
}

GS_RuleSet* GS_LoadRules(const char* override_path, GS_Status* status) {
  return Guard<GS_RuleSet*>(status, nullptr, [&] {
    std::optional<std::filesystem::path> path;
    if (override_path != nullptr) path = override_path;
    return new GS_RuleSet{graphscan::LoadRules(path)};
  });
}

void GS_DeleteRuleSet(GS_RuleSet* rules) { delete rules; }
size_t GS_RuleSetSize(const GS_RuleSet* rules) { return rules->rules.size(); }
const char* GS_RuleSetVersion(const GS_RuleSet* rules) {
  return rules->rules.version().c_str();
}

char* GS_RenderRules(const GS_RuleSet* rules, GS_Format format,
                     GS_Status* status) {
  if (!Require(status, rules != nullptr, "rules is NULL")) return nullptr;
  return Guard<char*>(status, nullptr, [&] {
    return CopyString(graphscan::RenderRules(rules->rules, ToFormat(format)));
  });
}

GS_ScanOptions* GS_NewScanOptions(void) { return new GS_ScanOptions; }
void GS_DeleteScanOptions(GS_ScanOptions* options) { delete options; }
void GS_SetMaxDepth(GS_ScanOptions* options, int max_depth) {
  options->options.max_depth = max_depth;
}
void GS_SetMaxNodes(GS_ScanOptions* options, size_t max_nodes) {
  options->options.max_nodes = max_nodes;
}
void GS_SetMaxFileBytes(GS_ScanOptions* options, uint64_t max_file_bytes) {
  options->options.load.max_file_bytes = max_file_bytes;
}

GS_Report* GS_Scan(const char* path, const GS_RuleSet* rules,
                   const GS_ScanOptions* options, GS_Status* status) {
  if (!Require(status, path != nullptr && rules != nullptr,
               "path and rules must be non-NULL")) {
    return nullptr;
  }
  return Guard<GS_Report*>(status, nullptr, [&] {
    const graphscan::ScanOptions opts =
        options != nullptr ? options->options : graphscan::ScanOptions{};
    return new GS_Report{graphscan::ScanModel(path, rules->rules, opts)};
  });
}

void GS_DeleteReport(GS_Report* report) { delete report; }

GS_Severity GS_ReportVerdict(const GS_Report* report) {
  return static_cast<GS_Severity>(report->result.report.verdict);
}

size_t GS_ReportFindingCount(const GS_Report* report) {
  return report->result.report.findings.size();
}

const char* GS_ReportFindingId(const GS_Report* report, size_t index) {
  const auto& findings = report->result.report.findings;
  return index < findings.size() ? findings[index].id.c_str() : nullptr;
}

size_t GS_ReportWarningCount(const GS_Report* report) {
  return report->result.report.warnings.size();
}

const char* GS_ReportWarning(const GS_Report* report, size_t index) {
  const auto& warnings = report->result.report.warnings;
  return index < warnings.size() ? warnings[index].c_str() : nullptr;
}

char* GS_RenderReport(const GS_Report* report, GS_Format format,
                      GS_Status* status) {
  if (!Require(status, report != nullptr, "report is NULL")) return nullptr;
  return Guard<char*>(status, nullptr, [&] {
    return CopyString(graphscan::Render(report->result.report, ToFormat(format)));
  });
}

char* GS_RenderReportEnvelope(const GS_Report* report,
                              const char* scanned_at_utc,
                              double duration_seconds, GS_Status* status) {
  if (!Require(status, report != nullptr && scanned_at_utc != nullptr,
               "report and scanned_at_utc must be non-NULL")) {
    return nullptr;
  }
  return Guard<char*>(status, nullptr, [&] {
    return CopyString(graphscan::RenderEnvelope(report->result.report,
                                                scanned_at_utc,
                                                duration_seconds));
  });
}

GS_TriageOptions* GS_NewTriageOptions(const char* endpoint_url,
                                      const char* model_name,
                                      const char* api_key_env) {
  auto* options = new GS_TriageOptions;
  options->options.endpoint_url = endpoint_url != nullptr ? endpoint_url : "";
  options->options.model_name = model_name != nullptr ? model_name : "";
  options->options.api_key_env = api_key_env != nullptr ? api_key_env : "";
  return options;
}

void GS_DeleteTriageOptions(GS_TriageOptions* options) { delete options; }

void GS_SetTriageTimeoutMs(GS_TriageOptions* options, int64_t timeout_ms) {
  options->options.timeout = std::chrono::milliseconds(timeout_ms);
}

void GS_SetTriagePromptBudget(GS_TriageOptions* options, size_t budget_bytes) {
  options->options.prompt_budget = budget_bytes;
}

void GS_Triage(GS_Report* report, const GS_TriageOptions* options,
               GS_Status* status) {
  if (!Require(status, report != nullptr && options != nullptr,
               "report and options must be non-NULL")) {
    return;
  }
  Guard<int>(status, 0, [&] {
    report->result.report =
        graphscan::RunTriage(std::move(report->result.report),
                             report->result.digest, options->options);
    return 0;
  });
}

char* GS_RenderTriagePrompt(const GS_Report* report, size_t budget_bytes,
                            GS_Status* status) {
  if (!Require(status, report != nullptr, "report is NULL")) return nullptr;
  return Guard<char*>(status, nullptr, [&] {
    const graphscan::PromptBundle prompt = graphscan::BuildPrompt(
        report->result.report, report->result.digest, budget_bytes);
    return CopyString(prompt.system_text + "\n\n" + prompt.user_text);
  });
}

GS_Corpus* GS_ScanCorpus(const char* dir, const GS_RuleSet* rules,
                         const char* manifest_path,
                         const GS_ScanOptions* options, GS_Severity fail_on,
                         size_t workers, GS_Status* status) {
  if (!Require(status, dir != nullptr && rules != nullptr,
               "dir and rules must be non-NULL")) {
    return nullptr;
  }
  return Guard<GS_Corpus*>(status, nullptr, [&] {
    std::optional<std::vector<graphscan::ManifestEntry>> manifest;
    if (manifest_path != nullptr) {
      manifest = graphscan::LoadManifest(manifest_path);
    }
    graphscan::CorpusOptions opts;
    if (options != nullptr) opts.scan = options->options;
    opts.fail_on = ToSeverity(fail_on);
    opts.workers = workers;
    return new GS_Corpus{
        graphscan::ScanCorpus(dir, rules->rules, manifest, opts)};
  });
}

void GS_DeleteCorpus(GS_Corpus* corpus) { delete corpus; }
size_t GS_CorpusSize(const GS_Corpus* corpus) {
  return corpus->result.rows.size();
}
int GS_CorpusAllPass(const GS_Corpus* corpus) {
  return corpus->result.AllPass() ? 1 : 0;
}

char* GS_RenderCorpus(const GS_Corpus* corpus, GS_Format format,
                      GS_Status* status) {
  if (!Require(status, corpus != nullptr, "corpus is NULL")) return nullptr;
  return Guard<char*>(status, nullptr, [&] {
    return CopyString(
        graphscan::RenderCorpus(corpus->result, ToFormat(format)));
  });
}

}  // extern "C"
