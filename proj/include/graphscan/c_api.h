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

#ifndef GRAPHSCAN_C_API_H_
#define GRAPHSCAN_C_API_H_

#include <stddef.h>
#include <stdint.h>

// --------------------------------------------------------------------------
// C API for libgraphscan.
//
// All objects are opaque and owned by the caller once returned; release them
// with the matching GS_Delete* function. Functions that can fail take a
// GS_Status* as their last argument and leave GS_OK in it on success.
// Strings returned as `char*` are NUL-terminated UTF-8 and must be released
// with GS_FreeString. Strings returned as `const char*` are owned by the
// object they were read from.
//
// Nothing in this library executes a model.

#if defined(_WIN32)
#ifdef GS_COMPILE_LIBRARY
#define GS_EXPORT __declspec(dllexport)
#else
#define GS_EXPORT __declspec(dllimport)
#endif
#else
#define GS_EXPORT __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum GS_Code {
  GS_OK = 0,
  GS_NOT_FOUND = 1,
  GS_UNRECOGNIZED = 2,
  GS_PARSE_ERROR = 3,
  GS_TOO_LARGE = 4,
  GS_NO_SERVABLE_META_GRAPH = 5,
  GS_RULE_PARSE_ERROR = 6,
  GS_DUPLICATE_RULE = 7,
  GS_UNKNOWN_NODE = 8,
  GS_DIGEST_OVERFLOW = 9,
  GS_TIMEOUT = 10,
  GS_HTTP_ERROR = 11,
  GS_AUTH_MISSING = 12,
  GS_UNKNOWN_CHAIN_ID = 13,
  GS_INVALID_ARGUMENT = 14,
  GS_INTERNAL = 15,
} GS_Code;

typedef enum GS_Severity {
  GS_CLEAN = 0,
  GS_INFORMATIONAL = 1,
  GS_SUSPICIOUS = 2,
  GS_MALICIOUS = 3,
} GS_Severity;

typedef enum GS_Format {
  GS_FORMAT_TEXT = 0,
  GS_FORMAT_JSON = 1,
  GS_FORMAT_SARIF = 2,
} GS_Format;

// --------------------------------------------------------------------------
// Status.

typedef struct GS_Status GS_Status;

GS_EXPORT extern GS_Status* GS_NewStatus(void);
GS_EXPORT extern void GS_DeleteStatus(GS_Status* status);
GS_EXPORT extern GS_Code GS_GetCode(const GS_Status* status);
// Empty when the code is GS_OK.
GS_EXPORT extern const char* GS_Message(const GS_Status* status);
// HTTP status of the last GS_HTTP_ERROR; 0 when no response arrived.
GS_EXPORT extern int GS_HttpStatus(const GS_Status* status);
// "NotFound", "ParseError", ...
GS_EXPORT extern const char* GS_CodeName(GS_Code code);

GS_EXPORT extern void GS_FreeString(char* str);

// --------------------------------------------------------------------------
// Enumerations.

GS_EXPORT extern const char* GS_Version(void);
// "clean", "informational", "suspicious", "malicious".
GS_EXPORT extern const char* GS_SeverityName(GS_Severity severity);
// Returns 1 and writes *out on a known name, else 0.
GS_EXPORT extern int GS_ParseSeverity(const char* name, GS_Severity* out);
// "text", "json" or "sarif".
GS_EXPORT extern int GS_ParseFormat(const char* name, GS_Format* out);
// 1 when `verdict` is at or above `threshold`, else 0.
GS_EXPORT extern int GS_ExitCode(GS_Severity verdict, GS_Severity threshold);

// --------------------------------------------------------------------------
// Rules.

typedef struct GS_RuleSet GS_RuleSet;

// Builtin rules, plus the override file at `override_path` when non-NULL.
GS_EXPORT extern GS_RuleSet* GS_LoadRules(const char* override_path,
                                          GS_Status* status);
GS_EXPORT extern void GS_DeleteRuleSet(GS_RuleSet* rules);
GS_EXPORT extern size_t GS_RuleSetSize(const GS_RuleSet* rules);
GS_EXPORT extern const char* GS_RuleSetVersion(const GS_RuleSet* rules);
// One line per rule (text) or a JSON array. GS_FORMAT_SARIF is rejected.
GS_EXPORT extern char* GS_RenderRules(const GS_RuleSet* rules,
                                      GS_Format format, GS_Status* status);

// --------------------------------------------------------------------------
// Scanning.

typedef struct GS_ScanOptions GS_ScanOptions;

GS_EXPORT extern GS_ScanOptions* GS_NewScanOptions(void);
GS_EXPORT extern void GS_DeleteScanOptions(GS_ScanOptions* options);
// Function-inlining depth limit (default 16).
GS_EXPORT extern void GS_SetMaxDepth(GS_ScanOptions* options, int max_depth);
// Ceiling on the flattened node count (default 4,000,000).
GS_EXPORT extern void GS_SetMaxNodes(GS_ScanOptions* options, size_t max_nodes);
// Files above this size are refused with GS_TOO_LARGE (default 1 GiB).
GS_EXPORT extern void GS_SetMaxFileBytes(GS_ScanOptions* options,
                                         uint64_t max_file_bytes);

typedef struct GS_Report GS_Report;

// Scans a SavedModel directory or a GraphDef file (binary or text).
// `options` may be NULL for defaults.
GS_EXPORT extern GS_Report* GS_Scan(const char* path, const GS_RuleSet* rules,
                                    const GS_ScanOptions* options,
                                    GS_Status* status);
GS_EXPORT extern void GS_DeleteReport(GS_Report* report);
GS_EXPORT extern GS_Severity GS_ReportVerdict(const GS_Report* report);
GS_EXPORT extern size_t GS_ReportFindingCount(const GS_Report* report);
GS_EXPORT extern const char* GS_ReportFindingId(const GS_Report* report,
                                                size_t index);
GS_EXPORT extern size_t GS_ReportWarningCount(const GS_Report* report);
GS_EXPORT extern const char* GS_ReportWarning(const GS_Report* report,
                                              size_t index);
GS_EXPORT extern char* GS_RenderReport(const GS_Report* report,
                                       GS_Format format, GS_Status* status);
// JSON report wrapped with the scan time and duration.
GS_EXPORT extern char* GS_RenderReportEnvelope(const GS_Report* report,
                                               const char* scanned_at_utc,
                                               double duration_seconds,
                                               GS_Status* status);

// --------------------------------------------------------------------------
// LLM triage.

typedef struct GS_TriageOptions GS_TriageOptions;

// `api_key_env` names the environment variable holding the bearer token.
GS_EXPORT extern GS_TriageOptions* GS_NewTriageOptions(const char* endpoint_url,
                                                       const char* model_name,
                                                       const char* api_key_env);
GS_EXPORT extern void GS_DeleteTriageOptions(GS_TriageOptions* options);
GS_EXPORT extern void GS_SetTriageTimeoutMs(GS_TriageOptions* options,
                                            int64_t timeout_ms);
GS_EXPORT extern void GS_SetTriagePromptBudget(GS_TriageOptions* options,
                                               size_t budget_bytes);

// Runs triage and merges the result into `report`. Fails open: transport and
// reply problems are recorded as report warnings and `status` stays GS_OK.
// Only NULL arguments produce an error status.
GS_EXPORT extern void GS_Triage(GS_Report* report,
                                const GS_TriageOptions* options,
                                GS_Status* status);

// The prompt GS_Triage would send, as "<system text>\n\n<user text>".
GS_EXPORT extern char* GS_RenderTriagePrompt(const GS_Report* report,
                                             size_t budget_bytes,
                                             GS_Status* status);

// --------------------------------------------------------------------------
// Corpus scanning.

typedef struct GS_Corpus GS_Corpus;

// Scans every model directly under `dir`. `manifest_path` may be NULL, in
// which case a model passes iff its verdict is below `fail_on`. `workers`
// of 0 uses the hardware concurrency.
GS_EXPORT extern GS_Corpus* GS_ScanCorpus(const char* dir,
                                          const GS_RuleSet* rules,
                                          const char* manifest_path,
                                          const GS_ScanOptions* options,
                                          GS_Severity fail_on, size_t workers,
                                          GS_Status* status);
GS_EXPORT extern void GS_DeleteCorpus(GS_Corpus* corpus);
GS_EXPORT extern size_t GS_CorpusSize(const GS_Corpus* corpus);
GS_EXPORT extern int GS_CorpusAllPass(const GS_Corpus* corpus);
// Text table or JSON.
GS_EXPORT extern char* GS_RenderCorpus(const GS_Corpus* corpus,
                                       GS_Format format, GS_Status* status);

#ifdef __cplusplus
} /* end extern "C" */
#endif

#endif  // GRAPHSCAN_C_API_H_
