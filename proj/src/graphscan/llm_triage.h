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

// Optional second opinion from a chat-completion endpoint.
//
// The scan report and a digest of the flattened graph are rendered into a
// prompt (template in prompts/triage_v1.txt), posted to the endpoint, and the
// structured reply is merged into the report. The merge can only raise the
// verdict. Transport failures are reported through exceptions by
// RequestVerdict() and turned into report warnings by RunTriage().

#ifndef GRAPHSCAN_LLM_TRIAGE_H_
#define GRAPHSCAN_LLM_TRIAGE_H_

#include <chrono>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "graphscan/chain_analyzer.h"
#include "graphscan/risk_report.h"

namespace graphscan {

inline constexpr size_t kDefaultPromptBudget = 64 * 1024;
inline constexpr std::string_view kPromptTemplateVersion = "triage_v1";
inline constexpr std::string_view kDefaultEndpointPath = "/v1/chat/completions";

struct DigestNode {
  std::string id;
  std::string op_type;
  std::vector<std::string> attrs;  // Rendered `name=value`, attr-name order.
  bool is_hit = false;
};

// What the prompt shows of the graph. Hit nodes come first, then the rest
// in flattened order.
struct GraphDigest {
  std::map<std::string, size_t> op_histogram;
  std::vector<DigestNode> nodes;
};

GraphDigest BuildDigest(const FlatGraph& flat,
                        const std::vector<CategoryHit>& hits);

struct PromptBundle {
  std::string system_text;
  std::string user_text;
  size_t nodes_omitted = 0;  // Non-hit nodes dropped to fit the budget.
};

// Deterministic for identical inputs. When the full digest does not fit in
// `budget` bytes of user text, non-hit nodes are dropped from the end, then
// the op histogram. Throws kDigestOverflow if hit nodes, findings, chains and
// evidence alone exceed the budget.
PromptBundle BuildPrompt(const ScanReport& report, const GraphDigest& digest,
                         size_t budget = kDefaultPromptBudget);

// The JSON shape the endpoint is asked to reply with.
std::string_view VerdictSchema();

struct TriageRequest {
  std::string endpoint_url;  // http(s)://host[:port][/path]
  std::string model_name;
  std::string api_key_env;  // Name of the variable, never its value.
  std::chrono::milliseconds timeout{60'000};
  PromptBundle prompt;
};

// Strict parse of a reply body's message content. Accepts the bare object or
// one wrapped in a ``` fence. Returns nullopt on anything else.
std::optional<TriageVerdict> ParseVerdictReply(std::string_view content);

// One request, plus one repair request if the reply does not parse. A reply
// that fails twice yields Indeterminate with raw_degraded set. Throws
// kAuthMissing, kTimeout or HttpError (status 0 when no response arrived).
TriageVerdict RequestVerdict(const TriageRequest& request);

// Attaches `verdict` to the report. Unknown finding ids in chains_confirmed
// are dropped with a warning. A Malicious opinion raises the report verdict
// to at least Suspicious, a Suspicious opinion to at least Informational;
// nothing lowers it. Findings are never modified.
ScanReport MergeVerdict(ScanReport report, const TriageVerdict& verdict);

struct TriageOptions {
  std::string endpoint_url;
  std::string model_name;
  std::string api_key_env;
  std::chrono::milliseconds timeout{60'000};
  size_t prompt_budget = kDefaultPromptBudget;
};

// BuildPrompt + RequestVerdict + MergeVerdict. Every triage failure becomes a
// warning on the returned report; the static result is otherwise unchanged.
ScanReport RunTriage(ScanReport report, const GraphDigest& digest,
                     const TriageOptions& options);

}  // namespace graphscan

#endif  // GRAPHSCAN_LLM_TRIAGE_H_
