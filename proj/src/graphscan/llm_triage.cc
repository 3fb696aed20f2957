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

#include "graphscan/llm_triage.h"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <regex>
#include <set>
#include <sstream>
#include <tuple>

#include "graphscan/errors.h"
#include "graphscan/triage_prompt.inc"  // kTriagePromptTemplate
#include "httplib.h"
#include "json.hpp"

namespace graphscan {
namespace {

using json = nlohmann::json;

constexpr size_t kMaxAttrChars = 256;
constexpr size_t kMaxListItems = 16;

constexpr std::string_view kSchema = R"({
  "verdict": "benign" | "suspicious" | "malicious",
  "risk_rationale": "<short explanation>",
  "chains_confirmed": ["<finding id>", ...]
})";

constexpr std::string_view kRepairAddendum =
    "Your previous reply could not be parsed. Reply with valid JSON only: a "
    "single object matching the schema, with no prose and no code fence.";

std::string Quoted(std::string_view s) {
  std::string text(s.substr(0, kMaxAttrChars));
  if (s.size() > kMaxAttrChars) text += "...";
  return json(SanitizeUtf8(text)).dump();
}

std::string QuotedList(const std::vector<std::string>& values) {
  std::string out = "[";
  for (size_t i = 0; i < values.size() && i < kMaxListItems; ++i) {
    if (i > 0) out += ", ";
    out += Quoted(values[i]);
  }
  if (values.size() > kMaxListItems) {
    out += ", ... (" + std::to_string(values.size()) + " total)";
  }
  return out + "]";
}

std::string RenderAttr(const AttrValue& value) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, StrAttr>) {
          return Quoted(v.value);
        } else if constexpr (std::is_same_v<T, IntAttr>) {
          return std::to_string(v.value);
        } else if constexpr (std::is_same_v<T, FloatAttr>) {
          std::ostringstream out;
          out << v.value;
          return out.str();
        } else if constexpr (std::is_same_v<T, BoolAttr>) {
          return v.value ? "true" : "false";
        } else if constexpr (std::is_same_v<T, StrListAttr> ||
                             std::is_same_v<T, TensorStringsAttr>) {
          return QuotedList(v.values);
        } else if constexpr (std::is_same_v<T, FuncAttr>) {
          return "func(" + v.name + ")";
        } else if constexpr (std::is_same_v<T, FuncListAttr>) {
          std::string out = "func[";
          for (size_t i = 0; i < v.names.size(); ++i) {
            out += (i > 0 ? ", " : "") + v.names[i];
          }
          return out + "]";
        } else {
          return "<" + v.kind + ">";
        }
      },
      value);
}

std::string Basename(std::string_view path) {
  while (path.size() > 1 && path.back() == '/') path.remove_suffix(1);
  const auto slash = path.rfind('/');
  return std::string(slash == std::string_view::npos ? path
                                                     : path.substr(slash + 1));
}

struct Template {
  std::string system_text;
  std::string user_prefix;  // Up to the digest.
  std::string user_suffix;  // After the digest, schema filled in.
};

const Template& PromptTemplate() {
  static const Template kTemplate = [] {
    const std::string_view text = kTriagePromptTemplate;
    const std::string_view system_tag = "@@system\n";
    const std::string_view user_tag = "@@user\n";
    const auto s = text.find(system_tag);
    const auto u = text.find(user_tag);
    const auto d = text.find("{{DIGEST}}");
    const auto k = text.find("{{SCHEMA}}");
    if (s == text.npos || u == text.npos || d == text.npos || k == text.npos ||
        !(s < u && u < d && d < k)) {
      throw Error(ErrorCode::kInternal, "malformed triage prompt template");
    }
    Template t;
    t.system_text = std::string(text.substr(s + system_tag.size(),
                                            u - s - system_tag.size()));
    const size_t body = u + user_tag.size();
    t.user_prefix = std::string(text.substr(body, d - body));
    t.user_suffix = std::string(text.substr(d + 10, k - d - 10));
    t.user_suffix += kSchema;
    t.user_suffix += text.substr(k + 10);
    return t;
  }();
  return kTemplate;
}

// The parts of the digest that are never dropped.
std::string RenderCore(const ScanReport& report, const GraphDigest& digest) {
  std::ostringstream out;
  out << "model: " << Basename(report.model_path) << " ("
      << ModelFormatName(report.format) << "), " << report.node_count
      << " nodes, " << report.function_count << " functions\n"
      << "static verdict: " << SeverityName(report.verdict) << "\n";

  out << "\nfindings:\n";
  if (report.findings.empty()) out << "  (none)\n";
  for (const auto& f : report.findings) {
    out << "  " << f.id << " " << SeverityName(f.severity) << ": " << f.title
        << "\n";
  }

  std::map<std::string, std::set<std::string>> categories;
  for (const auto& f : report.findings) {
    for (const auto& h : f.hits) {
      categories[h.node_name].insert(std::string(CoreFunctionName(h.category)));
    }
  }
  out << "\ncategory hit nodes:\n";
  bool any_hit = false;
  for (const auto& node : digest.nodes) {
    if (!node.is_hit) continue;
    any_hit = true;
    out << "  " << node.id << " op=" << node.op_type;
    if (auto it = categories.find(node.id); it != categories.end()) {
      out << " categories=";
      bool first = true;
      for (const auto& c : it->second) {
        out << (first ? "" : ",") << c;
        first = false;
      }
    }
    out << "\n";
    for (const auto& attr : node.attrs) out << "    " << attr << "\n";
  }
  if (!any_hit) out << "  (none)\n";

  out << "\nchains:\n";
  bool any_chain = false;
  for (const auto& f : report.findings) {
    if (!f.chain) continue;
    any_chain = true;
    out << "  " << f.id << " " << ChainKindName(f.chain->kind) << ": ";
    for (size_t i = 0; i < f.chain->path.size(); ++i) {
      out << (i > 0 ? " -> " : "") << f.chain->path[i];
    }
    if (f.chain->enumeration_assisted) out << " [" << kEnumerationAssisted << "]";
    out << "\n";
  }
  if (!any_chain) out << "  (none)\n";

  std::set<std::tuple<std::string, std::string, std::string, std::string>>
      evidence;
  for (const auto& f : report.findings) {
    for (const auto& e : f.evidence) {
      evidence.emplace(e.origin_node, e.value, e.via,
                       std::string(InterpretationName(e.interpretation)));
    }
  }
  out << "\nevidence strings:\n";
  if (evidence.empty()) out << "  (none)\n";
  for (const auto& [origin, value, via, interpretation] : evidence) {
    out << "  " << interpretation << " " << Quoted(value) << " at " << origin;
    if (!via.empty()) out << " via " << via;
    out << "\n";
  }
  return out.str();
}

std::string RenderHistogram(const GraphDigest& digest) {
  std::string out = "\nop histogram:\n";
  for (const auto& [op, count] : digest.op_histogram) {
    out += "  " + op + " " + std::to_string(count) + "\n";
  }
  return out;
}

std::string OtherHeader(size_t shown, size_t total) {
  return "\nother nodes (" + std::to_string(shown) + " of " +
         std::to_string(total) + " shown):\n";
}

std::string Trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == s.npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(begin, end - begin + 1));
}

struct Endpoint {
  std::string base;
  std::string path;
};

Endpoint ParseEndpoint(const std::string& url) {
  static const std::regex kUrl(R"(^(https?://[^/?#]+)(/[^#]*)?$)",
                               std::regex::icase);
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) {
    throw Error(ErrorCode::kInvalidArgument,
                "endpoint must be an http(s) URL: " + url);
  }
  Endpoint e{m[1].str(), m[2].matched ? m[2].str() : ""};
  if (e.path.empty() || e.path == "/") e.path = std::string(kDefaultEndpointPath);
  return e;
}

// Sends one chat-completion request and returns the message content, or
// nullopt when the body is not the expected completion shape.
std::optional<std::string> PostOnce(const TriageRequest& request,
                                    const Endpoint& endpoint,
                                    const std::string& secret,
                                    const json& messages) {
  httplib::Client client(endpoint.base);
  client.set_connection_timeout(request.timeout);
  client.set_read_timeout(request.timeout);
  client.set_write_timeout(request.timeout);
  client.enable_server_certificate_verification(true);

  const json body = {{"model", request.model_name},
                     {"messages", messages},
                     {"temperature", 0}};
  const httplib::Headers headers = {{"Authorization", "Bearer " + secret}};
  const auto start = std::chrono::steady_clock::now();
  auto result = client.Post(endpoint.path, headers,
                            body.dump(-1, ' ', false,
                                      json::error_handler_t::replace),
                            "application/json");
  const auto elapsed = std::chrono::steady_clock::now() - start;
  if (!result) {
    const httplib::Error err = result.error();
    const bool timed_out =
        err == httplib::Error::ConnectionTimeout ||
        ((err == httplib::Error::Read || err == httplib::Error::Write) &&
         elapsed >= request.timeout * 9 / 10);
    if (timed_out) {
      throw Error(ErrorCode::kTimeout,
                  "no reply from " + endpoint.base + " within " +
                      std::to_string(request.timeout.count()) + " ms");
    }
    throw HttpError(0, "request to " + endpoint.base +
                           " failed: " + httplib::to_string(err));
  }
  if (result->status < 200 || result->status >= 300) {
    throw HttpError(result->status, "endpoint " + endpoint.base +
                                        " returned HTTP " +
                                        std::to_string(result->status));
  }
  const json reply = json::parse(result->body, nullptr, false);
  if (reply.is_discarded() || !reply.is_object()) return std::nullopt;
  const auto choices = reply.find("choices");
  if (choices == reply.end() || !choices->is_array() || choices->empty()) {
    return std::nullopt;
  }
  const json& first = (*choices)[0];
  if (!first.is_object() || !first.contains("message")) return std::nullopt;
  const json& message = first["message"];
  if (!message.is_object() || !message.contains("content") ||
      !message["content"].is_string()) {
    return std::nullopt;
  }
  return message["content"].get<std::string>();
}

std::string Redact(std::string text, const std::string& secret) {
  if (secret.empty()) return text;
  for (auto pos = text.find(secret); pos != std::string::npos;
       pos = text.find(secret, pos)) {
    text.replace(pos, secret.size(), "[redacted]");
  }
  return text;
}

}  // namespace

GraphDigest BuildDigest(const FlatGraph& flat,
                        const std::vector<CategoryHit>& hits) {
  std::set<std::string> hit_ids;
  for (const auto& h : hits) hit_ids.insert(h.node_name);

  GraphDigest digest;
  std::vector<DigestNode> others;
  for (const auto& node : flat.nodes()) {
    DigestNode d;
    d.id = node.id;
    d.op_type = node.record != nullptr ? node.record->op_type : "<opaque>";
    d.is_hit = hit_ids.contains(node.id);
    ++digest.op_histogram[d.op_type];
    if (d.is_hit) {
      if (node.record != nullptr) {
        for (const auto& [name, value] : node.record->attrs) {
          if (name.starts_with('_')) continue;
          d.attrs.push_back(name + "=" + RenderAttr(value));
        }
      }
      digest.nodes.push_back(std::move(d));
    } else {
      others.push_back(std::move(d));
    }
  }
  for (auto& d : others) digest.nodes.push_back(std::move(d));
  return digest;
}

std::string_view VerdictSchema() { return kSchema; }

PromptBundle BuildPrompt(const ScanReport& report, const GraphDigest& digest,
                         size_t budget) {
  const Template& t = PromptTemplate();
  const std::string core = RenderCore(report, digest);
  const std::string histogram = RenderHistogram(digest);

  std::vector<std::string> lines;
  for (const auto& node : digest.nodes) {
    if (!node.is_hit) lines.push_back("  " + node.id + " " + node.op_type + "\n");
  }
  const size_t total = lines.size();

  auto assemble = [&](bool with_histogram, size_t shown) {
    std::string text = t.user_prefix;
    if (with_histogram) {
      text += histogram.substr(1);  // No blank line before the first section.
      text += "\n";
    }
    text += core;
    text += OtherHeader(shown, total);
    if (total == 0) text += "  (none)\n";
    for (size_t i = 0; i < shown; ++i) text += lines[i];
    text += t.user_suffix;
    return text;
  };

  PromptBundle bundle;
  bundle.system_text = t.system_text;
  for (bool with_histogram : {true, false}) {
    const std::string empty = assemble(with_histogram, 0);
    if (empty.size() > budget) continue;
    // Largest prefix of the non-hit nodes that fits; the count in the header
    // only grows by a few bytes, so step back until it fits exactly.
    size_t shown = 0;
    size_t size = empty.size();
    while (shown < total && size + lines[shown].size() <= budget) {
      size += lines[shown].size();
      ++shown;
    }
    std::string text = assemble(with_histogram, shown);
    while (text.size() > budget && shown > 0) text = assemble(with_histogram, --shown);
    if (text.size() > budget) continue;
    bundle.user_text = std::move(text);
    bundle.nodes_omitted = total - shown;
    return bundle;
  }
  throw Error(ErrorCode::kDigestOverflow,
              "hit nodes, chains and evidence need more than the " +
                  std::to_string(budget) + "-byte prompt budget");
}

std::optional<TriageVerdict> ParseVerdictReply(std::string_view content) {
  std::string text = Trim(content);
  if (text.starts_with("```")) {
    const auto newline = text.find('\n');
    const auto close = text.rfind("```");
    if (newline == std::string::npos || close <= newline) return std::nullopt;
    text = Trim(std::string_view(text).substr(newline + 1, close - newline - 1));
  }
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;

  const auto verdict = j.find("verdict");
  if (verdict == j.end() || !verdict->is_string()) return std::nullopt;
  std::string name = verdict->get<std::string>();
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  const auto outcome = ParseTriageOutcome(name);
  if (!outcome) return std::nullopt;

  TriageVerdict tv;
  tv.verdict = *outcome;
  if (auto it = j.find("risk_rationale"); it != j.end()) {
    if (!it->is_string()) return std::nullopt;
    tv.risk_rationale = it->get<std::string>();
  }
  if (auto it = j.find("chains_confirmed"); it != j.end()) {
    if (!it->is_array()) return std::nullopt;
    for (const auto& id : *it) {
      if (!id.is_string()) return std::nullopt;
      tv.chains_confirmed.push_back(id.get<std::string>());
    }
  }
  return tv;
}

TriageVerdict RequestVerdict(const TriageRequest& request) {
  const char* secret =
      request.api_key_env.empty() ? nullptr : std::getenv(request.api_key_env.c_str());
  if (secret == nullptr || *secret == '\0') {
    throw Error(ErrorCode::kAuthMissing,
                "environment variable '" + request.api_key_env +
                    "' holding the API key is not set");
  }
  const Endpoint endpoint = ParseEndpoint(request.endpoint_url);

  json messages = json::array(
      {{{"role", "system"}, {"content", request.prompt.system_text}},
       {{"role", "user"}, {"content", request.prompt.user_text}}});
  const auto first = PostOnce(request, endpoint, secret, messages);
  if (first) {
    if (auto verdict = ParseVerdictReply(*first)) return *verdict;
    messages.push_back({{"role", "assistant"}, {"content", *first}});
  }
  messages.push_back({{"role", "user"}, {"content", kRepairAddendum}});
  if (const auto second = PostOnce(request, endpoint, secret, messages)) {
    if (auto verdict = ParseVerdictReply(*second)) return *verdict;
  }
  TriageVerdict degraded;
  degraded.verdict = TriageOutcome::kIndeterminate;
  degraded.raw_degraded = true;
  return degraded;
}

ScanReport MergeVerdict(ScanReport report, const TriageVerdict& verdict) {
  std::set<std::string> ids;
  for (const auto& f : report.findings) ids.insert(f.id);

  TriageVerdict attached = verdict;
  attached.chains_confirmed.clear();
  for (const auto& id : verdict.chains_confirmed) {
    if (ids.contains(id)) {
      attached.chains_confirmed.push_back(id);
    } else {
      report.warnings.push_back(
          "triage: " + std::string(ErrorCodeName(ErrorCode::kUnknownChainId)) +
          ": finding id " + Quoted(id) + " is not in the report; dropped");
    }
  }
  if (attached.raw_degraded) {
    report.warnings.push_back(
        "triage: endpoint reply was not valid JSON after one retry; verdict "
        "indeterminate");
  }

  Severity floor = Severity::kClean;
  if (verdict.verdict == TriageOutcome::kMalicious) floor = Severity::kSuspicious;
  if (verdict.verdict == TriageOutcome::kSuspicious) {
    floor = Severity::kInformational;
  }
  if (report.verdict < floor) {
    report.warnings.push_back(
        "triage: verdict raised from " + std::string(SeverityName(report.verdict)) +
        " to " + std::string(SeverityName(floor)) + " by a " +
        std::string(TriageOutcomeName(verdict.verdict)) + " triage opinion");
    report.verdict = floor;
  }
  report.triage = std::move(attached);
  return report;
}

ScanReport RunTriage(ScanReport report, const GraphDigest& digest,
                     const TriageOptions& options) {
  const char* secret_env =
      options.api_key_env.empty() ? nullptr : std::getenv(options.api_key_env.c_str());
  const std::string secret = secret_env != nullptr ? secret_env : "";
  try {
    TriageRequest request;
    request.endpoint_url = options.endpoint_url;
    request.model_name = options.model_name;
    request.api_key_env = options.api_key_env;
    request.timeout = options.timeout;
    request.prompt = BuildPrompt(report, digest, options.prompt_budget);
    // The reply is untrusted and may echo the credential back.
    TriageVerdict verdict = RequestVerdict(request);
    verdict.risk_rationale = Redact(std::move(verdict.risk_rationale), secret);
    for (auto& id : verdict.chains_confirmed) id = Redact(std::move(id), secret);
    return MergeVerdict(std::move(report), verdict);
  } catch (const Error& e) {
    report.warnings.push_back("triage failed (" +
                              std::string(ErrorCodeName(e.code())) +
                              "): " + Redact(e.what(), secret));
  } catch (const std::exception& e) {
    report.warnings.push_back("triage failed (Internal): " +
                              Redact(e.what(), secret));
  }
  return report;
}

}  // namespace graphscan
