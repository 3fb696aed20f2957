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

// Rule database mapping op types to the capabilities malware needs (file
// read/write, network send/receive, directory enumeration, opaque callback
// execution), and the per-node classifier built on it.

#ifndef GRAPHSCAN_OP_TAXONOMY_H_
#define GRAPHSCAN_OP_TAXONOMY_H_

#include <filesystem>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "graphscan/graph.h"

namespace graphscan {

// Declaration order is the output order of ClassifyNode.
enum class CoreFunction {
  kFileRead,
  kFileWrite,
  kNetworkSend,
  kNetworkReceive,
  kEnumeration,
  kOpaqueExec,
};

inline constexpr CoreFunction kAllCoreFunctions[] = {
    CoreFunction::kFileRead,       CoreFunction::kFileWrite,
    CoreFunction::kNetworkSend,    CoreFunction::kNetworkReceive,
    CoreFunction::kEnumeration,    CoreFunction::kOpaqueExec,
};

std::string_view CoreFunctionName(CoreFunction category);
std::optional<CoreFunction> ParseCoreFunction(std::string_view name);

// Sources start taint; sinks end chains.
bool IsSourceCategory(CoreFunction category);
bool IsSinkCategory(CoreFunction category);
bool IsNetworkCategory(CoreFunction category);

enum class Confidence { kExplicit, kHidden, kInformational };

std::string_view ConfidenceName(Confidence confidence);
// Higher is stronger: Explicit > Hidden > Informational.
int ConfidenceRank(Confidence confidence);

class AttrPredicate {
 public:
  enum class Kind {
    kAttrStrMatches,
    kAttrStrNotIn,
    kAttrListNonEmpty,
    kAttrListAnyMatches,
  };

  // Throws Error(kRuleParseError) when the pattern is not a valid regex.
  static AttrPredicate StrMatches(std::string attr, std::string pattern);
  static AttrPredicate StrNotIn(std::string attr,
                                std::vector<std::string> values);
  static AttrPredicate ListNonEmpty(std::string attr);
  static AttrPredicate ListAnyMatches(std::string attr, std::string pattern);

  Kind kind() const { return kind_; }
  const std::string& attr() const { return attr_; }
  const std::string& pattern() const { return pattern_; }
  // Sorted and deduplicated.
  const std::vector<std::string>& values() const { return values_; }

  // Total: an absent attribute, or one of the wrong type, is false.
  bool Evaluate(const AttrMap& attrs) const;

  std::string Summary() const;

  bool operator==(const AttrPredicate& other) const {
    return kind_ == other.kind_ && attr_ == other.attr_ &&
           pattern_ == other.pattern_ && values_ == other.values_;
  }

 private:
  AttrPredicate(Kind kind, std::string attr) : kind_(kind), attr_(std::move(attr)) {}
  void Compile();
  bool Matches(std::string_view bytes) const;

  Kind kind_;
  std::string attr_;
  std::string pattern_;
  std::vector<std::string> values_;
  // Shared so that copies of a RuleSet reuse the compiled automaton.
  std::shared_ptr<const std::regex> regex_;
};

std::string_view PredicateKindName(AttrPredicate::Kind kind);

bool EvaluatePredicate(const AttrPredicate& predicate, const AttrMap& attrs);

struct OpRule {
  std::string op_type;
  std::vector<CoreFunction> categories;  // Non-empty.
  std::optional<AttrPredicate> predicate;
  Confidence confidence = Confidence::kHidden;
  std::string note;

  // Identity for override replacement and duplicate detection.
  bool SameKey(const OpRule& other) const {
    return op_type == other.op_type && predicate == other.predicate;
  }
};

class RuleSet {
 public:
  enum class Origin { kBuiltin, kFileOverride };

  RuleSet(std::vector<OpRule> rules, std::string version, Origin origin,
          std::filesystem::path override_path = {});

  const std::vector<OpRule>& rules() const { return rules_; }
  const std::string& version() const { return version_; }
  Origin origin() const { return origin_; }
  const std::filesystem::path& override_path() const { return override_path_; }
  size_t size() const { return rules_.size(); }

  // Rules for `op_type` in declaration order.
  std::vector<const OpRule*> RulesFor(std::string_view op_type) const;

 private:
  std::vector<OpRule> rules_;
  std::string version_;
  Origin origin_;
  std::filesystem::path override_path_;
};

inline constexpr std::string_view kBuiltinRulesVersion = "builtin-2026.1";

// Console sinks PrintV2 may use without being treated as a file write.
inline constexpr std::string_view kConsoleStreams[] = {
    "stderr", "stdout", "log(info)", "log(warning)", "log(error)"};

const RuleSet& BuiltinRules();

// Builtin rules plus the entries of an override file. An override rule with
// the same (op_type, predicate) as a builtin replaces it in place; new rules
// are appended. Throws kRuleParseError (with line/field detail) or
// kDuplicateRule.
RuleSet LoadRules(const std::optional<std::filesystem::path>& override_path);

// Parses override text directly; `origin_name` only labels diagnostics.
RuleSet LoadRulesFromText(std::string_view text,
                          const std::filesystem::path& origin_name);

struct CategoryHit {
  std::string node_name;
  CoreFunction category = CoreFunction::kFileRead;
  std::string rule_note;
  Confidence confidence = Confidence::kHidden;

  bool operator==(const CategoryHit&) const = default;
};

// All matching rules, at most one hit per category (the highest-confidence
// rule wins, earliest declaration on ties), ordered by category.
// `node_id` overrides the name recorded in the hits (used for qualified ids).
std::vector<CategoryHit> ClassifyNode(const NodeRecord& node,
                                      const RuleSet& rules,
                                      std::string_view node_id = {});

// Replaces invalid UTF-8 sequences with U+FFFD.
std::string SanitizeUtf8(std::string_view bytes);

}  // namespace graphscan

#endif  // GRAPHSCAN_OP_TAXONOMY_H_
