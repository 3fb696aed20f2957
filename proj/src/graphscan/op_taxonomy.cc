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

#include "graphscan/op_taxonomy.h"

#include <google/protobuf/io/tokenizer.h>
#include <google/protobuf/text_format.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "graphscan/errors.h"
#include "graphscan/rules.pb.h"

namespace graphscan {
namespace {

using C = CoreFunction;

OpRule Rule(std::string op, std::vector<CoreFunction> categories,
            Confidence confidence, std::string note,
            std::optional<AttrPredicate> predicate = std::nullopt) {
  return OpRule{std::move(op), std::move(categories), std::move(predicate),
                confidence, std::move(note)};
}

std::vector<OpRule> MakeBuiltinRules() {
  const auto kHidden = Confidence::kHidden;
  const auto kExplicit = Confidence::kExplicit;
  const auto kInfo = Confidence::kInformational;
  std::vector<std::string> console(std::begin(kConsoleStreams),
                                   std::end(kConsoleStreams));
  return {
      // Persistent ops whose file or network capability is incidental to
      // their documented purpose.
      Rule("FixedLengthRecordDatasetV2", {C::kFileRead}, kHidden,
           "Read a CSV file to create a dataset"),
      Rule("InitializeTableFromTextFile", {C::kFileRead}, kHidden,
           "Read a key-value file to create a table"),
      Rule("InitializeTableFromTextFileV2", {C::kFileRead}, kHidden,
           "Read a key-value file to create a table"),
      Rule("SaveSlices", {C::kFileWrite}, kHidden,
           "Write Tensor list into a file"),
      Rule("PrintV2", {C::kFileWrite}, kHidden, "Append to a file",
           AttrPredicate::StrNotIn("output_stream", console)),
      Rule("RpcClient", {C::kNetworkReceive}, kHidden,
           "Receive a payload from a host"),
      // The call's response future carries the server reply, so it is a
      // receive as well as a send.
      Rule("RpcCall", {C::kNetworkSend, C::kNetworkReceive}, kHidden,
           "Send a payload to a host"),
      Rule("DebugIdentity", {C::kNetworkSend}, kHidden,
           "Send a payload to a host",
           AttrPredicate::ListAnyMatches("debug_urls",
                                         "^(grpc|http|https)://")),

      Rule("ReadFile", {C::kFileRead}, kExplicit, "Read a whole file"),
      Rule("WriteFile", {C::kFileWrite}, kExplicit, "Write a whole file"),

      Rule("TextLineDataset", {C::kFileRead}, kHidden,
           "Read lines of a text file as a dataset"),
      Rule("TFRecordDataset", {C::kFileRead}, kHidden,
           "Read TFRecord files as a dataset"),
      Rule("TFRecordDatasetV2", {C::kFileRead}, kHidden,
           "Read TFRecord files as a dataset"),
      Rule("MatchingFiles", {C::kEnumeration}, kHidden,
           "List files matching a glob pattern"),
      Rule("EagerPyFunc", {C::kOpaqueExec}, kHidden,
           "Invoke a Python callback that is not serialized with the model"),
      Rule("PyFunc", {C::kOpaqueExec}, kHidden,
           "Invoke a Python callback that is not serialized with the model"),
      Rule("PyFuncStateless", {C::kOpaqueExec}, kHidden,
           "Invoke a Python callback that is not serialized with the model"),

      // Checkpointing is routine; these only matter inside a chain.
      Rule("Save", {C::kFileWrite}, kInfo, "Checkpoint save"),
      Rule("SaveV2", {C::kFileWrite}, kInfo, "Checkpoint save"),
      Rule("Restore", {C::kFileRead}, kInfo, "Checkpoint restore"),
      Rule("RestoreV2", {C::kFileRead}, kInfo, "Checkpoint restore"),
  };
}

// Decodes one UTF-8 sequence starting at `i`; returns its length, or 0 when
// the sequence is invalid (overlong, surrogate, out of range, truncated).
size_t ValidSequenceLength(std::string_view s, size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) return 1;
  size_t len;
  uint32_t cp;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    return 0;
  }
  if (i + len > s.size()) return 0;
  for (size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) return 0;
    cp = (cp << 6) | (b & 0x3F);
  }
  static constexpr uint32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    return 0;
  }
  return len;
}

std::string Location(const google::protobuf::TextFormat::ParseInfoTree* tree,
                     const google::protobuf::FieldDescriptor* field,
                     int index = -1) {
  // Repeated fields need an element index; without one there is no location.
  if (tree == nullptr || field == nullptr) return {};
  if (field->is_repeated() != (index >= 0)) return {};
  const auto loc = tree->GetLocation(field, index);
  if (loc.line < 0) return {};
  return " (line " + std::to_string(loc.line + 1) + ")";
}

class FirstErrorCollector : public google::protobuf::io::ErrorCollector {
 public:
  void AddError(int line, google::protobuf::io::ColumnNumber column,
                const std::string& message) override {
    if (!message_.empty()) return;
    message_ = "line " + std::to_string(line + 1) + ", column " +
               std::to_string(column + 1) + ": " + message;
  }
  const std::string& message() const { return message_; }

 private:
  std::string message_;
};

AttrPredicate ConvertPredicate(
    const rules::Predicate& proto, const std::string& where,
    const google::protobuf::TextFormat::ParseInfoTree* tree) {
  const auto* desc = rules::Predicate::descriptor();
  auto fail = [&](const std::string& field, const std::string& what) {
    throw Error(ErrorCode::kRuleParseError,
                where + ": predicate." + field + " " + what +
                    Location(tree, desc->FindFieldByName(field)));
  };
  if (proto.attr().empty()) fail("attr", "is required");
  const bool has_pattern = !proto.pattern().empty();
  const bool has_values = proto.values_size() > 0;
  try {
    switch (proto.kind()) {
      case rules::AttrStrMatches:
      case rules::AttrListAnyMatches:
        if (!has_pattern) fail("pattern", "is required for this kind");
        if (has_values) fail("values", "is not allowed for this kind");
        return proto.kind() == rules::AttrStrMatches
                   ? AttrPredicate::StrMatches(proto.attr(), proto.pattern())
                   : AttrPredicate::ListAnyMatches(proto.attr(),
                                                   proto.pattern());
      case rules::AttrStrNotIn:
        if (!has_values) fail("values", "is required for AttrStrNotIn");
        if (has_pattern) fail("pattern", "is not allowed for AttrStrNotIn");
        return AttrPredicate::StrNotIn(
            proto.attr(), {proto.values().begin(), proto.values().end()});
      case rules::AttrListNonEmpty:
        if (has_pattern || has_values) {
          fail(has_pattern ? "pattern" : "values",
               "is not allowed for AttrListNonEmpty");
        }
        return AttrPredicate::ListNonEmpty(proto.attr());
      default:
        fail("kind", "is required");
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kRuleParseError &&
        std::string_view(e.what()).starts_with(where)) {
      throw;
    }
    throw Error(ErrorCode::kRuleParseError,
                where + ": predicate.pattern: " + e.what() +
                    Location(tree, desc->FindFieldByName("pattern")));
  }
  throw Error(ErrorCode::kInternal, "unreachable");
}

OpRule ConvertRule(const rules::Rule& proto, int index,
                   const google::protobuf::TextFormat::ParseInfoTree* tree) {
  const auto* desc = rules::Rule::descriptor();
  std::string where = "rule #" + std::to_string(index + 1);
  if (!proto.op_type().empty()) where += " ('" + proto.op_type() + "')";
  auto fail = [&](const std::string& field, const std::string& what) {
    throw Error(ErrorCode::kRuleParseError,
                where + ": field '" + field + "' " + what +
                    Location(tree, desc->FindFieldByName(field)));
  };

  OpRule rule;
  if (proto.op_type().empty()) fail("op_type", "is required");
  rule.op_type = proto.op_type();
  if (proto.categories_size() == 0) fail("categories", "must not be empty");
  for (int c : proto.categories()) {
    if (c <= 0 || c > static_cast<int>(std::size(kAllCoreFunctions))) {
      fail("categories", "contains an unspecified category");
    }
    const CoreFunction category = kAllCoreFunctions[c - 1];
    if (std::find(rule.categories.begin(), rule.categories.end(), category) ==
        rule.categories.end()) {
      rule.categories.push_back(category);
    }
  }
  switch (proto.confidence()) {
    case rules::Explicit:
      rule.confidence = Confidence::kExplicit;
      break;
    case rules::Hidden:
      rule.confidence = Confidence::kHidden;
      break;
    case rules::Informational:
      rule.confidence = Confidence::kInformational;
      break;
    default:
      fail("confidence", "is required");
  }
  rule.note = proto.note();
  if (proto.has_predicate()) {
    const auto* nested =
        tree == nullptr
            ? nullptr
            : tree->GetTreeForNested(desc->FindFieldByName("predicate"), -1);
    rule.predicate = ConvertPredicate(proto.predicate(), where, nested);
    if (rule.confidence == Confidence::kExplicit) {
      fail("predicate", "is not allowed on Explicit rules");
    }
  }
  return rule;
}

}  // namespace

std::string_view CoreFunctionName(CoreFunction category) {
  switch (category) {
    case C::kFileRead:
      return "FileRead";
    case C::kFileWrite:
      return "FileWrite";
    case C::kNetworkSend:
      return "NetworkSend";
    case C::kNetworkReceive:
      return "NetworkReceive";
    case C::kEnumeration:
      return "Enumeration";
    case C::kOpaqueExec:
      return "OpaqueExec";
  }
  return "Unknown";
}

std::optional<CoreFunction> ParseCoreFunction(std::string_view name) {
  for (auto category : kAllCoreFunctions) {
    if (CoreFunctionName(category) == name) return category;
  }
  return std::nullopt;
}

bool IsSourceCategory(CoreFunction category) {
  return category == C::kFileRead || category == C::kNetworkReceive ||
         category == C::kEnumeration;
}

bool IsSinkCategory(CoreFunction category) {
  return category == C::kFileWrite || category == C::kNetworkSend ||
         category == C::kOpaqueExec;
}

bool IsNetworkCategory(CoreFunction category) {
  return category == C::kNetworkSend || category == C::kNetworkReceive;
}

std::string_view ConfidenceName(Confidence confidence) {
  switch (confidence) {
    case Confidence::kExplicit:
      return "Explicit";
    case Confidence::kHidden:
      return "Hidden";
    case Confidence::kInformational:
      return "Informational";
  }
  return "Unknown";
}

int ConfidenceRank(Confidence confidence) {
  switch (confidence) {
    case Confidence::kExplicit:
      return 2;
    case Confidence::kHidden:
      return 1;
    case Confidence::kInformational:
      return 0;
  }
  return -1;
}

std::string_view PredicateKindName(AttrPredicate::Kind kind) {
  switch (kind) {
    case AttrPredicate::Kind::kAttrStrMatches:
      return "AttrStrMatches";
    case AttrPredicate::Kind::kAttrStrNotIn:
      return "AttrStrNotIn";
    case AttrPredicate::Kind::kAttrListNonEmpty:
      return "AttrListNonEmpty";
    case AttrPredicate::Kind::kAttrListAnyMatches:
      return "AttrListAnyMatches";
  }
  return "Unknown";
}

AttrPredicate AttrPredicate::StrMatches(std::string attr, std::string pattern) {
  AttrPredicate p(Kind::kAttrStrMatches, std::move(attr));
  p.pattern_ = std::move(pattern);
  p.Compile();
  return p;
}

AttrPredicate AttrPredicate::StrNotIn(std::string attr,
                                      std::vector<std::string> values) {
  AttrPredicate p(Kind::kAttrStrNotIn, std::move(attr));
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  p.values_ = std::move(values);
  return p;
}

AttrPredicate AttrPredicate::ListNonEmpty(std::string attr) {
  return AttrPredicate(Kind::kAttrListNonEmpty, std::move(attr));
}

AttrPredicate AttrPredicate::ListAnyMatches(std::string attr,
                                            std::string pattern) {
  AttrPredicate p(Kind::kAttrListAnyMatches, std::move(attr));
  p.pattern_ = std::move(pattern);
  p.Compile();
  return p;
}

void AttrPredicate::Compile() {
  try {
    regex_ = std::make_shared<const std::regex>(pattern_,
                                                std::regex::ECMAScript);
  } catch (const std::regex_error& e) {
    throw Error(ErrorCode::kRuleParseError,
                "invalid regex '" + pattern_ + "': " + e.what());
  }
}

bool AttrPredicate::Matches(std::string_view bytes) const {
  const std::string text = SanitizeUtf8(bytes);
  return std::regex_search(text, *regex_);
}

bool AttrPredicate::Evaluate(const AttrMap& attrs) const {
  auto it = attrs.find(attr_);
  if (it == attrs.end()) return false;
  const AttrValue& value = it->second;
  switch (kind_) {
    case Kind::kAttrStrMatches: {
      const auto* s = std::get_if<StrAttr>(&value);
      return s != nullptr && Matches(s->value);
    }
    case Kind::kAttrStrNotIn: {
      const auto* s = std::get_if<StrAttr>(&value);
      if (s == nullptr) return false;
      return !std::binary_search(values_.begin(), values_.end(),
                                 SanitizeUtf8(s->value));
    }
    case Kind::kAttrListNonEmpty:
      if (const auto* l = std::get_if<StrListAttr>(&value)) {
        return !l->values.empty();
      }
      if (const auto* t = std::get_if<TensorStringsAttr>(&value)) {
        return !t->values.empty();
      }
      if (const auto* f = std::get_if<FuncListAttr>(&value)) {
        return !f->names.empty();
      }
      return false;
    case Kind::kAttrListAnyMatches: {
      const std::vector<std::string>* elements = nullptr;
      if (const auto* l = std::get_if<StrListAttr>(&value)) {
        elements = &l->values;
      } else if (const auto* t = std::get_if<TensorStringsAttr>(&value)) {
        elements = &t->values;
      }
      if (elements == nullptr) return false;
      return std::any_of(elements->begin(), elements->end(),
                         [this](const std::string& e) { return Matches(e); });
    }
  }
  return false;
}

std::string AttrPredicate::Summary() const {
  std::string out(PredicateKindName(kind_));
  out += "(" + attr_;
  if (!pattern_.empty()) out += ", /" + pattern_ + "/";
  if (!values_.empty()) {
    out += ", {";
    for (size_t i = 0; i < values_.size(); ++i) {
      if (i > 0) out += ",";
      out += values_[i];
    }
    out += "}";
  }
  out += ")";
  return out;
}

bool EvaluatePredicate(const AttrPredicate& predicate, const AttrMap& attrs) {
  return predicate.Evaluate(attrs);
}

RuleSet::RuleSet(std::vector<OpRule> rules, std::string version, Origin origin,
                 std::filesystem::path override_path)
    : rules_(std::move(rules)),
      version_(std::move(version)),
      origin_(origin),
      override_path_(std::move(override_path)) {}

std::vector<const OpRule*> RuleSet::RulesFor(std::string_view op_type) const {
  std::vector<const OpRule*> out;
  for (const auto& rule : rules_) {
    if (rule.op_type == op_type) out.push_back(&rule);
  }
  return out;
}

const RuleSet& BuiltinRules() {
  static const RuleSet* const kRules = new RuleSet(
      MakeBuiltinRules(), std::string(kBuiltinRulesVersion),
      RuleSet::Origin::kBuiltin);
  return *kRules;
}

RuleSet LoadRulesFromText(std::string_view text,
                          const std::filesystem::path& origin_name) {
  const std::string label = origin_name.string();
  rules::RuleFile file;
  google::protobuf::TextFormat::Parser parser;
  FirstErrorCollector errors;
  google::protobuf::TextFormat::ParseInfoTree tree;
  parser.RecordErrorsTo(&errors);
  parser.WriteLocationsTo(&tree);
  if (!parser.ParseFromString(std::string(text), &file)) {
    throw Error(ErrorCode::kRuleParseError, label + ": " + errors.message());
  }

  const auto* rule_field = rules::RuleFile::descriptor()->FindFieldByName("rule");
  std::vector<OpRule> overrides;
  for (int i = 0; i < file.rule_size(); ++i) {
    OpRule rule;
    try {
      rule = ConvertRule(file.rule(i), i, tree.GetTreeForNested(rule_field, i));
    } catch (const Error& e) {
      throw Error(e.code(), label + ": " + e.what());
    }
    for (const auto& previous : overrides) {
      if (previous.SameKey(rule)) {
        throw Error(ErrorCode::kDuplicateRule,
                    label + ": rule #" + std::to_string(i + 1) + " ('" +
                        rule.op_type +
                        "') duplicates an earlier rule with the same "
                        "op_type and predicate" +
                        Location(&tree, rule_field, i));
      }
    }
    overrides.push_back(std::move(rule));
  }

  std::vector<OpRule> merged = BuiltinRules().rules();
  for (auto& rule : overrides) {
    auto it = std::find_if(merged.begin(), merged.end(),
                           [&](const OpRule& r) { return r.SameKey(rule); });
    if (it != merged.end()) {
      *it = std::move(rule);
    } else {
      merged.push_back(std::move(rule));
    }
  }
  const std::string version =
      std::string(kBuiltinRulesVersion) + "+" +
      (file.version().empty() ? std::string("override") : file.version());
  return RuleSet(std::move(merged), version, RuleSet::Origin::kFileOverride,
                 origin_name);
}

RuleSet LoadRules(const std::optional<std::filesystem::path>& override_path) {
  if (!override_path) return BuiltinRules();
  std::ifstream in(*override_path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kNotFound,
                "cannot open rule file " + override_path->string());
  }
  std::ostringstream text;
  text << in.rdbuf();
  return LoadRulesFromText(text.str(), *override_path);
}

std::vector<CategoryHit> ClassifyNode(const NodeRecord& node,
                                      const RuleSet& rules,
                                      std::string_view node_id) {
  std::vector<CategoryHit> hits;
  for (const OpRule* rule : rules.RulesFor(node.op_type)) {
    if (rule->predicate && !rule->predicate->Evaluate(node.attrs)) continue;
    for (CoreFunction category : rule->categories) {
      auto it = std::find_if(hits.begin(), hits.end(), [&](const auto& h) {
        return h.category == category;
      });
      if (it == hits.end()) {
        hits.push_back({node_id.empty() ? node.name : std::string(node_id),
                        category, rule->note, rule->confidence});
      } else if (ConfidenceRank(rule->confidence) >
                 ConfidenceRank(it->confidence)) {
        it->confidence = rule->confidence;
        it->rule_note = rule->note;
      }
    }
  }
  std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) {
    return a.category < b.category;
  });
  return hits;
}

std::string SanitizeUtf8(std::string_view bytes) {
  std::string out;
  out.reserve(bytes.size());
  size_t i = 0;
  while (i < bytes.size()) {
    const size_t len = ValidSequenceLength(bytes, i);
    if (len == 0) {
      out += "\xEF\xBF\xBD";
      ++i;
    } else {
      out.append(bytes.substr(i, len));
      i += len;
    }
  }
  return out;
}

}  // namespace graphscan
