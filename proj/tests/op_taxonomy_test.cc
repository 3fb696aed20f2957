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

#include <gtest/gtest.h>

#include <random>

#include "graphscan/errors.h"
#include "test_util.h"

namespace graphscan {
namespace {

using ::graphscan::testing::Node;
using ::graphscan::testing::ScratchDir;
using ::graphscan::testing::WriteFile;

struct TableRow {
  const char* op_type;
  CoreFunction category;
  const char* note;
  AttrMap gating_attrs;
};

// The seven rows of the published hidden-function table, each with the
// attributes a node needs to pass the rule's gate.
std::vector<TableRow> PublishedRows() {
  return {
      {"FixedLengthRecordDatasetV2", CoreFunction::kFileRead,
       "Read a CSV file to create a dataset", {}},
      {"InitializeTableFromTextFile", CoreFunction::kFileRead,
       "Read a key-value file to create a table", {}},
      {"SaveSlices", CoreFunction::kFileWrite, "Write Tensor list into a file", {}},
      {"PrintV2", CoreFunction::kFileWrite, "Append to a file",
       {{"output_stream", StrAttr{"file:///tmp/graphscan-sandbox/out.txt"}}}},
      {"RpcClient", CoreFunction::kNetworkReceive, "Receive a payload from a host", {}},
      {"RpcCall", CoreFunction::kNetworkSend, "Send a payload to a host", {}},
      {"DebugIdentity", CoreFunction::kNetworkSend, "Send a payload to a host",
       {{"debug_urls", StrListAttr{{"grpc://127.0.0.1:39001"}}}}},
  };
}

TEST(BuiltinRulesTest, PublishedTableIsCovered) {
  for (const auto& row : PublishedRows()) {
    SCOPED_TRACE(row.op_type);
    const auto hits =
        ClassifyNode(Node("n", row.op_type, {}, row.gating_attrs), BuiltinRules());
    auto it = std::find_if(hits.begin(), hits.end(), [&](const CategoryHit& h) {
      return h.category == row.category;
    });
    ASSERT_NE(it, hits.end());
    EXPECT_EQ(it->rule_note, row.note);
    EXPECT_EQ(it->confidence, Confidence::kHidden);
  }
}

TEST(BuiltinRulesTest, ShapeAndVersion) {
  const RuleSet& rules = BuiltinRules();
  EXPECT_EQ(rules.size(), 21u);
  EXPECT_EQ(rules.version(), kBuiltinRulesVersion);
  EXPECT_EQ(rules.origin(), RuleSet::Origin::kBuiltin);
  for (const auto& rule : rules.rules()) {
    EXPECT_FALSE(rule.categories.empty()) << rule.op_type;
    EXPECT_FALSE(rule.note.empty()) << rule.op_type;
    if (rule.confidence == Confidence::kExplicit) {
      EXPECT_FALSE(rule.predicate.has_value()) << rule.op_type;
    }
  }
  // No two builtin rules share a key.
  for (size_t i = 0; i < rules.size(); ++i) {
    for (size_t j = i + 1; j < rules.size(); ++j) {
      EXPECT_FALSE(rules.rules()[i].SameKey(rules.rules()[j]));
    }
  }
}

TEST(BuiltinRulesTest, ExplicitApis) {
  auto read = ClassifyNode(Node("r", "ReadFile"), BuiltinRules());
  ASSERT_EQ(read.size(), 1u);
  EXPECT_EQ(read[0].category, CoreFunction::kFileRead);
  EXPECT_EQ(read[0].confidence, Confidence::kExplicit);
  auto write = ClassifyNode(Node("w", "WriteFile"), BuiltinRules());
  ASSERT_EQ(write.size(), 1u);
  EXPECT_EQ(write[0].category, CoreFunction::kFileWrite);
}

TEST(BuiltinRulesTest, RpcCallIsSendAndReceive) {
  const auto hits = ClassifyNode(Node("c", "RpcCall"), BuiltinRules(), "main/c");
  ASSERT_EQ(hits.size(), 2u);
  EXPECT_EQ(hits[0].category, CoreFunction::kNetworkSend);
  EXPECT_EQ(hits[1].category, CoreFunction::kNetworkReceive);
  EXPECT_EQ(hits[0].node_name, "main/c");
}

TEST(BuiltinRulesTest, PrintV2ConsoleStreamsAreNotWrites) {
  for (std::string_view stream : kConsoleStreams) {
    AttrMap attrs{{"output_stream", StrAttr{std::string(stream)}}};
    EXPECT_TRUE(ClassifyNode(Node("p", "PrintV2", {}, attrs), BuiltinRules()).empty())
        << stream;
  }
  AttrMap to_file{{"output_stream", StrAttr{"file:///tmp/x"}}};
  EXPECT_EQ(ClassifyNode(Node("p", "PrintV2", {}, to_file), BuiltinRules()).size(), 1u);
  // Without the attribute the gate cannot be evaluated and does not fire.
  EXPECT_TRUE(ClassifyNode(Node("p", "PrintV2"), BuiltinRules()).empty());
}

TEST(BuiltinRulesTest, DebugIdentityNeedsRemoteUrl) {
  auto with = [](std::vector<std::string> urls) {
    return ClassifyNode(Node("d", "DebugIdentity", {},
                             {{"debug_urls", StrListAttr{std::move(urls)}}}),
                        BuiltinRules());
  };
  EXPECT_TRUE(with({}).empty());
  EXPECT_TRUE(with({"file:///tmp/dump"}).empty());
  EXPECT_EQ(with({"file:///tmp/dump", "http://127.0.0.1:8000"}).size(), 1u);
}

TEST(BuiltinRulesTest, UnlistedOpsAreSilent) {
  for (const char* op : {"MatMul", "Const", "Placeholder", "Identity", "NoOp"}) {
    EXPECT_TRUE(ClassifyNode(Node("n", op), BuiltinRules()).empty()) << op;
  }
}

TEST(AttrPredicateTest, StrMatches) {
  const auto p = AttrPredicate::StrMatches("s", "^file://");
  EXPECT_TRUE(p.Evaluate({{"s", StrAttr{"file:///x"}}}));
  EXPECT_FALSE(p.Evaluate({{"s", StrAttr{"stderr"}}}));
  EXPECT_FALSE(p.Evaluate({{"s", IntAttr{3}}}));
  EXPECT_FALSE(p.Evaluate({}));
  EXPECT_EQ(p.Summary(), "AttrStrMatches(s, /^file:///)");
}

TEST(AttrPredicateTest, StrNotInSortsValues) {
  const auto p = AttrPredicate::StrNotIn("s", {"b", "a", "b"});
  EXPECT_EQ(p.values(), (std::vector<std::string>{"a", "b"}));
  EXPECT_TRUE(p.Evaluate({{"s", StrAttr{"c"}}}));
  EXPECT_FALSE(p.Evaluate({{"s", StrAttr{"a"}}}));
  EXPECT_EQ(p, AttrPredicate::StrNotIn("s", {"a", "b"}));
}

TEST(AttrPredicateTest, ListKinds) {
  const auto non_empty = AttrPredicate::ListNonEmpty("l");
  EXPECT_TRUE(non_empty.Evaluate({{"l", StrListAttr{{"x"}}}}));
  EXPECT_FALSE(non_empty.Evaluate({{"l", StrListAttr{}}}));
  const auto any = AttrPredicate::ListAnyMatches("l", "x$");
  EXPECT_TRUE(any.Evaluate({{"l", TensorStringsAttr{{"a", "bx"}}}}));
  EXPECT_FALSE(any.Evaluate({{"l", StrListAttr{{"a"}}}}));
}

TEST(AttrPredicateTest, InvalidRegexIsRuleParseError) {
  try {
    AttrPredicate::StrMatches("s", "([");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRuleParseError);
  }
}

// Property: evaluation never throws, whatever bytes the attribute carries.
TEST(AttrPredicateTest, TotalOverArbitraryBytes) {
  std::mt19937 rng(7);
  const auto p = AttrPredicate::StrMatches("s", "^(grpc|http)://.*$");
  const auto q = AttrPredicate::ListAnyMatches("l", "a+b");
  for (int i = 0; i < 500; ++i) {
    std::string bytes(rng() % 40, '\0');
    for (auto& c : bytes) c = static_cast<char>(rng());
    EXPECT_NO_THROW(p.Evaluate({{"s", StrAttr{bytes}}}));
    EXPECT_NO_THROW(q.Evaluate({{"l", StrListAttr{{bytes, bytes}}}}));
  }
}

TEST(SanitizeUtf8Test, ReplacesInvalidSequences) {
  EXPECT_EQ(SanitizeUtf8("plain"), "plain");
  EXPECT_EQ(SanitizeUtf8("caf\xc3\xa9"), "caf\xc3\xa9");
  EXPECT_EQ(SanitizeUtf8("a\xff" "b"), "a\xef\xbf\xbd" "b");
  EXPECT_EQ(SanitizeUtf8("\xc0\xaf"), "\xef\xbf\xbd\xef\xbf\xbd");  // overlong
  EXPECT_EQ(SanitizeUtf8("\xe2\x82"), "\xef\xbf\xbd\xef\xbf\xbd");  // truncated
}

constexpr char kOverride[] = R"pb(
  version: "site-1"
  rule {
    op_type: "PrintV2"
    categories: FileWrite
    confidence: Explicit
    note: "Any PrintV2"
  }
  rule {
    op_type: "FixedLengthRecordDatasetV2"
    categories: FileRead
    confidence: Explicit
    note: "Replaced note"
  }
)pb";

TEST(LoadRulesTest, OverrideReplacesAndAppends) {
  const RuleSet rules = LoadRulesFromText(kOverride, "site.textproto");
  // PrintV2 without a predicate is a new key; the dataset rule replaces the
  // builtin in place.
  EXPECT_EQ(rules.size(), BuiltinRules().size() + 1);
  EXPECT_EQ(rules.version(), "builtin-2026.1+site-1");
  EXPECT_EQ(rules.origin(), RuleSet::Origin::kFileOverride);
  EXPECT_EQ(rules.rules()[0].op_type, "FixedLengthRecordDatasetV2");
  EXPECT_EQ(rules.rules()[0].note, "Replaced note");
  EXPECT_EQ(rules.rules().back().note, "Any PrintV2");

  // The explicit PrintV2 rule outranks the gated builtin.
  AttrMap attrs{{"output_stream", StrAttr{"file:///tmp/x"}}};
  const auto hits = ClassifyNode(Node("p", "PrintV2", {}, attrs), rules);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].confidence, Confidence::kExplicit);
  EXPECT_EQ(hits[0].rule_note, "Any PrintV2");
}

TEST(LoadRulesTest, FromFile) {
  ScratchDir dir("rules");
  WriteFile(dir.path() / "r.textproto", kOverride);
  EXPECT_EQ(LoadRules(dir.path() / "r.textproto").size(), BuiltinRules().size() + 1);
  EXPECT_EQ(LoadRules(std::nullopt).size(), BuiltinRules().size());
  try {
    LoadRules(dir.path() / "missing.textproto");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotFound);
  }
}

struct BadRuleCase {
  const char* name;
  const char* text;
  ErrorCode code;
  const char* fragment;
};

class BadRuleTest : public ::testing::TestWithParam<BadRuleCase> {};

TEST_P(BadRuleTest, IsRejected) {
  const BadRuleCase& c = GetParam();
  try {
    LoadRulesFromText(c.text, "bad.textproto");
    FAIL() << "accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), c.code) << e.what();
    EXPECT_NE(std::string(e.what()).find(c.fragment), std::string::npos)
        << e.what();
  }
}

INSTANTIATE_TEST_SUITE_P(
    Cases, BadRuleTest,
    ::testing::Values(
        BadRuleCase{"UnknownField", "rule {\n  op_typ: \"X\"\n}\n",
                    ErrorCode::kRuleParseError, "line 2"},
        BadRuleCase{"MissingOp",
                    "rule { categories: FileRead confidence: Hidden }",
                    ErrorCode::kRuleParseError, "op_type"},
        BadRuleCase{"NoCategories", "rule { op_type: \"X\" confidence: Hidden }",
                    ErrorCode::kRuleParseError, "categories"},
        BadRuleCase{"NoConfidence", "rule { op_type: \"X\" categories: FileRead }",
                    ErrorCode::kRuleParseError, "confidence"},
        BadRuleCase{"BadRegex",
                    "rule { op_type: \"X\" categories: FileRead confidence: Hidden\n"
                    "  predicate { kind: AttrStrMatches attr: \"a\" pattern: \"([\" } }",
                    ErrorCode::kRuleParseError, "pattern"},
        BadRuleCase{"NotInWithoutValues",
                    "rule { op_type: \"X\" categories: FileRead confidence: Hidden\n"
                    "  predicate { kind: AttrStrNotIn attr: \"a\" } }",
                    ErrorCode::kRuleParseError, "values"},
        BadRuleCase{"ExplicitWithPredicate",
                    "rule { op_type: \"X\" categories: FileRead confidence: Explicit\n"
                    "  predicate { kind: AttrListNonEmpty attr: \"a\" } }",
                    ErrorCode::kRuleParseError, "predicate"},
        BadRuleCase{"Duplicate",
                    "rule { op_type: \"X\" categories: FileRead confidence: Hidden }\n"
                    "rule { op_type: \"X\" categories: FileWrite confidence: Hidden }\n",
                    ErrorCode::kDuplicateRule, "rule #2"}),
    [](const auto& info) { return std::string(info.param.name); });

TEST(ClassifyNodeTest, HighestConfidenceWinsPerCategory) {
  constexpr char kText[] = R"pb(
    rule { op_type: "Mystery" categories: FileRead confidence: Informational note: "low" }
    rule {
      op_type: "Mystery"
      categories: [FileRead, NetworkSend]
      confidence: Hidden
      note: "high"
      predicate { kind: AttrListNonEmpty attr: "l" }
    }
  )pb";
  const RuleSet rules = LoadRulesFromText(kText, "t");
  auto hits = ClassifyNode(Node("m", "Mystery", {}, {{"l", StrListAttr{{"x"}}}}), rules);
  ASSERT_EQ(hits.size(), 2u);
  EXPECT_EQ(hits[0].category, CoreFunction::kFileRead);
  EXPECT_EQ(hits[0].rule_note, "high");
  EXPECT_EQ(hits[1].category, CoreFunction::kNetworkSend);

  hits = ClassifyNode(Node("m", "Mystery"), rules);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].rule_note, "low");
}

}  // namespace
}  // namespace graphscan
