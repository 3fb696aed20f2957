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

#include "graphscan/corpus.h"

#include <gtest/gtest.h>

#include "graphscan/errors.h"
#include "json.hpp"
#include "test_util.h"

namespace graphscan {
namespace {

namespace fs = std::filesystem;
using ::graphscan::testing::Fixture;
using ::graphscan::testing::ScratchDir;
using ::graphscan::testing::WriteFile;
using json = nlohmann::json;

// A corpus with two malicious and two benign models in mixed formats.
class CorpusTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const fs::path d = dir_.path();
    fs::copy_file(Fixture("graphs/exfil.pbtxt"), d / "exfil.pbtxt");
    fs::copy_file(Fixture("graphs_bin/dropper.pb"), d / "dropper.pb");
    fs::copy_file(Fixture("graphs/linear.pbtxt"), d / "linear.pbtxt");
    fs::copy(Fixture("savedmodels/tf_linear_model"), d / "tf_linear_model",
             fs::copy_options::recursive);
    WriteFile(d / "README.txt", "not a model\n");
    WriteFile(d / ".hidden.pbtxt", "node { name: \"x\" op: \"ReadFile\" }\n");
  }

  ScratchDir dir_{"corpus"};
};

constexpr char kManifest[] = R"(# expected verdicts
exfil.pbtxt       malicious      Exfiltration   # reader to rpc
dropper.pb        malicious      Dropper
linear.pbtxt      clean
tf_linear_model   informational
)";

TEST(ManifestTest, Parses) {
  const auto entries = ParseManifest(kManifest);
  ASSERT_EQ(entries.size(), 4u);
  EXPECT_EQ(entries[0].model_name, "dropper.pb");  // Sorted.
  EXPECT_EQ(entries[1].model_name, "exfil.pbtxt");
  EXPECT_EQ(entries[1].expected_verdict, Severity::kMalicious);
  EXPECT_EQ(entries[1].expected_chain_kinds,
            std::vector<ChainKind>{ChainKind::kExfiltration});
  EXPECT_EQ(entries[1].notes, "reader to rpc");
  EXPECT_TRUE(entries[2].expected_chain_kinds.empty());
  EXPECT_TRUE(ParseManifest("\n  # only comments\n\n").empty());
  EXPECT_EQ(ParseManifest("m clean -\n")[0].expected_chain_kinds.size(), 0u);
  EXPECT_EQ(ParseManifest("m malicious Dropper,Generic\n")[0]
                .expected_chain_kinds.size(),
            2u);
}

TEST(ManifestTest, RejectsBadLines) {
  for (const char* text : {"m evil\n", "m clean Exfil\n", "m clean - extra\n",
                           "a clean\na malicious\n", "lonely\n"}) {
    try {
      ParseManifest(text, "corpus.manifest");
      FAIL() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kParseError);
      EXPECT_NE(std::string(e.what()).find("corpus.manifest:"), std::string::npos)
          << e.what();
    }
  }
}

TEST(ManifestTest, MissingFile) {
  try {
    LoadManifest("/nonexistent/graphscan.manifest");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotFound);
  }
}

TEST_F(CorpusTest, AllMatchManifest) {
  const CorpusResult result =
      ScanCorpus(dir_.path(), BuiltinRules(), ParseManifest(kManifest));
  ASSERT_EQ(result.rows.size(), 4u);
  for (const auto& row : result.rows) {
    EXPECT_TRUE(row.pass) << row.name << " " << row.error;
    EXPECT_TRUE(row.notes.empty()) << row.name << " " << row.notes.front();
  }
  EXPECT_TRUE(result.AllPass());
  const std::string text = RenderCorpus(result, ReportFormat::kText);
  EXPECT_NE(text.find("4 models, 4 passed, 0 failed"), std::string::npos);
}

TEST_F(CorpusTest, WithoutManifestUsesThreshold) {
  CorpusOptions options;
  options.fail_on = Severity::kSuspicious;
  CorpusResult result = ScanCorpus(dir_.path(), BuiltinRules(), std::nullopt, options);
  ASSERT_EQ(result.rows.size(), 4u);
  EXPECT_FALSE(result.AllPass());
  for (const auto& row : result.rows) {
    EXPECT_EQ(row.pass, row.name == "linear.pbtxt" || row.name == "tf_linear_model")
        << row.name;
  }
  options.fail_on = Severity::kInformational;
  result = ScanCorpus(dir_.path(), BuiltinRules(), std::nullopt, options);
  for (const auto& row : result.rows) {
    EXPECT_EQ(row.pass, row.name == "linear.pbtxt") << row.name;
  }
}

TEST_F(CorpusTest, MismatchesAndMissingModels) {
  const auto manifest = ParseManifest(
      "exfil.pbtxt malicious Dropper\n"
      "linear.pbtxt suspicious\n"
      "gone_model clean\n");
  const CorpusResult result = ScanCorpus(dir_.path(), BuiltinRules(), manifest);
  std::map<std::string, const CorpusRow*> by_name;
  for (const auto& row : result.rows) by_name[row.name] = &row;
  ASSERT_EQ(by_name.size(), 5u);
  // Verdict matches; the chain-kind miss is only noted.
  EXPECT_TRUE(by_name["exfil.pbtxt"]->pass);
  EXPECT_EQ(by_name["exfil.pbtxt"]->notes,
            std::vector<std::string>{"expected chain kind Dropper not found"});
  EXPECT_FALSE(by_name["linear.pbtxt"]->pass);
  EXPECT_FALSE(by_name["gone_model"]->pass);
  EXPECT_NE(by_name["gone_model"]->error.find("not found"), std::string::npos);
  EXPECT_TRUE(by_name["dropper.pb"]->pass);
  EXPECT_EQ(by_name["dropper.pb"]->notes,
            std::vector<std::string>{"not listed in the manifest"});
  EXPECT_FALSE(result.AllPass());
}

TEST_F(CorpusTest, BrokenModelFailsItsRow) {
  fs::copy(Fixture("savedmodels/truncated_model"), dir_.path() / "truncated_model",
           fs::copy_options::recursive);
  const CorpusResult result = ScanCorpus(dir_.path(), BuiltinRules(), std::nullopt);
  const CorpusRow& row = *std::find_if(
      result.rows.begin(), result.rows.end(),
      [](const CorpusRow& r) { return r.name == "truncated_model"; });
  EXPECT_FALSE(row.pass);
  EXPECT_EQ(row.error.rfind("ParseError: ", 0), 0u) << row.error;
}

TEST_F(CorpusTest, OutputIndependentOfWorkerCount) {
  const auto manifest = ParseManifest(kManifest);
  std::string first;
  for (size_t workers : {1u, 2u, 3u, 8u}) {
    CorpusOptions options;
    options.workers = workers;
    const std::string out = RenderCorpus(
        ScanCorpus(dir_.path(), BuiltinRules(), manifest, options), ReportFormat::kJson);
    if (first.empty()) first = out;
    EXPECT_EQ(out, first) << workers;
  }
  const json j = json::parse(first);
  EXPECT_EQ(j["passed"], 4);
  EXPECT_EQ(j["failed"], 0);
  EXPECT_EQ(j["manifest"], true);
  EXPECT_EQ(j["models"][1]["chain_kinds"][0], "Exfiltration");
}

TEST(CorpusEdgeTest, EmptyDirectoryAndManifestPass) {
  ScratchDir dir("empty-corpus");
  const CorpusResult result =
      ScanCorpus(dir.path(), BuiltinRules(), ParseManifest(""));
  EXPECT_TRUE(result.rows.empty());
  EXPECT_TRUE(result.AllPass());
  EXPECT_NE(RenderCorpus(result, ReportFormat::kText).find("0 models"),
            std::string::npos);
}

TEST(CorpusEdgeTest, MissingDirectory) {
  try {
    ScanCorpus("/nonexistent/graphscan-corpus", BuiltinRules(), std::nullopt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotFound);
  }
}

}  // namespace
}  // namespace graphscan
