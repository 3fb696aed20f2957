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

#include "graphscan/model_loader.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <functional>

#include "graphscan/errors.h"
#include "test_util.h"

namespace graphscan {
namespace {

using ::graphscan::testing::Fixture;
using ::graphscan::testing::ScratchDir;
using ::graphscan::testing::WriteFile;

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInternal;
}

TEST(DetectFormatTest, RecognizesEachFormat) {
  EXPECT_EQ(DetectFormat(Fixture("savedmodels/exfil_model")),
            ModelFormat::kSavedModelDir);
  EXPECT_EQ(DetectFormat(Fixture("graphs_bin/exfil.pb")),
            ModelFormat::kGraphDefBinary);
  EXPECT_EQ(DetectFormat(Fixture("graphs/exfil.pbtxt")),
            ModelFormat::kGraphDefText);
}

TEST(DetectFormatTest, MissingPathIsNotFound) {
  EXPECT_EQ(CodeOf([] { DetectFormat("/nonexistent/graphscan/model"); }),
            ErrorCode::kNotFound);
}

TEST(DetectFormatTest, EmptyFileIsUnrecognized) {
  ScratchDir dir("detect");
  WriteFile(dir.path() / "empty.pb", "");
  EXPECT_EQ(CodeOf([&] { DetectFormat(dir.path() / "empty.pb"); }),
            ErrorCode::kUnrecognized);
}

TEST(DetectFormatTest, DirectoryWithoutSavedModelIsUnrecognized) {
  ScratchDir dir("detect");
  EXPECT_EQ(CodeOf([&] { DetectFormat(dir.path()); }),
            ErrorCode::kUnrecognized);
}

TEST(DetectFormatTest, ProseIsUnrecognized) {
  ScratchDir dir("detect");
  WriteFile(dir.path() / "notes.txt", "this is not a graph\n");
  EXPECT_EQ(CodeOf([&] { DetectFormat(dir.path() / "notes.txt"); }),
            ErrorCode::kUnrecognized);
}

TEST(DetectFormatTest, OversizedFileIsTooLarge) {
  LoadOptions options;
  options.max_file_bytes = 64;
  const ErrorCode code =
      CodeOf([&] { DetectFormat(Fixture("graphs_bin/exfil.pb"), options); });
  EXPECT_EQ(code, ErrorCode::kTooLarge);
  EXPECT_TRUE(Error(code, "").IsParseError());
}

TEST(LoadGraphDefTest, TextAndBinaryAgree) {
  for (const char* name : {"exfil", "dropper", "enum_read_send", "linear",
                           "print_stderr", "checkpoint"}) {
    SCOPED_TRACE(name);
    ModelBundle text = LoadModel(Fixture(std::string("graphs/") + name + ".pbtxt"));
    ModelBundle binary = LoadModel(Fixture(std::string("graphs_bin/") + name + ".pb"));
    EXPECT_EQ(text.format, ModelFormat::kGraphDefText);
    EXPECT_EQ(binary.format, ModelFormat::kGraphDefBinary);
    EXPECT_EQ(text.main_graph, binary.main_graph);
    EXPECT_EQ(text.functions, binary.functions);
  }
}

TEST(LoadGraphDefTest, ConvertsNodesEdgesAndAttrs) {
  const ModelBundle bundle = LoadModel(Fixture("graphs/exfil.pbtxt"));
  const Graph& g = bundle.main_graph;
  EXPECT_EQ(g.size(), 14u);

  const NodeRecord* reader = g.Find("reader");
  ASSERT_NE(reader, nullptr);
  EXPECT_EQ(reader->op_type, "FixedLengthRecordDatasetV2");
  ASSERT_EQ(reader->data_inputs.size(), 6u);
  EXPECT_EQ(reader->data_inputs[0], (InputRef{"secret_path", 0}));

  const NodeRecord* path = g.Find("secret_path");
  ASSERT_NE(path, nullptr);
  const auto* value = std::get_if<TensorStringsAttr>(&path->attrs.at("value"));
  ASSERT_NE(value, nullptr);
  EXPECT_EQ(value->values,
            std::vector<std::string>{"/tmp/graphscan-sandbox/secret.txt"});

  const NodeRecord* y = g.Find("y");
  ASSERT_NE(y, nullptr);
  EXPECT_EQ(y->control_inputs, std::vector<std::string>{"send"});

  const NodeRecord* pack = g.Find("pack");
  ASSERT_NE(pack, nullptr);
  EXPECT_EQ(std::get<StrAttr>(pack->attrs.at("token")).value, "pyfunc_0");
  EXPECT_EQ(std::get<BoolAttr>(pack->attrs.at("is_async")).value, false);
}

TEST(LoadGraphDefTest, DanglingInputIsParseError) {
  ScratchDir dir("loader");
  WriteFile(dir.path() / "g.pbtxt",
            "node { name: 'a' op: 'Identity' input: 'missing' }\n");
  EXPECT_EQ(CodeOf([&] { LoadModel(dir.path() / "g.pbtxt"); }),
            ErrorCode::kParseError);
}

TEST(LoadGraphDefTest, DuplicateNodeIsParseError) {
  ScratchDir dir("loader");
  WriteFile(dir.path() / "g.pbtxt",
            "node { name: 'a' op: 'NoOp' }\nnode { name: 'a' op: 'NoOp' }\n");
  EXPECT_EQ(CodeOf([&] { LoadModel(dir.path() / "g.pbtxt"); }),
            ErrorCode::kParseError);
}

TEST(LoadGraphDefTest, UnknownFieldsInTextAreTolerated) {
  ScratchDir dir("loader");
  WriteFile(dir.path() / "g.pbtxt",
            "node { name: 'a' op: 'NoOp' experimental_debug_info { } }\n");
  const ModelBundle bundle = LoadModel(dir.path() / "g.pbtxt");
  EXPECT_EQ(bundle.main_graph.size(), 1u);
}

TEST(LoadSavedModelTest, FunctionsAndSignatures) {
  const ModelBundle bundle = LoadModel(Fixture("savedmodels/exfil_model"));
  EXPECT_EQ(bundle.format, ModelFormat::kSavedModelDir);
  EXPECT_EQ(bundle.main_graph.size(), 2u);
  ASSERT_EQ(bundle.functions.size(), 1u);
  const Graph* fn = bundle.functions.Resolve("__inference_serve_42");
  ASSERT_NE(fn, nullptr);
  EXPECT_EQ(ResolveFunction(bundle.functions, "__inference_serve_42"), fn);
  EXPECT_EQ(ResolveFunction(bundle.functions, "nope"), nullptr);

  // Parameters and returns become placeholder nodes.
  EXPECT_EQ(fn->params(), std::vector<std::string>{"x"});
  EXPECT_EQ(fn->returns(), std::vector<std::string>{"_retval/identity"});
  EXPECT_EQ(fn->Find("x")->op_type, kArgOp);
  const NodeRecord* ret = fn->Find("_retval/identity");
  ASSERT_NE(ret, nullptr);
  EXPECT_EQ(ret->op_type, kRetvalOp);
  EXPECT_EQ(ret->data_inputs, (std::vector<InputRef>{{"Identity", 0}}));

  // Function input syntax keeps only the producer and the index.
  const NodeRecord* send = fn->Find("send");
  ASSERT_NE(send, nullptr);
  EXPECT_EQ(send->data_inputs[0], (InputRef{"client", 0}));

  ASSERT_EQ(bundle.signature_entry_points.size(), 1u);
  EXPECT_EQ(bundle.signature_entry_points[0],
            (SignatureEntry{"serving_default", "__inference_serve_42"}));
  EXPECT_EQ(bundle.TotalNodeCount(), bundle.main_graph.size() + fn->size());
}

TEST(LoadSavedModelTest, NoServeTagAmongSeveral) {
  EXPECT_EQ(CodeOf([] { LoadModel(Fixture("savedmodels/no_serve_model")); }),
            ErrorCode::kNoServableMetaGraph);
}

TEST(LoadSavedModelTest, TruncatedFileIsParseError) {
  EXPECT_EQ(CodeOf([] { LoadModel(Fixture("savedmodels/truncated_model")); }),
            ErrorCode::kParseError);
}

TEST(LoadSavedModelTest, RealSerializerOutput) {
  const ModelBundle bundle = LoadModel(Fixture("savedmodels/tf_linear_model"));
  EXPECT_EQ(bundle.functions.size(), 5u);
  EXPECT_FALSE(bundle.signature_entry_points.empty());
  for (const auto& entry : bundle.signature_entry_points) {
    // Entries name a function, or a main-graph node with no function attr.
    EXPECT_TRUE(bundle.functions.Resolve(entry.function) != nullptr ||
                bundle.main_graph.Find(entry.function) != nullptr)
        << entry.signature << " -> " << entry.function;
  }
  bool has_matmul = false;
  for (const auto& [name, fn] : bundle.functions.entries()) {
    for (const auto& node : fn.nodes()) has_matmul |= node.op_type == "MatMul";
  }
  EXPECT_TRUE(has_matmul);
}

TEST(ParseInputTest, GraphSyntax) {
  bool control = false;
  EXPECT_EQ(ParseGraphInput("a", &control), (InputRef{"a", 0}));
  EXPECT_FALSE(control);
  EXPECT_EQ(ParseGraphInput("a:3", &control), (InputRef{"a", 3}));
  EXPECT_EQ(ParseGraphInput("^a", &control), (InputRef{"a", 0}));
  EXPECT_TRUE(control);
  // Node names may themselves contain colons when the suffix is not numeric.
  EXPECT_EQ(ParseGraphInput("scope/a:b", &control), (InputRef{"scope/a:b", 0}));
  EXPECT_EQ(CodeOf([&] { ParseGraphInput("a:", &control); }),
            ErrorCode::kParseError);
}

TEST(ParseInputTest, FunctionSyntax) {
  bool control = false;
  EXPECT_EQ(ParseFunctionInput("x", &control), (InputRef{"x", 0}));
  EXPECT_EQ(ParseFunctionInput("mul:z:0", &control), (InputRef{"mul", 0}));
  EXPECT_EQ(ParseFunctionInput("split:output:2", &control), (InputRef{"split", 2}));
  EXPECT_FALSE(control);
  EXPECT_EQ(ParseFunctionInput("^send", &control), (InputRef{"send", 0}));
  EXPECT_TRUE(control);
}

}  // namespace
}  // namespace graphscan
