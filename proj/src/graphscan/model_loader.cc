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

#include <google/protobuf/io/tokenizer.h>
#include <google/protobuf/text_format.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "graphscan/errors.h"
#include "tensorflow/core/framework/graph.pb.h"
#include "tensorflow/core/protobuf/saved_model.pb.h"

namespace graphscan {
namespace {

namespace fs = std::filesystem;

std::string ReadFileGuarded(const fs::path& path, const LoadOptions& options) {
  std::error_code ec;
  const auto size = fs::file_size(path, ec);
  if (ec) {
    throw Error(ErrorCode::kNotFound,
                "cannot stat " + path.string() + ": " + ec.message());
  }
  if (size > options.max_file_bytes) {
    throw Error(ErrorCode::kTooLarge,
                path.string() + " is " + std::to_string(size) +
                    " bytes; limit is " +
                    std::to_string(options.max_file_bytes));
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open " + path.string());
  std::string bytes(size, '\0');
  in.read(bytes.data(), static_cast<std::streamsize>(size));
  if (static_cast<uint64_t>(in.gcount()) != size) {
    throw Error(ErrorCode::kParseError, "short read on " + path.string());
  }
  return bytes;
}

// Records the first text-format diagnostic instead of logging to stderr.
class FirstErrorCollector : public google::protobuf::io::ErrorCollector {
 public:
  void AddError(int line, google::protobuf::io::ColumnNumber column,
                const std::string& message) override {
    if (!message_.empty()) return;
    std::ostringstream out;
    out << "line " << (line + 1) << ", column " << (column + 1) << ": "
        << message;
    message_ = out.str();
  }
  void AddWarning(int, google::protobuf::io::ColumnNumber,
                  const std::string&) override {}

  const std::string& message() const { return message_; }

 private:
  std::string message_;
};

bool HasContent(const tensorflow::GraphDef& graph) {
  return graph.node_size() > 0 || graph.library().function_size() > 0;
}

// Almost any short byte string is a syntactically valid protobuf, so a binary
// match also requires no unknown top-level fields and at least one node.
bool ParseBinaryGraphDef(const std::string& bytes, tensorflow::GraphDef* out) {
  if (bytes.empty()) return false;
  if (!out->ParseFromString(bytes)) return false;
  if (!out->GetReflection()->GetUnknownFields(*out).empty()) return false;
  return HasContent(*out);
}

bool ParseTextGraphDef(const std::string& text, tensorflow::GraphDef* out,
                       std::string* diagnostic) {
  google::protobuf::TextFormat::Parser parser;
  FirstErrorCollector errors;
  parser.RecordErrorsTo(&errors);
  // Newer emitters add fields the vendored schema does not declare.
  parser.AllowUnknownField(true);
  if (!parser.ParseFromString(text, out)) {
    if (diagnostic != nullptr) *diagnostic = errors.message();
    return false;
  }
  if (!HasContent(*out)) {
    if (diagnostic != nullptr) *diagnostic = "no nodes or functions";
    return false;
  }
  return true;
}

bool ParseIndex(std::string_view digits, int* index) {
  if (digits.empty()) return false;
  const char* end = digits.data() + digits.size();
  auto [ptr, ec] = std::from_chars(digits.data(), end, *index);
  return ec == std::errc() && ptr == end && *index >= 0;
}

AttrValue ConvertAttr(const tensorflow::AttrValue& value) {
  using tensorflow::AttrValue;
  switch (value.value_case()) {
    case AttrValue::kS:
      return StrAttr{value.s()};
    case AttrValue::kI:
      return IntAttr{value.i()};
    case AttrValue::kF:
      return FloatAttr{value.f()};
    case AttrValue::kB:
      return BoolAttr{value.b()};
    case AttrValue::kType:
      return OtherAttr{"type"};
    case AttrValue::kShape:
      return OtherAttr{"shape"};
    case AttrValue::kTensor: {
      const auto& tensor = value.tensor();
      if (tensor.dtype() != tensorflow::DT_STRING) return OtherAttr{"tensor"};
      return TensorStringsAttr{{tensor.string_val().begin(),
                                tensor.string_val().end()}};
    }
    case AttrValue::kList: {
      const auto& list = value.list();
      if (list.func_size() > 0) {
        FuncListAttr funcs;
        for (const auto& f : list.func()) funcs.names.push_back(f.name());
        return funcs;
      }
      if (list.s_size() > 0) {
        return StrListAttr{{list.s().begin(), list.s().end()}};
      }
      if (list.i_size() > 0) return OtherAttr{"list(int)"};
      if (list.f_size() > 0) return OtherAttr{"list(float)"};
      if (list.b_size() > 0) return OtherAttr{"list(bool)"};
      if (list.type_size() > 0) return OtherAttr{"list(type)"};
      if (list.shape_size() > 0) return OtherAttr{"list(shape)"};
      if (list.tensor_size() > 0) return OtherAttr{"list(tensor)"};
      // An empty list has no element type on the wire.
      return StrListAttr{};
    }
    case AttrValue::kFunc:
      return FuncAttr{value.func().name()};
    case AttrValue::kPlaceholder:
      return OtherAttr{"placeholder"};
    case AttrValue::VALUE_NOT_SET:
      break;
  }
  return OtherAttr{"unset"};
}

AttrMap ConvertAttrs(
    const google::protobuf::Map<std::string, tensorflow::AttrValue>& attrs) {
  AttrMap out;
  for (const auto& [key, value] : attrs) out.emplace(key, ConvertAttr(value));
  return out;
}

using InputParser = InputRef (*)(std::string_view, bool*);

NodeRecord ConvertNode(const tensorflow::NodeDef& def, InputParser parse) {
  NodeRecord node;
  node.name = def.name();
  node.op_type = def.op();
  for (const auto& input : def.input()) {
    bool is_control = false;
    InputRef ref;
    try {
      ref = parse(input, &is_control);
    } catch (const Error& e) {
      throw Error(ErrorCode::kParseError,
                  "node '" + def.name() + "': " + e.what());
    }
    if (is_control) {
      node.control_inputs.push_back(std::move(ref.producer));
    } else {
      node.data_inputs.push_back(std::move(ref));
    }
  }
  node.attrs = ConvertAttrs(def.attr());
  if (!def.device().empty()) node.device = def.device();
  return node;
}

void AddOrThrow(Graph& graph, NodeRecord node) {
  if (node.name.empty()) {
    throw Error(ErrorCode::kParseError,
                "graph '" + graph.name() + "' has a node with an empty name");
  }
  const std::string name = node.name;
  if (!graph.AddNode(std::move(node))) {
    throw Error(ErrorCode::kParseError,
                "graph '" + graph.name() + "' has duplicate node '" + name +
                    "'");
  }
}

void CheckEdges(const Graph& graph) {
  const std::string where =
      graph.name().empty() ? std::string("main graph")
                           : "function '" + graph.name() + "'";
  for (const auto& node : graph.nodes()) {
    for (const auto& input : node.data_inputs) {
      if (graph.Find(input.producer) == nullptr) {
        throw Error(ErrorCode::kParseError,
                    where + ": node '" + node.name +
                        "' reads from unknown node '" + input.producer + "'");
      }
    }
    for (const auto& control : node.control_inputs) {
      if (graph.Find(control) == nullptr) {
        throw Error(ErrorCode::kParseError,
                    where + ": node '" + node.name +
                        "' has control input from unknown node '" + control +
                        "'");
      }
    }
  }
}

std::string UniqueName(const Graph& graph, std::string base) {
  if (graph.Find(base) == nullptr) return base;
  for (int i = 1;; ++i) {
    std::string candidate = base + "_" + std::to_string(i);
    if (graph.Find(candidate) == nullptr) return candidate;
  }
}

Graph ConvertMainGraph(const tensorflow::GraphDef& def) {
  Graph graph;
  for (const auto& node : def.node()) {
    AddOrThrow(graph, ConvertNode(node, &ParseGraphInput));
  }
  CheckEdges(graph);
  return graph;
}

// Function bodies refer to their parameters by argument name and expose
// results through the `ret` map. Both become explicit placeholder nodes so
// that every edge in the body resolves inside the graph.
Graph ConvertFunction(const tensorflow::FunctionDef& def) {
  const auto& signature = def.signature();
  if (signature.name().empty()) {
    throw Error(ErrorCode::kParseError, "function with an empty name");
  }
  Graph graph(signature.name());
  for (int i = 0; i < signature.input_arg_size(); ++i) {
    NodeRecord arg;
    arg.name = signature.input_arg(i).name();
    arg.op_type = std::string(kArgOp);
    arg.attrs.emplace("index", IntAttr{i});
    graph.AddParam(arg.name);
    AddOrThrow(graph, std::move(arg));
  }
  for (const auto& node : def.node_def()) {
    AddOrThrow(graph, ConvertNode(node, &ParseFunctionInput));
  }
  for (int i = 0; i < signature.output_arg_size(); ++i) {
    const std::string& out_name = signature.output_arg(i).name();
    NodeRecord ret;
    ret.name = UniqueName(graph, "_retval/" + out_name);
    ret.op_type = std::string(kRetvalOp);
    ret.attrs.emplace("index", IntAttr{i});
    if (auto it = def.ret().find(out_name); it != def.ret().end()) {
      bool is_control = false;
      InputRef ref = ParseFunctionInput(it->second, &is_control);
      if (is_control) {
        ret.control_inputs.push_back(std::move(ref.producer));
      } else {
        ret.data_inputs.push_back(std::move(ref));
      }
    }
    graph.AddReturn(ret.name);
    AddOrThrow(graph, std::move(ret));
  }
  // control_ret is a map; walk the declared order for determinism.
  for (const auto& out_name : signature.control_output()) {
    auto it = def.control_ret().find(out_name);
    if (it == def.control_ret().end()) continue;
    NodeRecord ret;
    ret.name = UniqueName(graph, "_control_retval/" + out_name);
    ret.op_type = std::string(kRetvalOp);
    ret.control_inputs.push_back(it->second);
    graph.AddReturn(ret.name);
    AddOrThrow(graph, std::move(ret));
  }
  CheckEdges(graph);
  return graph;
}

FunctionTable ConvertLibrary(const tensorflow::FunctionDefLibrary& library) {
  FunctionTable table;
  for (const auto& function : library.function()) {
    if (!table.Add(ConvertFunction(function))) {
      throw Error(ErrorCode::kParseError, "duplicate function '" +
                                              function.signature().name() +
                                              "'");
    }
  }
  return table;
}

// Every signature becomes an entry point named after the function invoked by
// the node that produces its first output (in output-key order), or after
// that node itself when it is not a call.
std::vector<SignatureEntry> ExtractSignatures(
    const tensorflow::MetaGraphDef& meta, const ModelBundle& bundle) {
  std::vector<std::string> names;
  for (const auto& [name, sig] : meta.signature_def()) names.push_back(name);
  std::sort(names.begin(), names.end());

  std::vector<SignatureEntry> entries;
  for (const auto& name : names) {
    const auto& sig = meta.signature_def().at(name);
    std::vector<std::string> keys;
    for (const auto& [key, info] : sig.outputs()) keys.push_back(key);
    std::sort(keys.begin(), keys.end());
    for (const auto& key : keys) {
      const std::string& tensor = sig.outputs().at(key).name();
      if (tensor.empty()) continue;
      bool is_control = false;
      InputRef ref;
      try {
        ref = ParseGraphInput(tensor, &is_control);
      } catch (const Error&) {
        continue;
      }
      const NodeRecord* node = bundle.main_graph.Find(ref.producer);
      if (node == nullptr) continue;
      std::string target = node->name;
      for (const auto& fn : ReferencedFunctions(node->attrs)) {
        if (bundle.functions.Resolve(fn) != nullptr) {
          target = fn;
          break;
        }
      }
      entries.push_back({name, std::move(target)});
      break;
    }
  }
  return entries;
}

}  // namespace

InputRef ParseGraphInput(std::string_view text, bool* is_control) {
  *is_control = !text.empty() && text.front() == '^';
  if (*is_control) text.remove_prefix(1);
  if (text.empty()) throw Error(ErrorCode::kParseError, "empty input name");
  InputRef ref;
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos) {
    ref.producer = std::string(text);
    return ref;
  }
  const std::string_view suffix = text.substr(colon + 1);
  if (suffix.empty()) {
    throw Error(ErrorCode::kParseError,
                "input '" + std::string(text) + "' has an empty output index");
  }
  int index = 0;
  if (ParseIndex(suffix, &index)) {
    ref.producer = std::string(text.substr(0, colon));
    ref.output_index = index;
  } else {
    ref.producer = std::string(text);
  }
  if (ref.producer.empty()) {
    throw Error(ErrorCode::kParseError,
                "input '" + std::string(text) + "' has no producer");
  }
  return ref;
}

InputRef ParseFunctionInput(std::string_view text, bool* is_control) {
  *is_control = !text.empty() && text.front() == '^';
  if (*is_control) text.remove_prefix(1);
  if (text.empty()) throw Error(ErrorCode::kParseError, "empty input name");
  InputRef ref;
  const auto colon = text.find(':');
  ref.producer = std::string(text.substr(0, colon));
  if (ref.producer.empty()) {
    throw Error(ErrorCode::kParseError,
                "input '" + std::string(text) + "' has no producer");
  }
  if (colon == std::string_view::npos) return ref;
  const std::string_view rest = text.substr(colon + 1);
  const auto last = rest.rfind(':');
  const std::string_view suffix =
      last == std::string_view::npos ? rest : rest.substr(last + 1);
  if (suffix.empty()) {
    throw Error(ErrorCode::kParseError,
                "input '" + std::string(text) + "' has an empty suffix");
  }
  int index = 0;
  if (ParseIndex(suffix, &index)) ref.output_index = index;
  return ref;
}

ModelFormat DetectFormat(const fs::path& path, const LoadOptions& options) {
  std::error_code ec;
  const auto status = fs::status(path, ec);
  if (ec || !fs::exists(status)) {
    throw Error(ErrorCode::kNotFound, path.string() + " does not exist");
  }
  if (fs::is_directory(status)) {
    if (fs::is_regular_file(path / kSavedModelFileName, ec)) {
      return ModelFormat::kSavedModelDir;
    }
    throw Error(ErrorCode::kUnrecognized,
                path.string() + " is a directory without " +
                    std::string(kSavedModelFileName));
  }
  const std::string bytes = ReadFileGuarded(path, options);
  tensorflow::GraphDef graph;
  if (ParseBinaryGraphDef(bytes, &graph)) return ModelFormat::kGraphDefBinary;
  graph.Clear();
  if (ParseTextGraphDef(bytes, &graph, nullptr)) {
    return ModelFormat::kGraphDefText;
  }
  throw Error(ErrorCode::kUnrecognized,
              path.string() + " is neither a SavedModel directory nor a "
                              "binary or text GraphDef");
}

ModelBundle LoadSavedModel(const fs::path& path, const LoadOptions& options) {
  const fs::path pb = path / kSavedModelFileName;
  const std::string bytes = ReadFileGuarded(pb, options);
  tensorflow::SavedModel saved_model;
  if (!saved_model.ParseFromString(bytes)) {
    throw Error(ErrorCode::kParseError,
                pb.string() + " is not a valid SavedModel message");
  }
  if (saved_model.meta_graphs_size() == 0) {
    throw Error(ErrorCode::kParseError, pb.string() + " has no meta graphs");
  }

  const tensorflow::MetaGraphDef* meta = nullptr;
  if (saved_model.meta_graphs_size() == 1) {
    meta = &saved_model.meta_graphs(0);
  } else {
    for (const auto& candidate : saved_model.meta_graphs()) {
      const auto& tags = candidate.meta_info_def().tags();
      if (std::find(tags.begin(), tags.end(), kServeTag) != tags.end()) {
        meta = &candidate;
        break;
      }
    }
  }
  if (meta == nullptr) {
    throw Error(ErrorCode::kNoServableMetaGraph,
                pb.string() + " has " +
                    std::to_string(saved_model.meta_graphs_size()) +
                    " meta graphs and none is tagged 'serve'");
  }

  ModelBundle bundle;
  bundle.format = ModelFormat::kSavedModelDir;
  bundle.source_path = path.string();
  bundle.main_graph = ConvertMainGraph(meta->graph_def());
  bundle.functions = ConvertLibrary(meta->graph_def().library());
  bundle.signature_entry_points = ExtractSignatures(*meta, bundle);
  return bundle;
}

ModelBundle LoadGraphDef(const fs::path& path, const LoadOptions& options) {
  const std::string bytes = ReadFileGuarded(path, options);
  tensorflow::GraphDef graph;
  ModelBundle bundle;
  if (ParseBinaryGraphDef(bytes, &graph)) {
    bundle.format = ModelFormat::kGraphDefBinary;
  } else {
    graph.Clear();
    std::string diagnostic;
    if (!ParseTextGraphDef(bytes, &graph, &diagnostic)) {
      throw Error(ErrorCode::kParseError,
                  path.string() + " is not a GraphDef" +
                      (diagnostic.empty() ? "" : " (" + diagnostic + ")"));
    }
    bundle.format = ModelFormat::kGraphDefText;
  }
  bundle.source_path = path.string();
  bundle.main_graph = ConvertMainGraph(graph);
  bundle.functions = ConvertLibrary(graph.library());
  return bundle;
}

ModelBundle LoadModel(const fs::path& path, const LoadOptions& options) {
  if (DetectFormat(path, options) == ModelFormat::kSavedModelDir) {
    return LoadSavedModel(path, options);
  }
  return LoadGraphDef(path, options);
}

const Graph* ResolveFunction(const FunctionTable& table,
                             std::string_view name) {
  return table.Resolve(name);
}

}  // namespace graphscan
