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

// In-memory form of a parsed model program: nodes, attributes, edges and the
// function library. Nothing here depends on the protobuf types, so analysis
// code and tests can build graphs by hand.

#ifndef GRAPHSCAN_GRAPH_H_
#define GRAPHSCAN_GRAPH_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace graphscan {

enum class ModelFormat { kSavedModelDir, kGraphDefBinary, kGraphDefText };

std::string_view ModelFormatName(ModelFormat format);

// A data edge in wire syntax `producer[:index]`.
struct InputRef {
  std::string producer;
  int output_index = 0;

  bool operator==(const InputRef&) const = default;
};

// Attribute payloads. Strings are raw bytes; nothing is decoded here.
struct StrAttr {
  std::string value;
  bool operator==(const StrAttr&) const = default;
};
struct IntAttr {
  int64_t value = 0;
  bool operator==(const IntAttr&) const = default;
};
struct FloatAttr {
  double value = 0;
  bool operator==(const FloatAttr&) const = default;
};
struct BoolAttr {
  bool value = false;
  bool operator==(const BoolAttr&) const = default;
};
struct StrListAttr {
  std::vector<std::string> values;
  bool operator==(const StrListAttr&) const = default;
};
// String elements of a DT_STRING tensor (typically the `value` of a Const).
struct TensorStringsAttr {
  std::vector<std::string> values;
  bool operator==(const TensorStringsAttr&) const = default;
};
struct FuncAttr {
  std::string name;
  bool operator==(const FuncAttr&) const = default;
};
// list(func), e.g. the `branches` of Case.
struct FuncListAttr {
  std::vector<std::string> names;
  bool operator==(const FuncListAttr&) const = default;
};
// Anything else (types, shapes, numeric tensors, numeric lists). `kind` is a
// short description such as "type" or "list(int)".
struct OtherAttr {
  std::string kind;
  bool operator==(const OtherAttr&) const = default;
};

using AttrValue =
    std::variant<StrAttr, IntAttr, FloatAttr, BoolAttr, StrListAttr,
                 TensorStringsAttr, FuncAttr, FuncListAttr, OtherAttr>;

using AttrMap = std::map<std::string, AttrValue, std::less<>>;

// Names of every function referenced by Func/FuncList attrs, in attr order.
std::vector<std::string> ReferencedFunctions(const AttrMap& attrs);

struct NodeRecord {
  std::string name;
  std::string op_type;
  std::vector<InputRef> data_inputs;
  std::vector<std::string> control_inputs;
  AttrMap attrs;
  std::optional<std::string> device;

  bool operator==(const NodeRecord&) const = default;
};

// Op types given to the parameter and return placeholders synthesized for
// function bodies.
inline constexpr std::string_view kArgOp = "_Arg";
inline constexpr std::string_view kRetvalOp = "_Retval";

class Graph {
 public:
  Graph() = default;
  explicit Graph(std::string name) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }
  const std::vector<NodeRecord>& nodes() const { return nodes_; }
  size_t size() const { return nodes_.size(); }

  // Returns false (and leaves the graph unchanged) when the name is taken.
  bool AddNode(NodeRecord node);

  const NodeRecord* Find(std::string_view name) const;

  // Parameter placeholders in signature order (empty for the main graph).
  const std::vector<std::string>& params() const { return params_; }
  const std::vector<std::string>& returns() const { return returns_; }
  void AddParam(std::string node_name) { params_.push_back(std::move(node_name)); }
  void AddReturn(std::string node_name) { returns_.push_back(std::move(node_name)); }

  bool operator==(const Graph& other) const {
    return name_ == other.name_ && nodes_ == other.nodes_ &&
           params_ == other.params_ && returns_ == other.returns_;
  }

 private:
  std::string name_;
  std::vector<NodeRecord> nodes_;
  std::unordered_map<std::string, size_t> index_;
  std::vector<std::string> params_;
  std::vector<std::string> returns_;
};

class FunctionTable {
 public:
  bool Add(Graph graph);
  // Exact-name lookup; nullptr is an ordinary miss.
  const Graph* Resolve(std::string_view name) const;

  const std::map<std::string, Graph, std::less<>>& entries() const {
    return entries_;
  }
  size_t size() const { return entries_.size(); }

  bool operator==(const FunctionTable&) const = default;

 private:
  std::map<std::string, Graph, std::less<>> entries_;
};

struct SignatureEntry {
  std::string signature;
  std::string function;  // Function name, or a node of the main graph.

  bool operator==(const SignatureEntry&) const = default;
};

struct ModelBundle {
  ModelFormat format = ModelFormat::kGraphDefText;
  Graph main_graph;
  FunctionTable functions;
  std::vector<SignatureEntry> signature_entry_points;
  std::string source_path;

  size_t TotalNodeCount() const;

  bool operator==(const ModelBundle&) const = default;
};

}  // namespace graphscan

#endif  // GRAPHSCAN_GRAPH_H_
