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

// Interprocedural dataflow over a model program.
//
// Flatten() inlines function calls into one graph of qualified node ids
// (`<function path>/<node name>`, with `main` for the top-level graph).
// PropagateTaint() marks everything reachable from a source-category node,
// and FindChains() reports each tainted sink with a shortest witness path.

#ifndef GRAPHSCAN_CHAIN_ANALYZER_H_
#define GRAPHSCAN_CHAIN_ANALYZER_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "graphscan/graph.h"
#include "graphscan/op_taxonomy.h"

namespace graphscan {

inline constexpr int kDefaultMaxInlineDepth = 16;
inline constexpr size_t kDefaultMaxFlatNodes = 4'000'000;
inline constexpr std::string_view kMainPath = "main";

enum class EdgeKind { kData, kControl, kCallArg, kCallReturn };

std::string_view EdgeKindName(EdgeKind kind);

struct FlatNode {
  std::string id;
  const NodeRecord* record = nullptr;  // Owned by the ModelBundle.
};

struct FlatEdge {
  size_t from = 0;
  size_t to = 0;
  EdgeKind kind = EdgeKind::kData;

  bool operator==(const FlatEdge&) const = default;
};

struct CallSite {
  std::string caller_id;
  std::string function_name;
  int depth = 0;
};

// Nodes and edges are append-only; node indices are stable. A FlatGraph
// built by Flatten() must not outlive the bundle it was built from.
class FlatGraph {
 public:
  // Returns the index of the new node. Throws kInternal on a duplicate id.
  size_t AddNode(std::string id, const NodeRecord* record);
  // Duplicate (from, to, kind) triples are ignored.
  void AddEdge(size_t from, size_t to, EdgeKind kind);
  void AddCallSite(CallSite site) { call_sites_.push_back(std::move(site)); }
  void AddWarning(std::string warning) { warnings_.push_back(std::move(warning)); }

  const std::vector<FlatNode>& nodes() const { return nodes_; }
  const std::vector<FlatEdge>& edges() const { return edges_; }
  const std::vector<CallSite>& call_sites() const { return call_sites_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  size_t size() const { return nodes_.size(); }

  std::optional<size_t> IndexOf(std::string_view id) const;
  const std::string& IdOf(size_t index) const { return nodes_[index].id; }

  // Edge indices leaving / entering a node, in insertion order.
  const std::vector<size_t>& OutEdges(size_t node) const { return out_[node]; }
  const std::vector<size_t>& InEdges(size_t node) const { return in_[node]; }

 private:
  std::vector<FlatNode> nodes_;
  std::vector<FlatEdge> edges_;
  std::vector<std::vector<size_t>> out_;
  std::vector<std::vector<size_t>> in_;
  std::unordered_map<std::string, size_t> index_;
  std::vector<CallSite> call_sites_;
  std::vector<std::string> warnings_;
};

// Ops whose Func-valued attrs are calls. Any other node carrying a Func
// attr is treated as a call too.
bool IsCallOp(std::string_view op_type);

// Roots, in order: the main graph, then signature entry functions, then any
// library function not instantiated by then (sorted by name). The first
// instance of function `f` lives under path `f`, later ones under `f#2`,
// `f#3`, ... Calls that recurse or would exceed `max_depth` stay opaque and
// record a warning; so do calls to unknown functions and calls that would
// push the flattened graph past `max_nodes`.
FlatGraph Flatten(const ModelBundle& bundle,
                  int max_depth = kDefaultMaxInlineDepth,
                  size_t max_nodes = kDefaultMaxFlatNodes);

// Classifies every flattened node; hit node names are qualified ids.
std::vector<CategoryHit> ClassifyFlatGraph(const FlatGraph& flat,
                                           const RuleSet& rules);

enum class Interpretation {
  kRemoteEndpoint,
  kFilesystemPath,
  kGlobPattern,
  kPersistencePath,
  kOpaque,
};

std::string_view InterpretationName(Interpretation interpretation);

struct EvidenceString {
  std::string value;
  std::string origin_node;  // The hit node the string was harvested for.
  std::string via;          // Const node it came from; empty for own attrs.
  Interpretation interpretation = Interpretation::kOpaque;

  bool operator==(const EvidenceString&) const = default;
};

inline constexpr int kConstHarvestRadius = 3;

Interpretation ClassifyString(std::string_view value);

// For each hit node: its own Str/StrList attrs (underscore-prefixed internal
// attrs excluded) plus string Const payloads within kConstHarvestRadius data
// edges upstream. Blank strings are skipped; each (value, origin) once.
std::vector<EvidenceString> ExtractStringEvidence(
    const FlatGraph& flat, const std::vector<CategoryHit>& hits);

struct TaintLabel {
  size_t source = 0;  // Node index of the seeding hit.
  CoreFunction category = CoreFunction::kFileRead;

  auto operator<=>(const TaintLabel&) const = default;
};

class TaintState {
 public:
  TaintState() = default;
  explicit TaintState(size_t node_count) : labels_(node_count) {}

  // Sorted, duplicate-free labels carried by a node.
  const std::vector<TaintLabel>& LabelsOf(size_t node) const {
    return labels_[node];
  }
  bool Has(size_t node, const TaintLabel& label) const;
  bool IsTainted(size_t node) const { return !labels_[node].empty(); }

  // Hits keyed by node index.
  const std::vector<CategoryHit>& HitsOf(size_t node) const;
  const std::unordered_map<size_t, std::vector<CategoryHit>>& hits() const {
    return hits_;
  }

 private:
  friend TaintState PropagateTaint(const FlatGraph&,
                                   const std::vector<CategoryHit>&);
  std::vector<std::vector<TaintLabel>> labels_;
  std::unordered_map<size_t, std::vector<CategoryHit>> hits_;
};

// Every edge kind conducts taint. Throws kUnknownNode when a hit names an id
// that is not in `flat`.
TaintState PropagateTaint(const FlatGraph& flat,
                          const std::vector<CategoryHit>& hits);

enum class ChainKind {
  kExfiltration,
  kDropper,
  kRemoteToExec,
  kReadToPersistence,
  kGeneric,  // A source/sink pair outside the named patterns.
};

std::string_view ChainKindName(ChainKind kind);
std::optional<ChainKind> ParseChainKind(std::string_view name);

// Annotation name for chains that involve directory enumeration.
inline constexpr std::string_view kEnumerationAssisted = "EnumerationAssisted";

struct Chain {
  ChainKind kind = ChainKind::kGeneric;
  std::string source;
  CoreFunction source_category = CoreFunction::kFileRead;
  std::string sink;
  CoreFunction sink_category = CoreFunction::kFileWrite;
  std::vector<std::string> path;  // Shortest witness, source first.
  std::vector<EvidenceString> evidence;  // Evidence on any path node.
  // Set when an Enumeration hit lies on the path or taints the source.
  bool enumeration_assisted = false;
};

// Kind of a (source, sink) pair; `sink_has_persistence` is whether the sink
// carries PersistencePath evidence.
ChainKind ClassifyChain(CoreFunction source, CoreFunction sink,
                        bool sink_has_persistence);

// One chain per (source, source category, sink, sink category) with the sink
// tainted by that source; source == sink is not a chain. Sorted by (kind,
// source id, sink id, source category, sink category).
std::vector<Chain> FindChains(const FlatGraph& flat, const TaintState& taint,
                              const std::vector<EvidenceString>& evidence);

}  // namespace graphscan

#endif  // GRAPHSCAN_CHAIN_ANALYZER_H_
