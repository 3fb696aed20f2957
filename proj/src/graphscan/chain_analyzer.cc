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

#include "graphscan/chain_analyzer.h"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <tuple>

#include "graphscan/errors.h"

namespace graphscan {
namespace {

class Flattener {
 public:
  Flattener(const ModelBundle& bundle, int max_depth, size_t max_nodes)
      : bundle_(bundle), max_depth_(max_depth), max_nodes_(max_nodes) {
    // The main graph owns the `main` path; a function named `main` gets
    // `main#2` on first use.
    instances_[std::string(kMainPath)] = 1;
  }

  FlatGraph Run() {
    std::vector<std::string> stack;
    Instantiate(bundle_.main_graph, std::string(kMainPath), 0, stack);
    for (const auto& entry : bundle_.signature_entry_points) {
      InstantiateRoot(entry.function);
    }
    for (const auto& [name, graph] : bundle_.functions.entries()) {
      InstantiateRoot(name);
    }
    return std::move(flat_);
  }

 private:
  void InstantiateRoot(const std::string& name) {
    if (instantiated_.contains(name)) return;
    const Graph* graph = bundle_.functions.Resolve(name);
    if (graph == nullptr) return;  // Entry point naming a main-graph node.
    std::vector<std::string> stack{name};
    Instantiate(*graph, NewPath(name), 0, stack);
  }

  std::string NewPath(const std::string& function) {
    const int n = ++instances_[function];
    return n == 1 ? function : function + "#" + std::to_string(n);
  }

  // Returns node name -> flat index for this instance.
  std::unordered_map<std::string, size_t> Instantiate(
      const Graph& graph, const std::string& path, int depth,
      std::vector<std::string>& stack) {
    if (!graph.name().empty()) instantiated_.insert(graph.name());
    std::unordered_map<std::string, size_t> local;
    local.reserve(graph.size());
    for (const auto& node : graph.nodes()) {
      local.emplace(node.name, flat_.AddNode(path + "/" + node.name, &node));
    }
    for (const auto& node : graph.nodes()) {
      const size_t to = local.at(node.name);
      for (const auto& input : node.data_inputs) {
        flat_.AddEdge(local.at(input.producer), to, EdgeKind::kData);
      }
      for (const auto& control : node.control_inputs) {
        flat_.AddEdge(local.at(control), to, EdgeKind::kControl);
      }
    }
    for (const auto& node : graph.nodes()) {
      for (const auto& function : ReferencedFunctions(node.attrs)) {
        InlineCall(node, local, function, depth, stack);
      }
    }
    return local;
  }

  void InlineCall(const NodeRecord& node,
                  const std::unordered_map<std::string, size_t>& local,
                  const std::string& function, int depth,
                  std::vector<std::string>& stack) {
    const size_t call = local.at(node.name);
    const std::string caller_id = flat_.IdOf(call);  // AddNode may reallocate.
    const Graph* callee = bundle_.functions.Resolve(function);
    if (callee == nullptr) {
      flat_.AddWarning("call to unknown function '" + function + "' at " +
                       caller_id + " treated as opaque");
      return;
    }
    if (std::find(stack.begin(), stack.end(), function) != stack.end()) {
      flat_.AddWarning("recursive call to '" + function + "' at " +
                       caller_id + " treated as opaque");
      return;
    }
    if (depth + 1 > max_depth_) {
      flat_.AddWarning("call to '" + function + "' at " + caller_id +
                       " exceeds inline depth " + std::to_string(max_depth_) +
                       "; treated as opaque");
      return;
    }
    if (flat_.size() + callee->size() > max_nodes_) {
      flat_.AddWarning("call to '" + function + "' at " + caller_id +
                       " would exceed " + std::to_string(max_nodes_) +
                       " flattened nodes; treated as opaque");
      return;
    }

    stack.push_back(function);
    const auto inner = Instantiate(*callee, NewPath(function), depth + 1, stack);
    stack.pop_back();
    flat_.AddCallSite({caller_id, function, depth + 1});

    // If/StatelessIf consume the predicate before the branch arguments.
    const bool is_if = node.op_type == "If" || node.op_type == "StatelessIf";
    std::vector<size_t> args;
    for (size_t i = is_if ? 1 : 0; i < node.data_inputs.size(); ++i) {
      args.push_back(local.at(node.data_inputs[i].producer));
    }
    std::vector<size_t> params;
    for (const auto& name : callee->params()) params.push_back(inner.at(name));

    if (args.size() == params.size()) {
      for (size_t i = 0; i < args.size(); ++i) {
        flat_.AddEdge(args[i], params[i], EdgeKind::kCallArg);
      }
    } else {
      // Arity mismatch (dataset functions, captured inputs): wire
      // conservatively.
      for (size_t a : args) {
        for (size_t p : params) flat_.AddEdge(a, p, EdgeKind::kCallArg);
      }
    }
    // Loop state re-enters the body: results flow back to the call node,
    // and from there into the next iteration's parameters.
    if (node.op_type == "While" || node.op_type == "StatelessWhile") {
      for (size_t p : params) flat_.AddEdge(call, p, EdgeKind::kCallArg);
    }
    for (const auto& name : callee->returns()) {
      flat_.AddEdge(inner.at(name), call, EdgeKind::kCallReturn);
    }
  }

  const ModelBundle& bundle_;
  const int max_depth_;
  const size_t max_nodes_;
  FlatGraph flat_;
  std::map<std::string, int> instances_;
  std::set<std::string> instantiated_;
};

// Breadth-first predecessor map from `source`; SIZE_MAX marks unreached.
std::vector<size_t> BfsParents(const FlatGraph& flat, size_t source) {
  constexpr size_t kUnreached = static_cast<size_t>(-1);
  std::vector<size_t> parent(flat.size(), kUnreached);
  parent[source] = source;
  std::deque<size_t> queue{source};
  while (!queue.empty()) {
    const size_t node = queue.front();
    queue.pop_front();
    for (size_t e : flat.OutEdges(node)) {
      const size_t next = flat.edges()[e].to;
      if (parent[next] != kUnreached) continue;
      parent[next] = node;
      queue.push_back(next);
    }
  }
  return parent;
}

}  // namespace

std::string_view EdgeKindName(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::kData:
      return "data";
    case EdgeKind::kControl:
      return "control";
    case EdgeKind::kCallArg:
      return "call_arg";
    case EdgeKind::kCallReturn:
      return "call_return";
  }
  return "unknown";
}

size_t FlatGraph::AddNode(std::string id, const NodeRecord* record) {
  const size_t index = nodes_.size();
  if (!index_.emplace(id, index).second) {
    throw Error(ErrorCode::kInternal, "duplicate flattened node id " + id);
  }
  nodes_.push_back({std::move(id), record});
  out_.emplace_back();
  in_.emplace_back();
  return index;
}

void FlatGraph::AddEdge(size_t from, size_t to, EdgeKind kind) {
  for (size_t e : out_[from]) {
    if (edges_[e].to == to && edges_[e].kind == kind) return;
  }
  out_[from].push_back(edges_.size());
  in_[to].push_back(edges_.size());
  edges_.push_back({from, to, kind});
}

std::optional<size_t> FlatGraph::IndexOf(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool IsCallOp(std::string_view op_type) {
  static constexpr std::string_view kCallOps[] = {
      "PartitionedCall", "StatefulPartitionedCall", "StatelessWhile",
      "While",           "If",                      "StatelessIf"};
  return std::find(std::begin(kCallOps), std::end(kCallOps), op_type) !=
         std::end(kCallOps);
}

FlatGraph Flatten(const ModelBundle& bundle, int max_depth, size_t max_nodes) {
  return Flattener(bundle, max_depth, max_nodes).Run();
}

std::vector<CategoryHit> ClassifyFlatGraph(const FlatGraph& flat,
                                           const RuleSet& rules) {
  std::vector<CategoryHit> hits;
  for (const auto& node : flat.nodes()) {
    if (node.record == nullptr) continue;
    auto node_hits = ClassifyNode(*node.record, rules, node.id);
    hits.insert(hits.end(), std::make_move_iterator(node_hits.begin()),
                std::make_move_iterator(node_hits.end()));
  }
  return hits;
}

bool TaintState::Has(size_t node, const TaintLabel& label) const {
  const auto& labels = labels_[node];
  return std::binary_search(labels.begin(), labels.end(), label);
}

const std::vector<CategoryHit>& TaintState::HitsOf(size_t node) const {
  static const std::vector<CategoryHit> kNone;
  auto it = hits_.find(node);
  return it == hits_.end() ? kNone : it->second;
}

TaintState PropagateTaint(const FlatGraph& flat,
                          const std::vector<CategoryHit>& hits) {
  TaintState state(flat.size());
  std::set<TaintLabel> seeds;
  for (const auto& hit : hits) {
    const auto index = flat.IndexOf(hit.node_name);
    if (!index) {
      throw Error(ErrorCode::kUnknownNode,
                  "hit references unknown node '" + hit.node_name + "'");
    }
    state.hits_[*index].push_back(hit);
    if (IsSourceCategory(hit.category)) seeds.insert({*index, hit.category});
  }

  // One forward sweep per label; labels arrive in sorted order, so each
  // node's label list stays sorted. Every (node, label) is visited once,
  // which also bounds the work on cyclic graphs.
  std::vector<char> seen(flat.size());
  std::vector<size_t> worklist;
  for (const TaintLabel& label : seeds) {
    std::fill(seen.begin(), seen.end(), 0);
    worklist.assign({label.source});
    seen[label.source] = 1;
    while (!worklist.empty()) {
      const size_t node = worklist.back();
      worklist.pop_back();
      state.labels_[node].push_back(label);
      for (size_t e : flat.OutEdges(node)) {
        const size_t next = flat.edges()[e].to;
        if (seen[next]) continue;
        seen[next] = 1;
        worklist.push_back(next);
      }
    }
  }
  return state;
}

std::string_view ChainKindName(ChainKind kind) {
  switch (kind) {
    case ChainKind::kExfiltration:
      return "Exfiltration";
    case ChainKind::kDropper:
      return "Dropper";
    case ChainKind::kRemoteToExec:
      return "RemoteToExec";
    case ChainKind::kReadToPersistence:
      return "ReadToPersistence";
    case ChainKind::kGeneric:
      return "Generic";
  }
  return "Unknown";
}

std::optional<ChainKind> ParseChainKind(std::string_view name) {
  for (auto kind : {ChainKind::kExfiltration, ChainKind::kDropper,
                    ChainKind::kRemoteToExec, ChainKind::kReadToPersistence,
                    ChainKind::kGeneric}) {
    if (ChainKindName(kind) == name) return kind;
  }
  return std::nullopt;
}

ChainKind ClassifyChain(CoreFunction source, CoreFunction sink,
                        bool sink_has_persistence) {
  using C = CoreFunction;
  if ((source == C::kFileRead || source == C::kEnumeration) &&
      sink == C::kNetworkSend) {
    return ChainKind::kExfiltration;
  }
  if (source == C::kNetworkReceive && sink == C::kFileWrite) {
    return ChainKind::kDropper;
  }
  if (source == C::kNetworkReceive && sink == C::kOpaqueExec) {
    return ChainKind::kRemoteToExec;
  }
  if (source == C::kFileRead && sink == C::kFileWrite && sink_has_persistence) {
    return ChainKind::kReadToPersistence;
  }
  return ChainKind::kGeneric;
}

std::vector<Chain> FindChains(const FlatGraph& flat, const TaintState& taint,
                              const std::vector<EvidenceString>& evidence) {
  std::unordered_map<std::string, std::vector<const EvidenceString*>> by_node;
  for (const auto& e : evidence) by_node[e.origin_node].push_back(&e);

  auto has_enumeration = [&](size_t node) {
    for (const auto& hit : taint.HitsOf(node)) {
      if (hit.category == CoreFunction::kEnumeration) return true;
    }
    for (const auto& label : taint.LabelsOf(node)) {
      if (label.category == CoreFunction::kEnumeration) return true;
    }
    return false;
  };

  std::map<size_t, std::vector<size_t>> parents;  // Cached per source node.
  std::vector<Chain> chains;
  for (size_t sink = 0; sink < flat.size(); ++sink) {
    std::vector<CoreFunction> sink_categories;
    for (const auto& hit : taint.HitsOf(sink)) {
      if (IsSinkCategory(hit.category)) sink_categories.push_back(hit.category);
    }
    if (sink_categories.empty()) continue;

    bool sink_persistence = false;
    if (auto it = by_node.find(flat.IdOf(sink)); it != by_node.end()) {
      for (const auto* e : it->second) {
        if (e->interpretation == Interpretation::kPersistencePath) {
          sink_persistence = true;
        }
      }
    }

    for (const TaintLabel& label : taint.LabelsOf(sink)) {
      if (label.source == sink) continue;
      auto [it, inserted] = parents.try_emplace(label.source);
      if (inserted) it->second = BfsParents(flat, label.source);
      const auto& parent = it->second;

      std::vector<size_t> path_nodes;
      for (size_t n = sink; n != label.source; n = parent[n]) {
        path_nodes.push_back(n);
      }
      path_nodes.push_back(label.source);
      std::reverse(path_nodes.begin(), path_nodes.end());

      std::vector<std::string> path;
      std::vector<EvidenceString> chain_evidence;
      bool enumeration = false;
      for (size_t i = 0; i < path_nodes.size(); ++i) {
        const size_t n = path_nodes[i];
        path.push_back(flat.IdOf(n));
        if (i + 1 < path_nodes.size() && has_enumeration(n)) enumeration = true;
        if (auto ev = by_node.find(flat.IdOf(n)); ev != by_node.end()) {
          for (const auto* e : ev->second) chain_evidence.push_back(*e);
        }
      }

      for (CoreFunction sink_category : sink_categories) {
        Chain chain;
        chain.kind = ClassifyChain(label.category, sink_category,
                                   sink_persistence);
        chain.source = flat.IdOf(label.source);
        chain.source_category = label.category;
        chain.sink = flat.IdOf(sink);
        chain.sink_category = sink_category;
        chain.path = path;
        chain.evidence = chain_evidence;
        chain.enumeration_assisted = enumeration;
        chains.push_back(std::move(chain));
      }
    }
  }

  std::sort(chains.begin(), chains.end(), [](const Chain& a, const Chain& b) {
    return std::tie(a.kind, a.source, a.sink, a.source_category,
                    a.sink_category) < std::tie(b.kind, b.source, b.sink,
                                                b.source_category,
                                                b.sink_category);
  });
  return chains;
}

}  // namespace graphscan
