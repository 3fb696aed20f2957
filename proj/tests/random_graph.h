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

// Random model programs and a brute-force reference for the chain analysis,
// shared by the unit tests and the acceptance binary.

#ifndef GRAPHSCAN_TESTS_RANDOM_GRAPH_H_
#define GRAPHSCAN_TESTS_RANDOM_GRAPH_H_

#include <algorithm>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "graphscan/chain_analyzer.h"
#include "graphscan/graph.h"
#include "graphscan/op_taxonomy.h"

namespace graphscan::testing {

struct PoolOp {
  const char* op_type;
  std::vector<CoreFunction> categories;
};

// Ops drawn by the generator, with categories written out independently of
// the rule table.
inline const std::vector<PoolOp>& OpPool() {
  using C = CoreFunction;
  static const std::vector<PoolOp> kPool = {
      {"ReadFile", {C::kFileRead}},
      {"WriteFile", {C::kFileWrite}},
      {"RpcCall", {C::kNetworkSend, C::kNetworkReceive}},
      {"RpcClient", {C::kNetworkReceive}},
      {"MatchingFiles", {C::kEnumeration}},
      {"EagerPyFunc", {C::kOpaqueExec}},
      {"Identity", {}},
      {"MatMul", {}},
      {"Add", {}},
      {"Reshape", {}},
      {"ConcatV2", {}},
  };
  return kPool;
}

inline const PoolOp& PoolEntry(const std::string& op_type) {
  for (const auto& entry : OpPool()) {
    if (op_type == entry.op_type) return entry;
  }
  static const PoolOp kNone{"", {}};
  return kNone;
}

// A main graph of `n` nodes with random data and control edges (cycles
// allowed). Some WriteFile nodes carry a persistence path in a string attr.
inline ModelBundle RandomBundle(uint32_t seed, int n, double edge_prob) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unit(0, 1);
  ModelBundle bundle;
  bundle.source_path = "random-" + std::to_string(seed);
  std::vector<NodeRecord> nodes(n);
  for (int i = 0; i < n; ++i) {
    NodeRecord& node = nodes[i];
    node.name = "n" + std::to_string(i);
    node.op_type = OpPool()[rng() % OpPool().size()].op_type;
    if (node.op_type == std::string("WriteFile") && unit(rng) < 0.5) {
      node.attrs["target"] = StrAttr{unit(rng) < 0.5
                                         ? "/tmp/graphscan-sandbox/home/.bashrc"
                                         : "/tmp/graphscan-sandbox/out.bin"};
    }
  }
  for (int to = 0; to < n; ++to) {
    for (int from = 0; from < n; ++from) {
      if (from == to || unit(rng) >= edge_prob) continue;
      if (unit(rng) < 0.8) {
        nodes[to].data_inputs.push_back({nodes[from].name, 0});
      } else {
        nodes[to].control_inputs.push_back(nodes[from].name);
      }
    }
  }
  for (auto& node : nodes) bundle.main_graph.AddNode(std::move(node));
  return bundle;
}

struct OracleChain {
  std::string source;
  CoreFunction source_category;
  std::string sink;
  CoreFunction sink_category;
  ChainKind kind;
  int distance;  // Edges on a shortest path.
  auto operator<=>(const OracleChain&) const = default;
};

inline ChainKind OracleKind(CoreFunction source, CoreFunction sink,
                            bool persistence) {
  using C = CoreFunction;
  static const std::map<std::pair<C, C>, ChainKind> kTable = {
      {{C::kFileRead, C::kNetworkSend}, ChainKind::kExfiltration},
      {{C::kEnumeration, C::kNetworkSend}, ChainKind::kExfiltration},
      {{C::kNetworkReceive, C::kFileWrite}, ChainKind::kDropper},
      {{C::kNetworkReceive, C::kOpaqueExec}, ChainKind::kRemoteToExec},
  };
  if (auto it = kTable.find({source, sink}); it != kTable.end()) {
    return it->second;
  }
  if (source == C::kFileRead && sink == C::kFileWrite && persistence) {
    return ChainKind::kReadToPersistence;
  }
  return ChainKind::kGeneric;
}

// All-pairs shortest paths by Floyd-Warshall over a single graph.
class Reference {
 public:
  explicit Reference(const Graph& graph) : graph_(graph) {
    const size_t n = graph.size();
    for (size_t i = 0; i < n; ++i) index_[graph.nodes()[i].name] = i;
    dist_.assign(n, std::vector<int>(n, kInf));
    for (size_t i = 0; i < n; ++i) dist_[i][i] = 0;
    for (size_t to = 0; to < n; ++to) {
      const NodeRecord& node = graph.nodes()[to];
      for (const auto& in : node.data_inputs) dist_[index_.at(in.producer)][to] = 1;
      for (const auto& in : node.control_inputs) dist_[index_.at(in)][to] = 1;
    }
    for (size_t k = 0; k < n; ++k) {
      for (size_t i = 0; i < n; ++i) {
        if (dist_[i][k] == kInf) continue;
        for (size_t j = 0; j < n; ++j) {
          if (dist_[k][j] == kInf) continue;
          dist_[i][j] = std::min(dist_[i][j], dist_[i][k] + dist_[k][j]);
        }
      }
    }
  }

  static constexpr int kInf = std::numeric_limits<int>::max() / 4;

  int Distance(size_t from, size_t to) const { return dist_[from][to]; }
  bool HasEdge(size_t from, size_t to) const {
    const NodeRecord& node = graph_.nodes()[to];
    const std::string& name = graph_.nodes()[from].name;
    for (const auto& in : node.data_inputs) {
      if (in.producer == name) return true;
    }
    return std::find(node.control_inputs.begin(), node.control_inputs.end(),
                      name) != node.control_inputs.end();
  }
  size_t IndexOf(const std::string& name) const { return index_.at(name); }

  std::vector<OracleChain> Chains() const {
    std::vector<OracleChain> out;
    const auto& nodes = graph_.nodes();
    for (size_t s = 0; s < nodes.size(); ++s) {
      for (CoreFunction sc : PoolEntry(nodes[s].op_type).categories) {
        if (!IsSource(sc)) continue;
        for (size_t t = 0; t < nodes.size(); ++t) {
          if (t == s || dist_[s][t] == kInf) continue;
          for (CoreFunction tc : PoolEntry(nodes[t].op_type).categories) {
            if (!IsSink(tc)) continue;
            out.push_back({"main/" + nodes[s].name, sc, "main/" + nodes[t].name,
                           tc, OracleKind(sc, tc, Persistent(nodes[t])),
                           dist_[s][t]});
          }
        }
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // Whether some node before the sink on `path` lists files or is reachable
  // from a node that does.
  bool EnumerationOnPath(const std::vector<std::string>& path) const {
    const auto& nodes = graph_.nodes();
    for (size_t i = 0; i + 1 < path.size(); ++i) {
      const size_t p = index_.at(path[i].substr(5));
      for (size_t e = 0; e < nodes.size(); ++e) {
        if (nodes[e].op_type == std::string("MatchingFiles") &&
            dist_[e][p] != kInf) {
          return true;
        }
      }
    }
    return false;
  }

 private:
  static bool IsSource(CoreFunction c) {
    return c == CoreFunction::kFileRead || c == CoreFunction::kNetworkReceive ||
           c == CoreFunction::kEnumeration;
  }
  static bool IsSink(CoreFunction c) {
    return c == CoreFunction::kFileWrite || c == CoreFunction::kNetworkSend ||
           c == CoreFunction::kOpaqueExec;
  }
  static bool Persistent(const NodeRecord& node) {
    auto it = node.attrs.find("target");
    if (it == node.attrs.end()) return false;
    const std::string& value = std::get<StrAttr>(it->second).value;
    return value.ends_with("/.bashrc");
  }

  const Graph& graph_;
  std::map<std::string, size_t> index_;
  std::vector<std::vector<int>> dist_;
};

inline std::vector<Chain> AnalyzeBundle(const ModelBundle& bundle) {
  const FlatGraph flat = Flatten(bundle);
  const auto hits = ClassifyFlatGraph(flat, BuiltinRules());
  const auto evidence = ExtractStringEvidence(flat, hits);
  return FindChains(flat, PropagateTaint(flat, hits), evidence);
}

// Compares the analyzer against the reference on one bundle. Returns an
// empty string on agreement, else a description of the first mismatch.
inline std::string CompareWithReference(const ModelBundle& bundle) {
  const Reference ref(bundle.main_graph);
  const std::vector<OracleChain> expected = ref.Chains();
  const std::vector<Chain> actual = AnalyzeBundle(bundle);
  const std::string where = bundle.source_path + ": ";

  std::vector<OracleChain> got;
  for (const Chain& chain : actual) {
    if (chain.path.size() < 2 || chain.path.front() != chain.source ||
        chain.path.back() != chain.sink) {
      return where + "malformed path for " + chain.source + "->" + chain.sink;
    }
    for (size_t i = 0; i + 1 < chain.path.size(); ++i) {
      if (!ref.HasEdge(ref.IndexOf(chain.path[i].substr(5)),
                       ref.IndexOf(chain.path[i + 1].substr(5)))) {
        return where + "path step " + chain.path[i] + "->" + chain.path[i + 1] +
               " is not an edge";
      }
    }
    if (chain.enumeration_assisted != ref.EnumerationOnPath(chain.path)) {
      return where + "enumeration flag differs for " + chain.source + "->" +
             chain.sink;
    }
    got.push_back({chain.source, chain.source_category, chain.sink,
                   chain.sink_category, chain.kind,
                   static_cast<int>(chain.path.size()) - 1});
  }
  std::sort(got.begin(), got.end());
  if (got.size() != expected.size()) {
    return where + "expected " + std::to_string(expected.size()) +
           " chains, got " + std::to_string(got.size());
  }
  for (size_t i = 0; i < got.size(); ++i) {
    if (got[i] != expected[i]) {
      return where + "chain mismatch at " + expected[i].source + "->" +
             expected[i].sink + " (kind " +
             std::string(ChainKindName(expected[i].kind)) + ", distance " +
             std::to_string(expected[i].distance) + ") vs " + got[i].source +
             "->" + got[i].sink + " (kind " +
             std::string(ChainKindName(got[i].kind)) + ", distance " +
             std::to_string(got[i].distance) + ")";
    }
  }
  return "";
}

}  // namespace graphscan::testing

#endif  // GRAPHSCAN_TESTS_RANDOM_GRAPH_H_
