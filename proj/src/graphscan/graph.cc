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

#include "graphscan/graph.h"

namespace graphscan {

std::string_view ModelFormatName(ModelFormat format) {
  switch (format) {
    case ModelFormat::kSavedModelDir:
      return "saved_model_dir";
    case ModelFormat::kGraphDefBinary:
      return "graphdef_binary";
    case ModelFormat::kGraphDefText:
      return "graphdef_text";
  }
  return "unknown";
}

std::vector<std::string> ReferencedFunctions(const AttrMap& attrs) {
  std::vector<std::string> names;
  for (const auto& [key, value] : attrs) {
    if (const auto* func = std::get_if<FuncAttr>(&value)) {
      if (!func->name.empty()) names.push_back(func->name);
    } else if (const auto* list = std::get_if<FuncListAttr>(&value)) {
      for (const auto& name : list->names) {
        if (!name.empty()) names.push_back(name);
      }
    }
  }
  return names;
}

bool Graph::AddNode(NodeRecord node) {
  auto [it, inserted] = index_.emplace(node.name, nodes_.size());
  if (!inserted) return false;
  nodes_.push_back(std::move(node));
  return true;
}

const NodeRecord* Graph::Find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return nullptr;
  return &nodes_[it->second];
}

bool FunctionTable::Add(Graph graph) {
  std::string name = graph.name();
  return entries_.emplace(std::move(name), std::move(graph)).second;
}

const Graph* FunctionTable::Resolve(std::string_view name) const {
  auto it = entries_.find(name);
  return it == entries_.end() ? nullptr : &it->second;
}

size_t ModelBundle::TotalNodeCount() const {
  size_t total = main_graph.size();
  for (const auto& [name, graph] : functions.entries()) total += graph.size();
  return total;
}

}  // namespace graphscan
