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

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>
#include <utility>

#include "graphscan/chain_analyzer.h"

namespace graphscan {
namespace {

constexpr size_t kMaxEvidenceBytes = 256;

constexpr std::string_view kPersistenceBasenames[] = {
    ".bashrc", ".bash_profile", ".profile",   ".zshrc",
    ".zprofile", "authorized_keys", "crontab",
};

// Lower-cased, forward-slash fragments of autostart locations.
constexpr std::string_view kPersistenceLocations[] = {
    "/etc/cron",
    "/var/spool/cron",
    "/etc/init.d/",
    "/etc/rc.local",
    "/etc/profile",
    "/etc/systemd/system/",
    "/etc/ld.so.preload",
    "/.config/autostart/",
    "/.config/systemd/user/",
    "/library/launchagents/",
    "/library/launchdaemons/",
    "/start menu/programs/startup",
    "/currentversion/run",
};

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool IsBlank(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

std::string Truncate(std::string value) {
  if (value.size() <= kMaxEvidenceBytes) return value;
  value.resize(kMaxEvidenceBytes);
  return SanitizeUtf8(value) + "...";
}

}  // namespace

std::string_view InterpretationName(Interpretation interpretation) {
  switch (interpretation) {
    case Interpretation::kRemoteEndpoint:
      return "RemoteEndpoint";
    case Interpretation::kFilesystemPath:
      return "FilesystemPath";
    case Interpretation::kGlobPattern:
      return "GlobPattern";
    case Interpretation::kPersistencePath:
      return "PersistencePath";
    case Interpretation::kOpaque:
      return "Opaque";
  }
  return "Unknown";
}

Interpretation ClassifyString(std::string_view value) {
  static const std::regex kHostPort("^[a-zA-Z0-9.-]+:[0-9]+$");
  static const std::regex kScheme("^(grpc|http|https)://", std::regex::icase);
  const std::string text = SanitizeUtf8(value);
  if (std::regex_match(text, kHostPort) || std::regex_search(text, kScheme)) {
    return Interpretation::kRemoteEndpoint;
  }
  if (text.find_first_of("*?") != std::string::npos) {
    return Interpretation::kGlobPattern;
  }

  std::string path = Lower(text);
  std::replace(path.begin(), path.end(), '\\', '/');
  const bool file_url = path.starts_with("file://");
  if (file_url) path.erase(0, 7);
  const std::string_view basename =
      std::string_view(path).substr(path.find_last_of('/') + 1);
  if (std::find(std::begin(kPersistenceBasenames),
                std::end(kPersistenceBasenames),
                basename) != std::end(kPersistenceBasenames)) {
    return Interpretation::kPersistencePath;
  }
  for (std::string_view location : kPersistenceLocations) {
    if (path.find(location) != std::string::npos) {
      return Interpretation::kPersistencePath;
    }
  }

  const bool drive_letter = text.size() >= 3 && std::isalpha(
                                static_cast<unsigned char>(text[0])) &&
                            text[1] == ':' && (text[2] == '\\' || text[2] == '/');
  if (file_url || text.starts_with('/') || text.starts_with('~') ||
      drive_letter) {
    return Interpretation::kFilesystemPath;
  }
  return Interpretation::kOpaque;
}

std::vector<EvidenceString> ExtractStringEvidence(
    const FlatGraph& flat, const std::vector<CategoryHit>& hits) {
  std::set<size_t> hit_nodes;
  for (const auto& hit : hits) {
    if (auto index = flat.IndexOf(hit.node_name)) hit_nodes.insert(*index);
  }

  std::vector<EvidenceString> out;
  for (size_t node : hit_nodes) {
    const std::string& origin = flat.IdOf(node);
    std::set<std::string> seen;
    auto add = [&](const std::string& raw, const std::string& via) {
      if (IsBlank(raw)) return;
      std::string value = Truncate(SanitizeUtf8(raw));
      if (!seen.insert(value).second) return;
      out.push_back({std::move(value), origin, via, ClassifyString(raw)});
    };

    if (const NodeRecord* record = flat.nodes()[node].record) {
      for (const auto& [name, attr] : record->attrs) {
        if (name.starts_with('_')) continue;
        if (const auto* s = std::get_if<StrAttr>(&attr)) {
          add(s->value, "");
        } else if (const auto* l = std::get_if<StrListAttr>(&attr)) {
          for (const auto& v : l->values) add(v, "");
        }
      }
    }

    // Breadth-first over incoming data edges, at most kConstHarvestRadius
    // hops.
    std::set<size_t> visited{node};
    std::vector<size_t> frontier{node};
    for (int hop = 0; hop < kConstHarvestRadius && !frontier.empty(); ++hop) {
      std::vector<size_t> next;
      for (size_t n : frontier) {
        for (size_t e : flat.InEdges(n)) {
          const FlatEdge& edge = flat.edges()[e];
          if (edge.kind != EdgeKind::kData) continue;
          if (!visited.insert(edge.from).second) continue;
          next.push_back(edge.from);
          const NodeRecord* producer = flat.nodes()[edge.from].record;
          if (producer == nullptr || producer->op_type != "Const") continue;
          auto value = producer->attrs.find("value");
          if (value == producer->attrs.end()) continue;
          if (const auto* t = std::get_if<TensorStringsAttr>(&value->second)) {
            for (const auto& v : t->values) add(v, flat.IdOf(edge.from));
          }
        }
      }
      frontier = std::move(next);
    }
  }
  return out;
}

}  // namespace graphscan
