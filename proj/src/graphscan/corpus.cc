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

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "graphscan/errors.h"
#include "json.hpp"

namespace graphscan {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::vector<std::string> SplitWhitespace(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  for (std::string word; in >> word;) out.push_back(word);
  return out;
}

std::vector<std::string> SplitComma(std::string_view text) {
  std::vector<std::string> out;
  size_t start = 0;
  while (start <= text.size()) {
    const size_t comma = std::min(text.find(',', start), text.size());
    out.emplace_back(text.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

bool IsModelEntry(const fs::directory_entry& entry, const LoadOptions& load) {
  std::error_code ec;
  if (entry.is_directory(ec)) {
    return fs::is_regular_file(entry.path() / kSavedModelFileName, ec);
  }
  if (!entry.is_regular_file(ec)) return false;
  try {
    DetectFormat(entry.path(), load);
    return true;
  } catch (const Error&) {
    return false;
  }
}

std::string KindList(const std::vector<ChainKind>& kinds) {
  if (kinds.empty()) return "-";
  std::string out;
  for (size_t i = 0; i < kinds.size(); ++i) {
    if (i > 0) out += ",";
    out += ChainKindName(kinds[i]);
  }
  return out;
}

void ScanRow(const fs::path& path, const RuleSet& rules,
             const CorpusOptions& options, CorpusRow& row) {
  try {
    ScanResult result = ScanModel(path, rules, options.scan);
    row.actual = result.report.verdict;
    std::set<ChainKind> kinds;
    for (const auto& f : result.report.findings) {
      if (f.chain) kinds.insert(f.chain->kind);
    }
    row.actual_chain_kinds.assign(kinds.begin(), kinds.end());
    row.report = std::move(result.report);
  } catch (const Error& e) {
    row.error = std::string(ErrorCodeName(e.code())) + ": " + e.what();
  } catch (const std::exception& e) {
    row.error = std::string("Internal: ") + e.what();
  }
}

void Judge(CorpusRow& row, bool has_manifest, Severity fail_on) {
  if (!row.error.empty()) {
    row.pass = false;
    return;
  }
  if (!row.actual) {
    row.pass = false;
    row.error = "listed in the manifest but not found in the corpus";
    return;
  }
  if (!has_manifest) {
    row.pass = *row.actual < fail_on;
    return;
  }
  if (!row.expected) {
    row.pass = true;
    row.notes.push_back("not listed in the manifest");
    return;
  }
  row.pass = *row.actual == *row.expected;
  for (ChainKind kind : row.expected_chain_kinds) {
    if (std::find(row.actual_chain_kinds.begin(), row.actual_chain_kinds.end(),
                  kind) == row.actual_chain_kinds.end()) {
      row.notes.push_back("expected chain kind " +
                          std::string(ChainKindName(kind)) + " not found");
    }
  }
}

}  // namespace

std::vector<ManifestEntry> ParseManifest(std::string_view text,
                                         std::string_view origin) {
  std::map<std::string, ManifestEntry> entries;
  std::istringstream in{std::string(text)};
  int line_number = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_number;
    auto fail = [&](const std::string& what) {
      throw Error(ErrorCode::kParseError, std::string(origin) + ":" +
                                              std::to_string(line_number) +
                                              ": " + what);
    };
    std::string notes;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      notes = line.substr(hash + 1);
      line.resize(hash);
      const auto begin = notes.find_first_not_of(" \t");
      notes = begin == std::string::npos ? "" : notes.substr(begin);
      while (!notes.empty() && (notes.back() == '\r' || notes.back() == ' ')) {
        notes.pop_back();
      }
    }
    const std::vector<std::string> columns = SplitWhitespace(line);
    if (columns.empty()) continue;
    if (columns.size() < 2) fail("expected '<model> <verdict> [kinds]'");
    if (columns.size() > 3) fail("unexpected column '" + columns[3] + "'");

    ManifestEntry entry;
    entry.model_name = columns[0];
    entry.notes = notes;
    const auto verdict = ParseSeverity(columns[1]);
    if (!verdict) fail("unknown verdict '" + columns[1] + "'");
    entry.expected_verdict = *verdict;
    if (columns.size() == 3 && columns[2] != "-") {
      for (const auto& name : SplitComma(columns[2])) {
        const auto kind = ParseChainKind(name);
        if (!kind) fail("unknown chain kind '" + name + "'");
        entry.expected_chain_kinds.push_back(*kind);
      }
    }
    if (!entries.emplace(entry.model_name, entry).second) {
      fail("duplicate model '" + entry.model_name + "'");
    }
  }
  std::vector<ManifestEntry> out;
  for (auto& [name, entry] : entries) out.push_back(std::move(entry));
  return out;
}

std::vector<ManifestEntry> LoadManifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kNotFound, "cannot read manifest " + path.string());
  }
  std::ostringstream text;
  text << in.rdbuf();
  return ParseManifest(text.str(), path.string());
}

bool CorpusResult::AllPass() const {
  return std::all_of(rows.begin(), rows.end(),
                     [](const CorpusRow& row) { return row.pass; });
}

CorpusResult ScanCorpus(const fs::path& dir, const RuleSet& rules,
                        const std::optional<std::vector<ManifestEntry>>& manifest,
                        const CorpusOptions& options) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw Error(ErrorCode::kNotFound, "corpus directory not found: " + dir.string());
  }

  std::map<std::string, CorpusRow> rows;
  std::map<std::string, fs::path> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.starts_with('.') || !IsModelEntry(entry, options.scan.load)) continue;
    rows[name].name = name;
    paths[name] = entry.path();
  }
  if (manifest) {
    for (const auto& e : *manifest) {
      CorpusRow& row = rows[e.model_name];
      row.name = e.model_name;
      row.expected = e.expected_verdict;
      row.expected_chain_kinds = e.expected_chain_kinds;
    }
  }

  std::vector<CorpusRow*> work;
  std::vector<fs::path> work_paths;
  for (auto& [name, row] : rows) {
    if (auto it = paths.find(name); it != paths.end()) {
      work.push_back(&row);
      work_paths.push_back(it->second);
    }
  }

  size_t workers = options.workers != 0
                       ? options.workers
                       : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, std::max<size_t>(work.size(), 1));
  std::atomic<size_t> next{0};
  auto drain = [&] {
    for (size_t i = next++; i < work.size(); i = next++) {
      ScanRow(work_paths[i], rules, options, *work[i]);
    }
  };
  std::vector<std::thread> pool;
  for (size_t i = 1; i < workers; ++i) pool.emplace_back(drain);
  drain();
  for (auto& t : pool) t.join();

  CorpusResult result;
  result.has_manifest = manifest.has_value();
  for (auto& [name, row] : rows) {
    Judge(row, result.has_manifest, options.fail_on);
    result.rows.push_back(std::move(row));
  }
  return result;
}

std::string RenderCorpus(const CorpusResult& result, ReportFormat format) {
  size_t passed = 0;
  for (const auto& row : result.rows) passed += row.pass ? 1 : 0;
  const size_t failed = result.rows.size() - passed;
  auto severity = [](const std::optional<Severity>& s) -> std::string {
    return s ? std::string(SeverityName(*s)) : "-";
  };

  if (format == ReportFormat::kJson) {
    json models = json::array();
    for (const auto& row : result.rows) {
      json expected_kinds = json::array();
      for (auto k : row.expected_chain_kinds) expected_kinds.push_back(ChainKindName(k));
      json actual_kinds = json::array();
      for (auto k : row.actual_chain_kinds) actual_kinds.push_back(ChainKindName(k));
      models.push_back(
          {{"name", row.name},
           {"expected", row.expected ? json(SeverityName(*row.expected)) : json()},
           {"actual", row.actual ? json(SeverityName(*row.actual)) : json()},
           {"expected_chain_kinds", expected_kinds},
           {"chain_kinds", actual_kinds},
           {"pass", row.pass},
           {"error", row.error.empty() ? json() : json(row.error)},
           {"notes", row.notes}});
    }
    const json doc = {{"schema_version", kReportSchemaVersion},
                      {"manifest", result.has_manifest},
                      {"models", models},
                      {"passed", passed},
                      {"failed", failed}};
    return doc.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
  }

  size_t width = 5;
  for (const auto& row : result.rows) width = std::max(width, row.name.size());
  std::ostringstream out;
  auto pad = [](std::string s, size_t n) {
    if (s.size() < n) s.append(n - s.size(), ' ');
    return s;
  };
  out << pad("MODEL", width) << "  " << pad("EXPECTED", 14) << pad("ACTUAL", 14)
      << pad("CHAINS", 28) << "RESULT\n";
  for (const auto& row : result.rows) {
    out << pad(row.name, width) << "  " << pad(severity(row.expected), 14)
        << pad(severity(row.actual), 14)
        << pad(KindList(row.actual_chain_kinds), 28)
        << (row.pass ? "PASS" : "FAIL") << "\n";
    if (!row.error.empty()) out << "    error: " << row.error << "\n";
    for (const auto& note : row.notes) out << "    note: " << note << "\n";
  }
  out << result.rows.size() << " models, " << passed << " passed, " << failed
      << " failed\n";
  return out.str();
}

}  // namespace graphscan
