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

// Batch scanning of a directory of models, optionally checked against a
// manifest of expected verdicts.
//
// Manifest format, one model per line:
//
//   # comment
//   exfil_model    malicious  Exfiltration       # free-form notes
//   dropper_model  malicious  Dropper,Generic
//   linear_model   clean
//
// Columns are whitespace separated: the model's entry name in the corpus
// directory, the expected verdict, and optionally a comma-separated list of
// chain kinds the model is expected to contain.

#ifndef GRAPHSCAN_CORPUS_H_
#define GRAPHSCAN_CORPUS_H_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "graphscan/risk_report.h"
#include "graphscan/scanner.h"

namespace graphscan {

struct ManifestEntry {
  std::string model_name;
  Severity expected_verdict = Severity::kClean;
  std::vector<ChainKind> expected_chain_kinds;
  std::string notes;
};

// Entries sorted by model name. Throws kParseError (with the line number)
// on unknown verdicts or chain kinds, extra columns and duplicate names.
std::vector<ManifestEntry> ParseManifest(std::string_view text,
                                         std::string_view origin = "manifest");
std::vector<ManifestEntry> LoadManifest(const std::filesystem::path& path);

struct CorpusRow {
  std::string name;
  std::optional<Severity> expected;
  std::optional<Severity> actual;  // Unset when the scan failed.
  std::vector<ChainKind> expected_chain_kinds;
  std::vector<ChainKind> actual_chain_kinds;  // Sorted, unique.
  std::string error;
  std::vector<std::string> notes;
  bool pass = false;
  std::optional<ScanReport> report;
};

struct CorpusResult {
  bool has_manifest = false;
  std::vector<CorpusRow> rows;  // Ordered by name.

  bool AllPass() const;
};

struct CorpusOptions {
  ScanOptions scan;
  Severity fail_on = Severity::kSuspicious;
  size_t workers = 0;  // 0: hardware concurrency.
};

// Scans every SavedModel directory and recognized graph file directly under
// `dir`. With a manifest a row passes iff its verdict equals the expected
// one; a listed model that is absent fails. Without one a row passes iff its
// verdict is below `fail_on`. Failed scans always fail their row.
CorpusResult ScanCorpus(const std::filesystem::path& dir, const RuleSet& rules,
                        const std::optional<std::vector<ManifestEntry>>& manifest,
                        const CorpusOptions& options = {});

// Text table or JSON. Independent of scan order and worker count.
std::string RenderCorpus(const CorpusResult& result, ReportFormat format);

}  // namespace graphscan

#endif  // GRAPHSCAN_CORPUS_H_
