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

// graphscan: static malware scanner for serialized model graphs.
//
//   graphscan scan <model> [--format text|json|sarif] [--fail-on LEVEL] ...
//   graphscan corpus <dir> [--manifest FILE] [--format text|json]
//   graphscan rules list [--rules FILE]
//   graphscan triage <model> --endpoint URL [--model NAME] ...
//
// Exit status: 0 below the --fail-on threshold, 1 at or above it, 2 on usage
// or input errors. Machine-readable formats write only the document to
// stdout; diagnostics go to stderr.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "graphscan/c_api.h"

namespace {

constexpr int kExitUsage = 2;

struct StatusDeleter {
  void operator()(GS_Status* s) const { GS_DeleteStatus(s); }
};
struct RuleSetDeleter {
  void operator()(GS_RuleSet* r) const { GS_DeleteRuleSet(r); }
};
struct ReportDeleter {
  void operator()(GS_Report* r) const { GS_DeleteReport(r); }
};
struct OptionsDeleter {
  void operator()(GS_ScanOptions* o) const { GS_DeleteScanOptions(o); }
};
struct TriageOptionsDeleter {
  void operator()(GS_TriageOptions* o) const { GS_DeleteTriageOptions(o); }
};
struct CorpusDeleter {
  void operator()(GS_Corpus* c) const { GS_DeleteCorpus(c); }
};
struct StringDeleter {
  void operator()(char* s) const { GS_FreeString(s); }
};

using Status = std::unique_ptr<GS_Status, StatusDeleter>;
using OwnedString = std::unique_ptr<char, StringDeleter>;

struct CommonFlags {
  std::string format = "text";
  std::string rules_path;
  std::string fail_on = "suspicious";
  int max_depth = 16;
  std::string out_path;
};

struct TriageFlags {
  std::string endpoint;
  std::string model = "default";
  std::string api_key_env = "GRAPHSCAN_API_KEY";
  int timeout_secs = 60;
  bool print_prompt = false;
};

int Fail(const std::string& what, const GS_Status* status) {
  std::cerr << "graphscan: " << what << ": " << GS_CodeName(GS_GetCode(status))
            << ": " << GS_Message(status) << "\n";
  return kExitUsage;
}

int Usage(const std::string& message) {
  std::cerr << "graphscan: " << message << "\n";
  return kExitUsage;
}

// Writes `text` to --out or stdout. Returns false on an I/O error.
bool Emit(const std::string& out_path, const char* text) {
  if (out_path.empty()) {
    std::cout << text;
    std::cout.flush();
    return static_cast<bool>(std::cout);
  }
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  out << text;
  out.close();
  if (!out) {
    std::cerr << "graphscan: cannot write " << out_path << "\n";
    return false;
  }
  return true;
}

std::unique_ptr<GS_RuleSet, RuleSetDeleter> LoadRules(const std::string& path,
                                                      GS_Status* status) {
  return std::unique_ptr<GS_RuleSet, RuleSetDeleter>(
      GS_LoadRules(path.empty() ? nullptr : path.c_str(), status));
}

std::string UtcNow() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void AddCommonFlags(CLI::App* cmd, CommonFlags& flags, bool with_sarif) {
  cmd->add_option("--format", flags.format, "Output format")
      ->check(with_sarif ? CLI::IsMember({"text", "json", "sarif"})
                         : CLI::IsMember({"text", "json"}))
      ->capture_default_str();
  cmd->add_option("--rules", flags.rules_path, "Rule override file (textproto)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--fail-on", flags.fail_on,
                  "Lowest verdict that makes the exit status 1")
      ->check(CLI::IsMember({"informational", "suspicious", "malicious"}))
      ->capture_default_str();
  cmd->add_option("--max-depth", flags.max_depth,
                  "Maximum function inlining depth")
      ->check(CLI::Range(0, 1024))
      ->capture_default_str();
  cmd->add_option("--out", flags.out_path, "Write the report here instead of stdout");
}

int RunScan(const std::string& path, const CommonFlags& flags, bool envelope,
            const TriageFlags* triage) {
  Status status(GS_NewStatus());
  auto rules = LoadRules(flags.rules_path, status.get());
  if (!rules) return Fail("cannot load rules", status.get());

  std::unique_ptr<GS_ScanOptions, OptionsDeleter> options(GS_NewScanOptions());
  GS_SetMaxDepth(options.get(), flags.max_depth);

  const std::string scanned_at = UtcNow();
  const auto start = std::chrono::steady_clock::now();
  std::unique_ptr<GS_Report, ReportDeleter> report(
      GS_Scan(path.c_str(), rules.get(), options.get(), status.get()));
  if (!report) return Fail("cannot scan " + path, status.get());

  if (triage != nullptr) {
    if (triage->print_prompt) {
      OwnedString prompt(GS_RenderTriagePrompt(report.get(), 64 * 1024,
                                               status.get()));
      if (!prompt) return Fail("cannot build triage prompt", status.get());
      std::cerr << prompt.get() << "\n";
    }
    std::unique_ptr<GS_TriageOptions, TriageOptionsDeleter> topts(
        GS_NewTriageOptions(triage->endpoint.c_str(), triage->model.c_str(),
                            triage->api_key_env.c_str()));
    GS_SetTriageTimeoutMs(topts.get(), int64_t{triage->timeout_secs} * 1000);
    GS_Triage(report.get(), topts.get(), status.get());
    if (GS_GetCode(status.get()) != GS_OK) {
      return Fail("triage", status.get());
    }
  }
  const double seconds = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start)
                             .count();

  GS_Format format = GS_FORMAT_TEXT;
  GS_ParseFormat(flags.format.c_str(), &format);
  OwnedString rendered(
      envelope ? GS_RenderReportEnvelope(report.get(), scanned_at.c_str(),
                                         seconds, status.get())
               : GS_RenderReport(report.get(), format, status.get()));
  if (!rendered) return Fail("cannot render report", status.get());
  if (!Emit(flags.out_path, rendered.get())) return kExitUsage;

  // Warnings are already inside the document for json/sarif; for text they
  // are echoed to stderr as well so they are visible when --out is used.
  if (format == GS_FORMAT_TEXT && !flags.out_path.empty()) {
    for (size_t i = 0; i < GS_ReportWarningCount(report.get()); ++i) {
      std::cerr << "graphscan: warning: " << GS_ReportWarning(report.get(), i)
                << "\n";
    }
  }

  GS_Severity threshold = GS_SUSPICIOUS;
  GS_ParseSeverity(flags.fail_on.c_str(), &threshold);
  return GS_ExitCode(GS_ReportVerdict(report.get()), threshold);
}

int RunCorpus(const std::string& dir, const std::string& manifest,
              const CommonFlags& flags, int jobs) {
  Status status(GS_NewStatus());
  auto rules = LoadRules(flags.rules_path, status.get());
  if (!rules) return Fail("cannot load rules", status.get());

  std::unique_ptr<GS_ScanOptions, OptionsDeleter> options(GS_NewScanOptions());
  GS_SetMaxDepth(options.get(), flags.max_depth);
  GS_Severity threshold = GS_SUSPICIOUS;
  GS_ParseSeverity(flags.fail_on.c_str(), &threshold);

  std::unique_ptr<GS_Corpus, CorpusDeleter> corpus(GS_ScanCorpus(
      dir.c_str(), rules.get(), manifest.empty() ? nullptr : manifest.c_str(),
      options.get(), threshold, static_cast<size_t>(jobs), status.get()));
  if (!corpus) return Fail("cannot scan corpus " + dir, status.get());

  GS_Format format = GS_FORMAT_TEXT;
  GS_ParseFormat(flags.format.c_str(), &format);
  OwnedString rendered(GS_RenderCorpus(corpus.get(), format, status.get()));
  if (!rendered) return Fail("cannot render corpus table", status.get());
  if (!Emit(flags.out_path, rendered.get())) return kExitUsage;
  return GS_CorpusAllPass(corpus.get()) ? 0 : 1;
}

int RunRulesList(const std::string& rules_path, const std::string& format_name) {
  Status status(GS_NewStatus());
  auto rules = LoadRules(rules_path, status.get());
  if (!rules) return Fail("cannot load rules", status.get());
  GS_Format format = GS_FORMAT_TEXT;
  GS_ParseFormat(format_name.c_str(), &format);
  OwnedString rendered(GS_RenderRules(rules.get(), format, status.get()));
  if (!rendered) return Fail("cannot render rules", status.get());
  return Emit("", rendered.get()) ? 0 : kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Static malware scanner for serialized model graphs"};
  app.set_version_flag("--version", std::string("graphscan ") + GS_Version());
  app.require_subcommand(1);

  std::string model_path;
  CommonFlags scan_flags;
  bool envelope = false;
  CLI::App* scan = app.add_subcommand("scan", "Scan one model");
  scan->add_option("path", model_path, "SavedModel directory or GraphDef file")
      ->required();
  AddCommonFlags(scan, scan_flags, /*with_sarif=*/true);
  scan->add_flag("--envelope", envelope,
                 "Wrap the JSON report with scan time and duration");

  std::string corpus_dir, manifest_path;
  CommonFlags corpus_flags;
  int jobs = 0;
  CLI::App* corpus = app.add_subcommand("corpus", "Scan a directory of models");
  corpus->add_option("dir", corpus_dir, "Directory holding the models")
      ->required()
      ->check(CLI::ExistingDirectory);
  corpus->add_option("--manifest", manifest_path, "Expected verdicts");
  corpus->add_option("--jobs", jobs, "Worker threads (0: one per core)")
      ->check(CLI::Range(0, 256));
  AddCommonFlags(corpus, corpus_flags, /*with_sarif=*/false);

  std::string list_rules_path, list_format = "text";
  CLI::App* rules = app.add_subcommand("rules", "Inspect the rule database");
  rules->require_subcommand(1);
  CLI::App* list = rules->add_subcommand("list", "Print every rule");
  list->add_option("--rules", list_rules_path, "Rule override file (textproto)")
      ->check(CLI::ExistingFile);
  list->add_option("--format", list_format, "Output format")
      ->check(CLI::IsMember({"text", "json"}));

  std::string triage_path;
  CommonFlags triage_scan_flags;
  TriageFlags triage_flags;
  CLI::App* triage =
      app.add_subcommand("triage", "Scan one model, then ask an LLM endpoint");
  triage->add_option("path", triage_path, "SavedModel directory or GraphDef file")
      ->required();
  AddCommonFlags(triage, triage_scan_flags, /*with_sarif=*/true);
  triage->add_option("--endpoint", triage_flags.endpoint,
                     "Chat-completion URL, e.g. http://127.0.0.1:8080/v1/chat/completions")
      ->required();
  triage->add_option("--model", triage_flags.model, "Model name sent to the endpoint")
      ->capture_default_str();
  triage->add_option("--api-key-env", triage_flags.api_key_env,
                     "Environment variable holding the API key")
      ->capture_default_str();
  triage->add_option("--timeout-secs", triage_flags.timeout_secs,
                     "Per-request timeout")
      ->check(CLI::Range(1, 3600))
      ->capture_default_str();
  triage->add_flag("--print-prompt", triage_flags.print_prompt,
                   "Echo the prompt to stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (scan->parsed()) {
    if (envelope && scan_flags.format != "json") {
      return Usage("--envelope requires --format json");
    }
    return RunScan(model_path, scan_flags, envelope, nullptr);
  }
  if (corpus->parsed()) return RunCorpus(corpus_dir, manifest_path, corpus_flags, jobs);
  if (list->parsed()) return RunRulesList(list_rules_path, list_format);
  if (triage->parsed()) {
    return RunScan(triage_path, triage_scan_flags, false, &triage_flags);
  }
  return Usage("no command given");
}
