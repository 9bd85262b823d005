#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "nfpe/run_config.hpp"

namespace nfpe {

struct RunOptions {
  /// Single-threaded particle updates. Artifacts are identical either way.
  bool sequential = false;
  /// Prefix for a relative output_dir (the CLI reads NFPE_OUTPUT_ROOT).
  std::optional<std::filesystem::path> output_root;
};

struct RunOutcome {
  /// 0 when every task succeeded and every hard invariant held, 1 otherwise.
  int exit_code = 0;
  nlohmann::json manifest;
  std::filesystem::path manifest_path;
};

std::filesystem::path resolve_output_dir(const RunConfig& cfg, const RunOptions& opts);

/// Runs the configured tasks and writes their artifacts plus manifest.json.
RunOutcome run(const RunConfig& cfg, const RunOptions& opts = {});

/// Runs only the hypothesis validation and writes its manifest.
RunOutcome validate_only(const RunConfig& cfg, const RunOptions& opts = {});

/// Per-task, per-summary-key comparison of two manifests: a, b, delta = b - a,
/// ratio = a / b, and a first-order flag for ratios in [1.6, 2.4].
/// Throws UsageError for a task present in only one manifest or a missing artifact.
nlohmann::json diff_runs(const std::filesystem::path& manifest_a,
                         const std::filesystem::path& manifest_b);

/// Plain-text table of a diff report.
std::string format_diff(const nlohmann::json& report);

}  // namespace nfpe
