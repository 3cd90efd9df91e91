#pragma once

#include <map>
#include <string>

#include "bxn/config.hpp"

namespace bxn {

/// filename -> file body. Commands build their artifacts in memory; callers
/// decide where (or whether) to persist them. The only filesystem access in
/// this layer is reading fit-mode ingestion CSVs.
using OutputMap = std::map<std::string, std::string>;

/// Lowercases nothing, keeps [A-Za-z0-9._-], maps everything else to '_'.
std::string sanitize_filename(const std::string& s);

/// Single-dataset analysis: per-model posterior summaries, exchangeability
/// weights, decision outcome and diagnostics (plus the dataset itself and,
/// behind fit.dump_draws, the raw draws). Model identity appears only in
/// filenames, so degenerate model pairs yield byte-identical bodies.
OutputMap cmd_fit(const RunConfig& cfg);

/// Operating characteristics over the configured scenarios: oc_report.csv,
/// model_comparison.csv, oc_flags.csv, plus oc_timings.csv (the one
/// wall-clock, non-deterministic artifact) and optional Go matrices and
/// bar-chart SVGs.
OutputMap cmd_oc(const RunConfig& cfg);

/// Threshold calibration per model on the null scenario: calibration.csv
/// plus a frontier table per model whose target is unreachable.
OutputMap cmd_calibrate(const RunConfig& cfg);

/// Scenario reference table (expected arm summaries + truth labels).
OutputMap cmd_scenarios(const RunConfig& cfg);

/// Dispatch on cfg.mode.
OutputMap run_command(const RunConfig& cfg);

}  // namespace bxn
