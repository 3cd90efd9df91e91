#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bxn/decision.hpp"

namespace bxn {

struct LabeledModel {
  std::string label;
  ModelSpec spec;
};

struct OCRow {
  std::string scenario, model, rule;
  int subtrial = 0;    // 1-based; 0 for scenario-level metrics (oer)
  std::string metric;  // type1_error | power | go_rate | oer
  double estimate = 0.0;
  double mc_se = 0.0;
  int n_reps = 0;
  double mean_rhat_max = 0.0;
};

/// Deterministic operating-characteristics table: identical (seed, config)
/// give identical rows regardless of thread count.
struct OCReport {
  std::vector<OCRow> rows;
};

/// Per-model raw results backing a report; wall-clock timing lives here so
/// the report itself stays byte-deterministic.
struct ModelOCDetail {
  std::string model;
  std::vector<std::uint8_t> go;  // [replicate][subtrial], chosen rule
  std::vector<double> rhat_max;  // per replicate, max split R-hat
  int n_flagged = 0;             // replicates with max split R-hat > 1.1
  double total_fit_seconds = 0.0;
};

struct OCRun {
  OCReport report;
  std::vector<ModelOCDetail> details;
  bool oer_defined = false;  // scenario has at least one null subtrial
};

/// Replicate r draws its dataset from substream (1, r) and its model-m fit
/// from substream (2, r, m) under `seed`; tasks run over a (replicate x
/// model) pool with results written to preassigned slots. A replicate whose
/// sampler fails aborts the run naming (replicate, model).
OCRun run_oc(const Scenario& scenario, const std::vector<LabeledModel>& models,
             const DecisionRuleSpec& rule, const McmcConfig& cfg, int n_reps, std::uint64_t seed,
             int n_threads = 1);

/// Fraction of replicates with >= 1 Go on a null subtrial; nullopt when the
/// scenario has no null subtrial (OER undefined).
std::optional<double> overall_error_rate(const std::vector<std::uint8_t>& go, int n_reps, int K,
                                         const std::vector<TruthLabel>& labels);

struct ModelRank {
  std::string model;
  double mean_estimate = 0.0;
  double se = 0.0;  // SE of the subtrial-mean estimate
  int rank = 0;     // 1 = largest mean; exact ties share a rank
  bool within_2se_of_best = false;
};

struct ComparisonRow {
  std::string scenario;
  std::string metric;
  std::vector<ModelRank> entries;
};

/// Per-(scenario, metric) model orderings over type1_error and power rows,
/// with +-2 pooled-SE tie awareness.
std::vector<ComparisonRow> compare_models(const OCReport& report);

}  // namespace bxn
