#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bxn/decision.hpp"
#include "bxn/mcmc.hpp"
#include "bxn/oc.hpp"
#include "bxn/scenario.hpp"

namespace bxn {

enum class RunMode { fit, oc, calibrate, scenarios };

std::string to_string(RunMode m);
RunMode run_mode_from_string(const std::string& s);

/// Per-model weight overrides from the config file; expanded to a ModelSpec
/// once K is known. Scalars broadcast across subtrials.
struct ModelConfig {
  std::string kind = "E-BiEXNEX";
  std::string label;  // defaults to kind
  std::optional<double> omega_scalar;
  std::vector<double> omega;
  std::vector<std::array<double, 4>> lambda;
  std::optional<double> omega_t_scalar, omega_e_scalar;
  std::vector<double> omega_t, omega_e;
  std::string scheme = "joint4";  // joint4 | factored2x2
  bool pin_rho = false, pin_kappa = false;

  LabeledModel build(int K, const PriorSpec& priors) const;
};

struct FitConfig {
  std::string scenario = "Global Null";  // generated-data source
  std::string counts_csv, efficacy_csv;  // ingestion alternative (file paths)
  bool dump_draws = false;
};

struct CalibrateConfig {
  double target_error = 0.10;
  int replicates = 500;
  std::string scenario = "Global Null";
};

/// Full run description; every field has a paper default so an empty
/// document is valid (scenarios must still be named for oc mode).
struct RunConfig {
  RunMode mode = RunMode::oc;
  std::uint64_t seed = 1;
  int n_reps = 500;
  int threads = 1;
  std::string out_dir = ".";
  bool emit_plots = false;
  bool emit_go_matrices = false;
  std::vector<std::string> scenario_names;
  std::optional<Scenario> inline_scenario;
  std::vector<ModelConfig> models;  // default: BHM, BiEXNEX, E-BiEXNEX, IndEXNEX, SA
  PriorSpec priors;                 // nex vectors stay empty until K is known
  McmcConfig mcmc;
  DecisionRuleSpec decision;
  FitConfig fit;
  CalibrateConfig calibrate;

  /// Named + inline scenarios, validated. ConfigError when none requested
  /// in a mode that needs one.
  std::vector<Scenario> resolve_scenarios() const;
  std::vector<LabeledModel> build_models(int K) const;
};

/// Strict parse: unknown keys anywhere are rejected with their full path;
/// syntax errors carry line/column. Empty or blank text yields the defaults.
RunConfig parse_config(const std::string& text);

/// Canonical serialisation; parse(serialize(parse(x))) == parse(x).
std::string serialize_config(const RunConfig& cfg);

}  // namespace bxn
