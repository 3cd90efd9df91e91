#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bxn/mcmc.hpp"
#include "bxn/scenario.hpp"

namespace bxn {

enum class DecisionRule { separate, joint };

std::string to_string(DecisionRule r);
DecisionRule decision_rule_from_string(const std::string& s);

/// Section-2.4 Go/No-go rules. separate: Pr(theta_t < 0) > eta1 and
/// Pr(theta_e > delta) > eta2. joint: Pr(theta_t < 0 and theta_e > delta)
/// > eta.
struct DecisionRuleSpec {
  DecisionRule rule = DecisionRule::joint;
  double eta1 = 0.8, eta2 = 0.8;
  double eta = 0.8;
  double delta = 0.0;

  /// ConfigError unless every threshold lies in (0, 1).
  void validate() const;
};

struct SubtrialDecision {
  bool go = false;
  double prob_tox = 0.0;    // Pr(theta_t^k < 0 | D)
  double prob_eff = 0.0;    // Pr(theta_e^k > delta | D)
  double prob_joint = 0.0;  // Pr(both | D)
};

struct DecisionOutcome {
  std::vector<SubtrialDecision> subtrials;
};

/// Per-subtrial posterior event frequencies (pooled over chains).
struct DecisionProbs {
  std::vector<double> prob_tox, prob_eff, prob_joint;
};

/// ContractError on empty draws.
DecisionProbs decision_probs(const PosteriorDraws& draws, double delta);

/// Apply the rule's thresholds to already-computed probabilities.
DecisionOutcome apply_rule(const DecisionProbs& probs, const DecisionRuleSpec& spec);

/// decision_probs + apply_rule.
DecisionOutcome decide(const PosteriorDraws& draws, const DecisionRuleSpec& spec);

struct FrontierPoint {
  double threshold;
  double max_error;  // max per-subtrial Go frequency at this threshold
};

struct CalibrationResult {
  bool ok = false;
  double threshold = 1.0;            // smallest threshold meeting the target
  double achieved_max_error = 1.0;   // max per-subtrial error at `threshold`
  DecisionRuleSpec rule;             // template with threshold(s) filled in
  std::vector<FrontierPoint> frontier;  // populated when the target is unreachable
  int replicates = 0;
};

/// Smallest threshold whose max per-subtrial Go frequency is <= target,
/// found by bisection over the pooled threshold-candidate grid (the distinct
/// observed probabilities). Pure: operates on cached probability matrices.
/// For the separate rule the search is on the diagonal eta1 = eta2.
CalibrationResult calibrate_on_probs(const std::vector<DecisionProbs>& reps,
                                     const DecisionRuleSpec& rule_template, double target_error);

/// Null-scenario calibration: simulate `replicates` datasets (Global Null by
/// default), fit `model`, cache decision probabilities once, then bisect.
/// target_error must lie in (0, 1]. The RNG streams are disjoint from the
/// oc-harness streams under the same seed.
CalibrationResult calibrate_threshold(const ModelSpec& model, const DecisionRuleSpec& rule_template,
                                      double target_error, int replicates, const McmcConfig& cfg,
                                      std::uint64_t seed, const Scenario* scenario = nullptr);

}  // namespace bxn
