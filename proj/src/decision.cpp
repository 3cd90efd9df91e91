#include "bxn/decision.hpp"

#include <algorithm>
#include <cmath>

#include "bxn/errors.hpp"
#include "bxn/trial_data.hpp"

namespace bxn {

std::string to_string(DecisionRule r) {
  return r == DecisionRule::separate ? "separate" : "joint";
}

DecisionRule decision_rule_from_string(const std::string& s) {
  if (s == "separate") return DecisionRule::separate;
  if (s == "joint") return DecisionRule::joint;
  throw ConfigError("unknown decision rule '" + s + "' (expected separate or joint)");
}

void DecisionRuleSpec::validate() const {
  auto in01 = [](double x) { return x > 0.0 && x < 1.0; };
  if (rule == DecisionRule::separate) {
    if (!in01(eta1) || !in01(eta2))
      throw ConfigError("decision.eta1/eta2: thresholds must lie in (0,1)");
  } else if (!in01(eta)) {
    throw ConfigError("decision.eta: threshold must lie in (0,1)");
  }
}

DecisionProbs decision_probs(const PosteriorDraws& draws, double delta) {
  const int K = draws.K;
  if (K <= 0 || draws.chains.empty() || draws.n_total() == 0)
    throw ContractError("decision_probs: empty posterior draws");
  DecisionProbs out;
  out.prob_tox.assign(K, 0.0);
  out.prob_eff.assign(K, 0.0);
  out.prob_joint.assign(K, 0.0);
  const int i_tt = draws.coord_index("theta_t[1]");
  const int i_te = draws.coord_index("theta_e[1]");
  long n = 0;
  for (const auto& c : draws.chains) {
    for (int it = 0; it < c.n_kept; ++it) {
      for (int k = 0; k < K; ++k) {
        const bool tox = c.value(it, i_tt + k) < 0.0;
        const bool eff = c.value(it, i_te + k) > delta;
        out.prob_tox[k] += tox;
        out.prob_eff[k] += eff;
        out.prob_joint[k] += tox && eff;
      }
    }
    n += c.n_kept;
  }
  for (int k = 0; k < K; ++k) {
    out.prob_tox[k] /= static_cast<double>(n);
    out.prob_eff[k] /= static_cast<double>(n);
    out.prob_joint[k] /= static_cast<double>(n);
  }
  return out;
}

DecisionOutcome apply_rule(const DecisionProbs& probs, const DecisionRuleSpec& spec) {
  DecisionOutcome out;
  const int K = static_cast<int>(probs.prob_tox.size());
  out.subtrials.resize(K);
  for (int k = 0; k < K; ++k) {
    SubtrialDecision& d = out.subtrials[k];
    d.prob_tox = probs.prob_tox[k];
    d.prob_eff = probs.prob_eff[k];
    d.prob_joint = probs.prob_joint[k];
    d.go = spec.rule == DecisionRule::separate
               ? (d.prob_tox > spec.eta1 && d.prob_eff > spec.eta2)
               : (d.prob_joint > spec.eta);
  }
  return out;
}

DecisionOutcome decide(const PosteriorDraws& draws, const DecisionRuleSpec& spec) {
  return apply_rule(decision_probs(draws, spec.delta), spec);
}

namespace {

// max over subtrials of the Go frequency at threshold eta (strict >)
double max_error_at(const std::vector<DecisionProbs>& reps, DecisionRule rule, double eta) {
  if (reps.empty()) throw ContractError("calibration: no replicates");
  const int K = static_cast<int>(reps.front().prob_tox.size());
  double worst = 0.0;
  for (int k = 0; k < K; ++k) {
    int go = 0;
    for (const auto& r : reps) {
      const bool g = rule == DecisionRule::separate
                         ? (r.prob_tox[k] > eta && r.prob_eff[k] > eta)
                         : (r.prob_joint[k] > eta);
      go += g;
    }
    worst = std::max(worst, static_cast<double>(go) / static_cast<double>(reps.size()));
  }
  return worst;
}

}  // namespace

CalibrationResult calibrate_on_probs(const std::vector<DecisionProbs>& reps,
                                     const DecisionRuleSpec& rule_template, double target_error) {
  if (!(target_error > 0.0 && target_error <= 1.0))
    throw ConfigError("calibration target_error must lie in (0, 1]");
  if (reps.empty()) throw ContractError("calibration: no replicates");

  // Candidate thresholds: the Go indicator can only change at an observed
  // probability, so the smallest feasible threshold is on this grid.
  std::vector<double> cand;
  cand.push_back(0.0);
  for (const auto& r : reps) {
    if (rule_template.rule == DecisionRule::separate) {
      cand.insert(cand.end(), r.prob_tox.begin(), r.prob_tox.end());
      cand.insert(cand.end(), r.prob_eff.begin(), r.prob_eff.end());
    } else {
      cand.insert(cand.end(), r.prob_joint.begin(), r.prob_joint.end());
    }
  }
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

  // max_error_at is non-increasing in eta: bisect for the first feasible index
  int lo = 0, hi = static_cast<int>(cand.size()) - 1;
  if (max_error_at(reps, rule_template.rule, cand[hi]) > target_error) {
    lo = hi + 1;  // even the largest candidate fails
  } else if (max_error_at(reps, rule_template.rule, cand[lo]) <= target_error) {
    hi = lo;
  } else {
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      if (max_error_at(reps, rule_template.rule, cand[mid]) <= target_error)
        hi = mid;
      else
        lo = mid;
    }
    lo = hi;
  }

  CalibrationResult res;
  res.rule = rule_template;
  res.replicates = static_cast<int>(reps.size());
  const bool feasible = lo < static_cast<int>(cand.size()) && cand[lo] < 1.0;
  if (feasible) {
    res.ok = true;
    res.threshold = cand[lo];
    res.achieved_max_error = max_error_at(reps, rule_template.rule, cand[lo]);
    if (rule_template.rule == DecisionRule::separate)
      res.rule.eta1 = res.rule.eta2 = res.threshold;
    else
      res.rule.eta = res.threshold;
    return res;
  }

  // Unreachable: report the achievable frontier over the candidate grid.
  res.ok = false;
  res.threshold = 1.0;
  res.achieved_max_error = max_error_at(reps, rule_template.rule, 1.0);
  const int n_pts = std::min<int>(25, static_cast<int>(cand.size()));
  for (int i = 0; i < n_pts; ++i) {
    const int idx = static_cast<int>((static_cast<long>(i) * (cand.size() - 1)) / (n_pts - 1));
    res.frontier.push_back({cand[idx], max_error_at(reps, rule_template.rule, cand[idx])});
  }
  return res;
}

CalibrationResult calibrate_threshold(const ModelSpec& model, const DecisionRuleSpec& rule_template,
                                      double target_error, int replicates, const McmcConfig& cfg,
                                      std::uint64_t seed, const Scenario* scenario) {
  if (replicates < 1) throw ConfigError("calibration replicates must be >= 1");
  Scenario null_scn;
  if (scenario == nullptr) {
    null_scn = find_scenario("Global Null");
    scenario = &null_scn;
  }
  McmcConfig fit_cfg = cfg;
  fit_cfg.seed = seed;
  constexpr std::uint64_t kCalibTag = 3;
  std::vector<DecisionProbs> reps;
  reps.reserve(replicates);
  for (int r = 0; r < replicates; ++r) {
    const std::uint64_t rep_stream = substream_id(substream_id(0, kCalibTag), r);
    const TrialData data = generate_trial(*scenario, RngStream(seed, substream_id(rep_stream, 0)));
    const PosteriorDraws draws =
        run_posterior(data, model, fit_cfg, substream_id(rep_stream, 1));
    reps.push_back(decision_probs(draws, rule_template.delta));
  }
  return calibrate_on_probs(reps, rule_template, target_error);
}

}  // namespace bxn
