#include <cmath>
#include <vector>

#include "doctest.h"

#include "bxn/decision.hpp"
#include "bxn/errors.hpp"
#include "bxn/trial_data.hpp"

using namespace bxn;

#define CHECK_NEAR(a, b, tol) CHECK(std::abs((a) - (b)) <= (tol))

namespace {

// Two-chain synthetic draw set over K subtrials with prescribed
// (theta_t, theta_e) draw pairs per subtrial.
PosteriorDraws draws_from_pairs(const std::vector<std::vector<std::pair<double, double>>>& pairs) {
  const int K = static_cast<int>(pairs.size());
  const int n = static_cast<int>(pairs[0].size());
  PosteriorDraws pd;
  pd.K = K;
  pd.coord_names = coordinate_names(K);
  ChainDraws c;
  c.K = K;
  c.n_coords = 6 * K + 6;
  c.n_kept = n;
  c.draws.assign(static_cast<std::size_t>(n) * c.n_coords, 0.0);
  for (int it = 0; it < n; ++it)
    for (int k = 0; k < K; ++k) {
      c.draws[static_cast<std::size_t>(it) * c.n_coords + 2 * K + k] = pairs[k][it].first;
      c.draws[static_cast<std::size_t>(it) * c.n_coords + 3 * K + k] = pairs[k][it].second;
    }
  c.z.assign(static_cast<std::size_t>(n) * K, 0);
  pd.chains.push_back(std::move(c));
  return pd;
}

}  // namespace

TEST_CASE("DecisionRuleSpec validation and string round-trip") {
  DecisionRuleSpec spec;
  CHECK_NOTHROW(spec.validate());
  spec.eta = 0.0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.eta = 1.0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.eta = 0.5;
  spec.rule = DecisionRule::separate;
  spec.eta1 = 1.0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);

  CHECK(to_string(DecisionRule::joint) == "joint");
  CHECK(decision_rule_from_string("separate") == DecisionRule::separate);
  CHECK_THROWS_AS(decision_rule_from_string("both"), ConfigError);
}

TEST_CASE("decision_probs counts posterior events") {
  // subtrial 1: draws (-1,1), (-1,-1), (1,1), (-0.5, 0.3)
  // Pr(tt<0) = 3/4, Pr(te>0) = 3/4, Pr(both) = 2/4
  auto pd = draws_from_pairs({{{-1, 1}, {-1, -1}, {1, 1}, {-0.5, 0.3}}});
  auto probs = decision_probs(pd, 0.0);
  REQUIRE(probs.prob_tox.size() == 1);
  CHECK(probs.prob_tox[0] == 0.75);
  CHECK(probs.prob_eff[0] == 0.75);
  CHECK(probs.prob_joint[0] == 0.5);

  // delta shifts the efficacy event: Pr(te > 0.5) = 2/4
  auto probs2 = decision_probs(pd, 0.5);
  CHECK(probs2.prob_eff[0] == 0.5);
  CHECK(probs2.prob_joint[0] == 0.25);

  // boundaries are strict
  auto edge = draws_from_pairs({{{0.0, 0.0}, {0.0, 0.0}}});
  auto pe = decision_probs(edge, 0.0);
  CHECK(pe.prob_tox[0] == 0.0);
  CHECK(pe.prob_eff[0] == 0.0);

  PosteriorDraws hollow;
  hollow.coord_names = coordinate_names(1);
  CHECK_THROWS_AS(decision_probs(hollow, 0.0), ContractError);
}

TEST_CASE("apply_rule thresholds") {
  DecisionProbs probs;
  probs.prob_tox = {0.9, 0.7};
  probs.prob_eff = {0.85, 0.9};
  probs.prob_joint = {0.82, 0.65};

  DecisionRuleSpec joint;
  joint.rule = DecisionRule::joint;
  joint.eta = 0.8;
  auto out = apply_rule(probs, joint);
  REQUIRE(out.subtrials.size() == 2);
  CHECK(out.subtrials[0].go);
  CHECK(!out.subtrials[1].go);
  CHECK(out.subtrials[0].prob_joint == 0.82);

  DecisionRuleSpec sep;
  sep.rule = DecisionRule::separate;
  sep.eta1 = 0.8;
  sep.eta2 = 0.8;
  auto so = apply_rule(probs, sep);
  CHECK(so.subtrials[0].go);      // 0.9 > 0.8 and 0.85 > 0.8
  CHECK(!so.subtrials[1].go);     // prob_tox 0.7 fails eta1

  // threshold comparison is strict: prob == eta is No-go
  DecisionRuleSpec tight = joint;
  tight.eta = 0.82;
  CHECK(!apply_rule(probs, tight).subtrials[0].go);
}

TEST_CASE("joint probability never exceeds its margins (Frechet)") {
  auto pd = draws_from_pairs({
      {{-0.3, 0.4}, {0.2, 1.0}, {-1.1, -0.2}, {-0.6, 0.8}, {0.4, 0.1}},
      {{-2.0, 2.0}, {-1.5, 1.2}, {0.3, -0.4}, {-0.2, 0.6}, {-0.9, 1.4}},
  });
  auto probs = decision_probs(pd, 0.0);
  for (int k = 0; k < 2; ++k) {
    CHECK(probs.prob_joint[k] <= probs.prob_tox[k]);
    CHECK(probs.prob_joint[k] <= probs.prob_eff[k]);
    // and the Frechet lower bound
    CHECK(probs.prob_joint[k] >= probs.prob_tox[k] + probs.prob_eff[k] - 1.0);
  }

  // delta -> -inf makes the efficacy event certain and joint == tox margin
  auto loose = decision_probs(pd, -1e12);
  for (int k = 0; k < 2; ++k) {
    CHECK(loose.prob_eff[k] == 1.0);
    CHECK(loose.prob_joint[k] == loose.prob_tox[k]);
  }
}

TEST_CASE("decide == decision_probs + apply_rule") {
  auto pd = draws_from_pairs({{{-1, 1}, {-1, -1}, {1, 1}, {-0.5, 0.3}}});
  DecisionRuleSpec spec;
  spec.rule = DecisionRule::joint;
  spec.eta = 0.45;
  auto out = decide(pd, spec);
  CHECK(out.subtrials[0].go);  // prob_joint = 0.5 > 0.45
  CHECK(out.subtrials[0].prob_tox == 0.75);
  CHECK(out.subtrials[0].prob_eff == 0.75);
  CHECK(out.subtrials[0].prob_joint == 0.5);
}

TEST_CASE("calibrate_on_probs finds the smallest feasible threshold") {
  // 4 replicates x 1 subtrial with joint probabilities 0.2, 0.4, 0.6, 0.8
  std::vector<DecisionProbs> reps(4);
  const double pj[4] = {0.2, 0.4, 0.6, 0.8};
  for (int r = 0; r < 4; ++r) {
    reps[r].prob_tox = {1.0};
    reps[r].prob_eff = {1.0};
    reps[r].prob_joint = {pj[r]};
  }
  DecisionRuleSpec tmpl;
  tmpl.rule = DecisionRule::joint;

  // target 0.25: only one of four replicates may fire -> eta = 0.6
  auto res = calibrate_on_probs(reps, tmpl, 0.25);
  CHECK(res.ok);
  CHECK(res.threshold == 0.6);
  CHECK(res.achieved_max_error == 0.25);
  CHECK(res.rule.eta == 0.6);
  CHECK(res.replicates == 4);

  // target 0.5: two may fire -> eta = 0.4
  CHECK(calibrate_on_probs(reps, tmpl, 0.5).threshold == 0.4);

  // target 1.0 accepts everything: eta collapses to 0 (always Go)
  auto all = calibrate_on_probs(reps, tmpl, 1.0);
  CHECK(all.ok);
  CHECK(all.threshold == 0.0);
  CHECK(all.achieved_max_error == 1.0);

  // monotone: tighter targets give larger thresholds
  double last = 0.0;
  for (double target : {1.0, 0.75, 0.5, 0.25}) {
    auto r = calibrate_on_probs(reps, tmpl, target);
    CHECK(r.threshold >= last);
    last = r.threshold;
  }
}

TEST_CASE("calibration frontier on an unreachable target") {
  // every replicate has joint probability exactly 1: any admissible
  // threshold (< 1) always fires, so a 0.1 error target is unreachable
  std::vector<DecisionProbs> reps(2);
  for (auto& r : reps) {
    r.prob_tox = {1.0};
    r.prob_eff = {1.0};
    r.prob_joint = {1.0};
  }
  DecisionRuleSpec tmpl;
  tmpl.rule = DecisionRule::joint;
  auto res = calibrate_on_probs(reps, tmpl, 0.1);
  CHECK(!res.ok);
  CHECK(res.threshold == 1.0);
  REQUIRE(!res.frontier.empty());
  // every admissible point on the frontier misses the target
  for (const auto& fp : res.frontier)
    if (fp.threshold < 1.0) CHECK(fp.max_error > 0.1);
  CHECK(res.frontier.front().threshold == 0.0);
  CHECK(res.frontier.front().max_error == 1.0);
}

TEST_CASE("separate-rule calibration moves eta1 and eta2 together") {
  std::vector<DecisionProbs> reps(4);
  const double pt[4] = {0.3, 0.5, 0.7, 0.9};
  for (int r = 0; r < 4; ++r) {
    reps[r].prob_tox = {pt[r]};
    reps[r].prob_eff = {1.0};
    reps[r].prob_joint = {pt[r]};
  }
  DecisionRuleSpec tmpl;
  tmpl.rule = DecisionRule::separate;
  auto res = calibrate_on_probs(reps, tmpl, 0.25);
  CHECK(res.ok);
  CHECK(res.rule.eta1 == res.rule.eta2);
  CHECK(res.rule.eta1 == 0.7);
}

TEST_CASE("calibrate_threshold end to end on a tiny run") {
  auto model = ModelSpec::make_default(ModelKind::BHM, 6);
  McmcConfig cfg;
  cfg.chains = 2;
  cfg.burn_in = 200;
  cfg.iterations = 400;
  cfg.seed = 99;
  DecisionRuleSpec tmpl;
  tmpl.rule = DecisionRule::joint;

  // a 1.0 target is met by always going: eta = 0
  auto always = calibrate_threshold(model, tmpl, 1.0, 3, cfg, 99);
  CHECK(always.ok);
  CHECK(always.threshold == 0.0);
  CHECK(always.replicates == 3);

  // a 1/3 target with 3 replicates lets one fire per subtrial
  auto res = calibrate_threshold(model, tmpl, 1.0 / 3.0, 3, cfg, 99);
  CHECK(res.ok);
  CHECK(res.threshold > 0.0);
  CHECK(res.threshold < 1.0);
  CHECK(res.achieved_max_error <= 1.0 / 3.0);

  // deterministic under a fixed seed
  auto again = calibrate_threshold(model, tmpl, 1.0 / 3.0, 3, cfg, 99);
  CHECK(again.threshold == res.threshold);
  CHECK(again.achieved_max_error == res.achieved_max_error);

  CHECK_THROWS_AS(calibrate_threshold(model, tmpl, 0.0, 3, cfg, 99), ConfigError);
  CHECK_THROWS_AS(calibrate_threshold(model, tmpl, 1.5, 3, cfg, 99), ConfigError);
  CHECK_THROWS_AS(calibrate_threshold(model, tmpl, 0.5, 0, cfg, 99), ConfigError);
}
