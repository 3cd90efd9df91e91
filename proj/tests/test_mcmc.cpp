#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"

#include "bxn/errors.hpp"
#include "bxn/mcmc.hpp"
#include "bxn/special.hpp"
#include "bxn/trial_data.hpp"
#include "oracles.hpp"

using namespace bxn;

#define CHECK_NEAR(a, b, tol) CHECK(std::abs((a) - (b)) <= (tol))

namespace {

TrialData empty_trial(int K) {
  TrialData d;
  d.K = K;
  d.arms[kControl].assign(K, ArmData{});
  d.arms[kTreatment].assign(K, ArmData{});
  return d;
}

TrialData tox_trial(int n_C, int y_C, int n_E, int y_E) {
  TrialData d;
  d.K = 1;
  d.arms[kControl] = {ArmData{n_C, y_C, {}}};
  d.arms[kTreatment] = {ArmData{n_E, y_E, {}}};
  return d;
}

TrialData full_trial() {
  TrialData d;
  d.K = 1;
  d.arms[kControl] = {ArmData{10, 3, {2.1, 1.4, 3.3, 2.8, 1.9, 2.5, 3.1, 2.0, 2.6, 1.7}}};
  d.arms[kTreatment] = {ArmData{10, 1, {3.0, 2.2, 4.1, 3.6, 2.7, 3.9, 3.3, 2.9, 4.4, 3.1}}};
  return d;
}

McmcConfig quick_cfg(int chains, int burn, int iters, std::uint64_t seed = 7) {
  McmcConfig cfg;
  cfg.chains = chains;
  cfg.burn_in = burn;
  cfg.iterations = iters;
  cfg.seed = seed;
  return cfg;
}

PosteriorDraws synthetic_draws(const std::vector<std::vector<double>>& per_chain) {
  PosteriorDraws pd;
  pd.K = 0;
  pd.coord_names = {"x"};
  for (const auto& vals : per_chain) {
    ChainDraws c;
    c.K = 0;
    c.n_coords = 1;
    c.n_kept = static_cast<int>(vals.size());
    c.draws = vals;
    pd.chains.push_back(std::move(c));
  }
  return pd;
}

}  // namespace

TEST_CASE("McmcConfig validation") {
  McmcConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  auto bad = cfg;
  bad.chains = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.iterations = 50;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.thin = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.thin = bad.iterations + 1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.target_accept_block = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("coordinate layout") {
  auto names = coordinate_names(3);
  REQUIRE(names.size() == 24);  // 6K + 6
  CHECK(names[0] == "alpha_t[1]");
  CHECK(names[3] == "alpha_e[1]");
  CHECK(names[6] == "theta_t[1]");
  CHECK(names[11] == "theta_e[3]");
  CHECK(names[12] == "sigma_C[1]");
  CHECK(names[17] == "sigma_E[3]");
  CHECK(names[18] == "beta1");
  CHECK(names[23] == "kappa");

  PosteriorDraws pd;
  pd.coord_names = names;
  CHECK(pd.coord_index("theta_e[2]") == 10);
  CHECK_THROWS_AS(pd.coord_index("theta_e[4]"), ContractError);
}

TEST_CASE("determinism and chain/stream separation") {
  auto d = tox_trial(10, 3, 10, 1);
  auto spec = ModelSpec::make_default(ModelKind::BiEXNEX, 1);
  auto cfg = quick_cfg(2, 100, 200, 11);
  cfg.thin = 2;

  auto a = run_posterior(d, spec, cfg, 5);
  auto b = run_posterior(d, spec, cfg, 5);
  REQUIRE(a.chains.size() == 2);
  CHECK(a.chains[0].draws == b.chains[0].draws);
  CHECK(a.chains[1].draws == b.chains[1].draws);
  CHECK(a.chains[0].z == b.chains[0].z);
  CHECK(a.chains[0].draws != a.chains[1].draws);

  // run_posterior chain c is exactly run_chain with chain_id c
  auto solo = run_chain(d, spec, cfg, 1, 5);
  CHECK(solo.draws == a.chains[1].draws);

  // a different stream family gives different draws
  auto c = run_posterior(d, spec, cfg, 6);
  CHECK(c.chains[0].draws != a.chains[0].draws);

  // retained-draw accounting
  CHECK(a.chains[0].n_kept == 100);
  CHECK(a.chains[0].draws.size() == 100u * 12u);
  CHECK(a.n_total() == 200);
}

TEST_CASE("adaptation happens only during burn-in") {
  auto d = full_trial();
  auto spec = ModelSpec::make_default(ModelKind::BiEXNEX, 1);
  auto cfg = quick_cfg(1, 400, 600, 3);
  auto ch = run_chain(d, spec, cfg, 0, 0);
  CHECK(!ch.scale_history.empty());
  for (const auto& e : ch.scale_history) {
    CHECK(e.sweep <= cfg.burn_in);
    CHECK(std::isfinite(e.log_scale));
    CHECK(!block_name(e.block).empty());
  }
  // adapted acceptance rates land in a sane band around the targets
  for (const char* blk : {"theta", "alpha_t", "sigma"}) {
    const double r = ch.accept_rates.at(blk);
    CHECK(r > 0.05);
    CHECK(r < 0.85);
  }
}

TEST_CASE("empty data reproduces the prior") {
  auto d = empty_trial(1);
  auto spec = ModelSpec::make_default(ModelKind::BiEXNEX, 1);
  auto cfg = quick_cfg(2, 500, 20000, 21);
  auto draws = run_posterior(d, spec, cfg, 0);

  // theta marginal: centred mixture, prior mean 0
  auto th = posterior_summary(draws, "theta_t[1]");
  CHECK_NEAR(th.mean, 0.0, 0.2);
  auto te = posterior_summary(draws, "theta_e[1]");
  CHECK_NEAR(te.mean, 0.0, 0.2);

  // indicator frequency recovers the prior weight omega = 0.5; the indicator
  // chain is sticky, so bound by its own autocorrelation-adjusted MC error
  auto w = marginal_exchangeability_weights(draws);
  REQUIRE(w.size() == 1);
  REQUIRE(w[0].se_tox > 0.0);
  REQUIRE(w[0].se_tox < 0.025);
  CHECK_NEAR(w[0].w_tox, 0.5, 4.0 * w[0].se_tox);
  CHECK_NEAR(w[0].w_eff, 0.5, 4.0 * w[0].se_eff);
  CHECK(w[0].w_tox == w[0].w_eff);  // BiEXNEX shares one indicator

  // rho posterior == prior U(-1,1): mean 0, sd 1/sqrt(3)
  auto rho = posterior_summary(draws, "rho");
  CHECK_NEAR(rho.mean, 0.0, 0.03);
  CHECK_NEAR(rho.sd, 1.0 / std::sqrt(3.0), 0.02);
}

TEST_CASE("toxicity-only posterior matches the grid oracle") {
  auto d = tox_trial(10, 3, 10, 1);
  auto spec = ModelSpec::make_default(ModelKind::SA, 1);
  auto cfg = quick_cfg(2, 2000, 20000, 42);
  auto draws = run_posterior(d, spec, cfg, 0);

  const auto oracle = oracle::grid_tox_posterior(10, 3, 10, 1, 10.0, 0.0, 5.0);
  const auto got = posterior_summary(draws, "theta_t[1]");

  double ess = 0;
  for (const auto& diag : diagnostics(draws))
    if (diag.coord == "theta_t[1]") ess = diag.ess;
  REQUIRE(ess > 200);
  const double se_mean = got.sd / std::sqrt(ess);
  CHECK_NEAR(got.mean, oracle.mean_theta, 3.0 * se_mean + 0.01);
  CHECK_NEAR(got.median, oracle.median_theta, 4.0 * se_mean + 0.01);
  CHECK_NEAR(got.sd, oracle.sd_theta, 3.0 * got.sd / std::sqrt(2.0 * ess) + 0.01);
}

TEST_CASE("known-sigma efficacy posterior matches the conjugate oracle") {
  const std::vector<double> z_C{0.2, -0.5, 1.1, 0.7, 0.0, 0.3};
  const std::vector<double> z_E{1.0, 2.1, 1.4, 0.6, 1.7, 0.2};
  TrialData d;
  d.K = 1;
  d.arms[kControl] = {ArmData{6, 2, z_C}};
  d.arms[kTreatment] = {ArmData{6, 1, z_E}};

  auto spec = ModelSpec::make_default(ModelKind::SA, 1);
  spec.priors.fixed_sigma = 1.0;
  auto cfg = quick_cfg(2, 2000, 20000, 17);
  auto draws = run_posterior(d, spec, cfg, 0);

  const auto oracle = oracle::conjugate_eff_posterior(z_C, z_E, 1.0, 10.0, 0.0, 5.0);

  double ess_a = 0, ess_t = 0;
  for (const auto& diag : diagnostics(draws)) {
    if (diag.coord == "alpha_e[1]") ess_a = diag.ess;
    if (diag.coord == "theta_e[1]") ess_t = diag.ess;
  }
  REQUIRE(ess_a > 200);
  REQUIRE(ess_t > 200);

  const auto ae = posterior_summary(draws, "alpha_e[1]");
  const auto te = posterior_summary(draws, "theta_e[1]");
  CHECK_NEAR(ae.mean, oracle.mean_alpha, 3.0 * ae.sd / std::sqrt(ess_a) + 0.005);
  CHECK_NEAR(ae.sd, oracle.sd_alpha, 3.0 * ae.sd / std::sqrt(2.0 * ess_a) + 0.005);
  CHECK_NEAR(te.mean, oracle.mean_theta, 3.0 * te.sd / std::sqrt(ess_t) + 0.005);
  CHECK_NEAR(te.sd, oracle.sd_theta, 3.0 * te.sd / std::sqrt(2.0 * ess_t) + 0.005);

  // sigma coordinates are pinned at the known value
  const auto sg = posterior_summary(draws, "sigma_C[1]");
  CHECK(sg.mean == 1.0);
  CHECK(sg.sd == 0.0);
}

TEST_CASE("quantile_type7 matches interpolated order statistics") {
  std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  CHECK_NEAR(quantile_type7(x, 0.25), 3.25, 1e-12);
  CHECK_NEAR(quantile_type7(x, 0.5), 5.5, 1e-12);
  CHECK_NEAR(quantile_type7(x, 0.9), 9.1, 1e-12);
  CHECK(quantile_type7(x, 0.0) == 1.0);
  CHECK(quantile_type7(x, 1.0) == 10.0);
  // unsorted input is sorted internally
  std::vector<double> shuffled{7, 1, 9, 3, 5, 10, 2, 8, 6, 4};
  CHECK_NEAR(quantile_type7(shuffled, 0.25), 3.25, 1e-12);
  CHECK(quantile_type7({3.0}, 0.73) == 3.0);
}

TEST_CASE("posterior_summary on synthetic draws") {
  std::vector<double> vals(100);
  std::iota(vals.begin(), vals.end(), 1.0);
  auto pd = synthetic_draws({vals});
  auto s = posterior_summary(pd, "x");
  CHECK_NEAR(s.mean, 50.5, 1e-12);
  CHECK_NEAR(s.median, 50.5, 1e-12);
  CHECK_NEAR(s.q025, 3.475, 1e-12);
  CHECK_NEAR(s.q975, 97.525, 1e-12);
  CHECK_NEAR(s.sd, std::sqrt(83325.0 / 99.0), 1e-10);
}

TEST_CASE("diagnostics flag unmixed and degenerate coordinates") {
  RngStream rng(33, 0);
  std::vector<double> c1(500), c2(500);
  for (auto& v : c1) v = rng.next_normal();
  for (auto& v : c2) v = rng.next_normal();

  auto ok = synthetic_draws({c1, c2});
  auto d_ok = diagnostics(ok);
  REQUIRE(d_ok.size() == 1);
  CHECK(d_ok[0].rhat < 1.05);
  CHECK(d_ok[0].ess > 300);
  CHECK(!d_ok[0].degenerate);
  CHECK_NEAR(max_split_rhat(ok), d_ok[0].rhat, 1e-12);

  auto far = c2;
  for (auto& v : far) v += 10.0;
  auto split = synthetic_draws({c1, far});
  CHECK(diagnostics(split)[0].rhat > 1.5);

  auto flat = synthetic_draws({std::vector<double>(200, 3.3), std::vector<double>(200, 3.3)});
  auto d_flat = diagnostics(flat);
  CHECK(d_flat[0].degenerate);
  CHECK(d_flat[0].rhat == 1.0);
}

TEST_CASE("exchangeability weights for the degenerate kinds") {
  auto d = tox_trial(10, 3, 10, 1);
  auto cfg = quick_cfg(2, 100, 200, 9);

  auto bhm = run_posterior(d, ModelSpec::make_default(ModelKind::BHM, 1), cfg, 0);
  auto wb = marginal_exchangeability_weights(bhm);
  CHECK(wb[0].w_tox == 1.0);
  CHECK(wb[0].w_eff == 1.0);
  CHECK(wb[0].se_tox == 0.0);

  auto sa = run_posterior(d, ModelSpec::make_default(ModelKind::SA, 1), cfg, 0);
  auto ws = marginal_exchangeability_weights(sa);
  CHECK(ws[0].w_tox == 0.0);
  CHECK(ws[0].w_eff == 0.0);
  CHECK(ws[0].se_eff == 0.0);
}

TEST_CASE("pooled respects chain-major order") {
  auto pd = synthetic_draws({{1.0, 2.0}, {3.0, 4.0}});
  CHECK(pd.pooled(0) == std::vector<double>{1.0, 2.0, 3.0, 4.0});
}
