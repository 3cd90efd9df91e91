#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bxn/model.hpp"

namespace bxn {

struct McmcConfig {
  int chains = 4;
  int burn_in = 2000;
  int iterations = 10000;
  int thin = 1;
  int adapt_window = 50;            // sweeps per adaptation batch (burn-in only)
  double target_accept_scalar = 0.44;
  double target_accept_block = 0.23;
  std::uint64_t seed = 0;

  void validate() const;  // ConfigError on violations
};

/// One proposal-scale mutation (adaptation happens only during burn-in; the
/// recorded history is the evidence).
struct ScaleEvent {
  int sweep;        // 1-based global sweep index at which the scale changed
  int block;        // see block_name()
  double log_scale;
};

std::string block_name(int block_id);

struct ChainDraws {
  int K = 0;
  int n_coords = 0;
  int n_kept = 0;
  std::vector<double> draws;   // row-major [n_kept][n_coords]
  std::vector<signed char> z;  // row-major [n_kept][K]
  std::map<std::string, double> accept_rates;  // post-burn-in, per block family
  std::vector<ScaleEvent> scale_history;

  double value(int it, int coord) const {
    return draws[static_cast<std::size_t>(it) * n_coords + coord];
  }
  int z_value(int it, int k) const { return z[static_cast<std::size_t>(it) * K + k]; }
};

struct PosteriorDraws {
  int K = 0;
  std::vector<std::string> coord_names;
  std::vector<ChainDraws> chains;

  int n_total() const;
  /// ContractError when the coordinate is unknown.
  int coord_index(const std::string& coord) const;
  /// Pooled post-burn-in values of one coordinate, chain-major order.
  std::vector<double> pooled(int coord) const;
};

/// Flat coordinate layout: alpha_t[1..K], alpha_e[1..K], theta_t[1..K],
/// theta_e[1..K], sigma_C[1..K], sigma_E[1..K], beta1, beta2, phi1, phi2,
/// rho, kappa (6K + 6 coordinates).
std::vector<std::string> coordinate_names(int K);

/// One adaptive Metropolis-within-Gibbs chain. Sweep order: (a) indicator
/// Gibbs, (b) joint (theta_t,theta_e)_k random walk (exact component draw
/// when the treatment arm has no data), (c) alpha scalars, (d) ln sigma_jk
/// scalars, (e) (beta1,beta2) conjugate block plus two translation moves
/// shifting beta with its attached thetas, (f) ln phi scalars, (g) rho/kappa
/// on the Fisher-z scale. Blocks whose full conditional reduces to the prior
/// are drawn exactly. Proposal scales adapt toward the target acceptance
/// rates during burn-in only. `stream` selects the chain's RNG substream
/// family under cfg.seed.
ChainDraws run_chain(const TrialData& data, const ModelSpec& spec, const McmcConfig& cfg,
                     int chain_id, std::uint64_t stream = 0);

/// cfg.chains chains with distinct substreams and jittered initial states.
PosteriorDraws run_posterior(const TrialData& data, const ModelSpec& spec, const McmcConfig& cfg,
                             std::uint64_t stream = 0);

struct SummaryStats {
  double median, q025, q975, mean, sd;
};

/// Pooled over chains; quantiles use type-7 interpolation.
SummaryStats posterior_summary(const PosteriorDraws& draws, const std::string& coord);

/// Type-7 sample quantile (interpolated order statistic); consumes its copy.
double quantile_type7(std::vector<double> x, double p);

struct CoordDiagnostic {
  std::string coord;
  double rhat;      // split R-hat (1.0 when degenerate)
  double ess;       // effective sample size, Geyer-truncated autocovariance
  bool degenerate;  // zero-variance coordinate
};

std::vector<CoordDiagnostic> diagnostics(const PosteriorDraws& draws);

/// Max split R-hat across coordinates (cheap path used per replicate).
double max_split_rhat(const PosteriorDraws& draws);

/// Per-subtrial posterior exchangeability weights estimated as indicator
/// frequencies: w_tox = Pr(Z in {ExEx, ExNex}), w_eff = Pr(Z in {ExEx,
/// NexEx}). Standard errors account for autocorrelation via the indicator
/// series' effective sample size. ContractError on empty draws.
struct WeightEstimate {
  double w_tox, w_eff;
  double se_tox, se_eff;
};

std::vector<WeightEstimate> marginal_exchangeability_weights(const PosteriorDraws& draws);

}  // namespace bxn
