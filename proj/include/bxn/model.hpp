#pragma once

#include <array>
#include <string>
#include <vector>

#include "bxn/trial_data.hpp"

namespace bxn {

/// Hyperprior constants shared by all five analysis models.
struct PriorSpec {
  double alpha_sd = 10.0;              // alpha_k^t, alpha_k^e ~ N(0, alpha_sd^2)
  double sigma_halfnormal_var = 25.0;  // sigma_jk^2 ~ Half-N(5^2) (variance-scale 5)
  double beta_sd = 5.0;                // beta_1, beta_2 ~ N(0, 5^2)
  double phi_halfnormal_var = 0.25;    // phi_1^2, phi_2^2 ~ Half-N(0.5^2)
  std::vector<double> nex_mean_t, nex_mean_e;  // m_1k, m_2k; default 0
  std::vector<double> nex_sd_t, nex_sd_e;      // s_1k, s_2k; default 5
  // Testing/analysis hook: > 0 treats every sigma_jk as known at this value
  // (no prior contribution, not sampled).
  double fixed_sigma = 0.0;

  /// Fill nex vectors with defaults where empty; then check lengths/signs.
  void finalize(int K);
  void validate(int K) const;
};

enum class ModelKind { BHM, BiEXNEX, EBiEXNEX, IndEXNEX, SA };

std::string to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);

/// Mixture components in the unified four-component space:
///   0 = both effects exchangeable        (mean (b1,b2),   sds (phi1,phi2), corr rho)
///   1 = toxicity-only exchangeable       (mean (b1,m2k),  sds (phi1,s2k),  corr 0)
///   2 = efficacy-only exchangeable       (mean (m1k,b2),  sds (s1k,phi2),  corr 0)
///   3 = both non-exchangeable            (mean (m1k,m2k), sds (s1k,s2k),   corr kappa)
/// BiEXNEX restricts Z to {0,3}; BHM to {0}; SA to {3}.
inline constexpr int kCompExEx = 0;
inline constexpr int kCompExNex = 1;
inline constexpr int kCompNexEx = 2;
inline constexpr int kCompNexNex = 3;

/// How the four-component family draws its indicators: one joint categorical
/// (Z_k in 0..3) or the equivalent pair of binary indicators (Z_tk, Z_ek)
/// with product weights — the two samplers target the same posterior when
/// the weights factorise.
enum class IndicatorScheme { joint4, factored2x2 };

struct ModelSpec {
  ModelKind kind = ModelKind::EBiEXNEX;
  PriorSpec priors;
  // BiEXNEX family: per-subtrial prior exchangeability weight. BHM behaves
  // as omega = 1 and SA as omega = 0 regardless of this field.
  std::vector<double> omega;
  // E-BiEXNEX: per-subtrial component weights (lambda_1..lambda_4).
  std::vector<std::array<double, 4>> lambda;
  // Factored weights (IndEXNEX always; E-BiEXNEX under factored2x2).
  std::vector<double> omega_t, omega_e;
  IndicatorScheme scheme = IndicatorScheme::joint4;
  // Pin rho/kappa at zero instead of sampling (degenerate parameterisations,
  // e.g. BiEXNEX(omega=0, kappa=0) == SA).
  bool pin_rho = false, pin_kappa = false;

  /// Paper defaults for K subtrials: omega = 0.5, lambda = 0.25 each,
  /// omega_t = omega_e = 0.5, section-3.3 priors.
  static ModelSpec make_default(ModelKind kind, int K);

  /// Expand defaults (weights, nex vectors, IndEXNEX lambda from the
  /// factored omegas) and check all invariants for K subtrials.
  void finalize(int K);
  void validate(int K) const;

  /// Prior log-weights over the four components for subtrial k; inactive
  /// components are -inf. SA/BHM/BiEXNEX place zero mass on components 1, 2.
  std::array<double, 4> log_weights(int k) const;

  /// True when kappa (rho) is pinned at zero rather than sampled.
  bool kappa_fixed_zero() const {
    return pin_kappa || kind == ModelKind::SA || kind == ModelKind::IndEXNEX;
  }
  bool rho_fixed_zero() const { return pin_rho || kind == ModelKind::IndEXNEX; }
};

/// Flat parameter state for every symbol of the five models.
struct ParamState {
  std::vector<double> alpha_t, alpha_e;        // K
  std::vector<double> theta_t, theta_e;        // K
  std::array<std::vector<double>, 2> sigma;    // [arm][k] efficacy residual SD
  double beta1 = 0.0, beta2 = 0.0;
  double phi1 = 1.0, phi2 = 1.0;
  double rho = 0.0, kappa = 0.0;
  std::vector<int> Z;  // K, values in {0..3}

  int K() const { return static_cast<int>(theta_t.size()); }
  static ParamState zeros(int K);
  void validate(const ModelSpec& spec) const;
};

/// Joint log-likelihood of Eq.(1)-(2): binomial toxicity with logit link,
/// normal efficacy with identity link. Binomial normalising constants are
/// included. Throws NumericError naming (arm, subtrial) on non-finite terms.
double log_likelihood(const TrialData& data, const ParamState& state);

/// Component-conditional bivariate log-density of (theta_t[k], theta_e[k])
/// under component comp (see component table above).
double component_logdensity(const ParamState& state, const ModelSpec& spec, int k, int comp);

/// log prior of the BiEXNEX family (kinds BHM, BiEXNEX, SA): indicator
/// weights + component densities + all hyperpriors. Z entries must lie in
/// the kind's active set.
double log_prior_biexnex(const ParamState& state, const ModelSpec& spec);

/// log prior of the four-component family (kinds E-BiEXNEX, IndEXNEX).
double log_prior_ebiexnex(const ParamState& state, const ModelSpec& spec);

/// Dispatch on spec.kind.
double log_prior(const ParamState& state, const ModelSpec& spec);

/// Full conditional Pr(Z_k = c | theta, hyper) over the four components
/// (inactive components have probability 0); sums to 1 within 1e-12.
std::array<double, 4> indicator_full_conditional(const ParamState& state, const ModelSpec& spec,
                                                 int k);

/// 2x2-indicator formulation: Pr(Z_tk = EX | Z_ek, theta, hyper) when
/// `toxicity`, else Pr(Z_ek = EX | Z_tk, ...). `other_ex` is the conditioning
/// indicator. Requires factorisable weights (omega_t/omega_e present).
double factored_indicator_conditional(const ParamState& state, const ModelSpec& spec, int k,
                                      bool toxicity, bool other_ex);

}  // namespace bxn
