#include "bxn/model.hpp"

#include <cmath>
#include <cstddef>
#include <limits>

#include "bxn/errors.hpp"
#include "bxn/special.hpp"

namespace bxn {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_len(const std::vector<double>& v, int K, const char* what) {
  if (v.size() != static_cast<std::size_t>(K))
    throw ConfigError(std::string(what) + ": expected length K");
}

}  // namespace

void PriorSpec::finalize(int K) {
  if (nex_mean_t.empty()) nex_mean_t.assign(K, 0.0);
  if (nex_mean_e.empty()) nex_mean_e.assign(K, 0.0);
  if (nex_sd_t.empty()) nex_sd_t.assign(K, 5.0);
  if (nex_sd_e.empty()) nex_sd_e.assign(K, 5.0);
  validate(K);
}

void PriorSpec::validate(int K) const {
  if (!(alpha_sd > 0.0) || !(sigma_halfnormal_var > 0.0) || !(beta_sd > 0.0) ||
      !(phi_halfnormal_var > 0.0))
    throw ConfigError("priors: all SDs/variances must be strictly positive");
  require_len(nex_mean_t, K, "priors.nex_mean_t");
  require_len(nex_mean_e, K, "priors.nex_mean_e");
  require_len(nex_sd_t, K, "priors.nex_sd_t");
  require_len(nex_sd_e, K, "priors.nex_sd_e");
  for (double s : nex_sd_t)
    if (!(s > 0.0)) throw ConfigError("priors.nex_sd_t: entries must be positive");
  for (double s : nex_sd_e)
    if (!(s > 0.0)) throw ConfigError("priors.nex_sd_e: entries must be positive");
  if (fixed_sigma < 0.0) throw ConfigError("priors.fixed_sigma: must be 0 (off) or positive");
}

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::BHM: return "BHM";
    case ModelKind::BiEXNEX: return "BiEXNEX";
    case ModelKind::EBiEXNEX: return "E-BiEXNEX";
    case ModelKind::IndEXNEX: return "IndEXNEX";
    case ModelKind::SA: return "SA";
  }
  throw ContractError("to_string: bad ModelKind");
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "BHM") return ModelKind::BHM;
  if (s == "BiEXNEX") return ModelKind::BiEXNEX;
  if (s == "E-BiEXNEX" || s == "EBiEXNEX") return ModelKind::EBiEXNEX;
  if (s == "IndEXNEX") return ModelKind::IndEXNEX;
  if (s == "SA") return ModelKind::SA;
  throw ConfigError("unknown model kind '" + s +
                    "' (expected BHM, BiEXNEX, E-BiEXNEX, IndEXNEX or SA)");
}

ModelSpec ModelSpec::make_default(ModelKind kind, int K) {
  ModelSpec spec;
  spec.kind = kind;
  spec.finalize(K);
  return spec;
}

void ModelSpec::finalize(int K) {
  priors.finalize(K);
  const bool factored = kind == ModelKind::IndEXNEX || scheme == IndicatorScheme::factored2x2;
  if (kind == ModelKind::BiEXNEX && omega.empty()) omega.assign(K, 0.5);
  if (factored) {
    if (!lambda.empty())
      throw ConfigError(
          "model: explicit lambda cannot be combined with factored weights; "
          "supply omega_t/omega_e instead");
    if (omega_t.empty()) omega_t.assign(K, 0.5);
    if (omega_e.empty()) omega_e.assign(K, 0.5);
    require_len(omega_t, K, "model.omega_t");
    require_len(omega_e, K, "model.omega_e");
    lambda.resize(K);
    for (int k = 0; k < K; ++k) {
      const double wt = omega_t[k], we = omega_e[k];
      lambda[k] = {wt * we, wt * (1.0 - we), (1.0 - wt) * we, (1.0 - wt) * (1.0 - we)};
    }
  } else if (kind == ModelKind::EBiEXNEX && lambda.empty()) {
    lambda.assign(K, {0.25, 0.25, 0.25, 0.25});
  }
  validate(K);
}

void ModelSpec::validate(int K) const {
  priors.validate(K);
  switch (kind) {
    case ModelKind::BHM:
    case ModelKind::SA:
      break;  // degenerate weights; omega field ignored
    case ModelKind::BiEXNEX:
      require_len(omega, K, "model.omega");
      for (double w : omega)
        if (!(w >= 0.0 && w <= 1.0))
          throw ConfigError("model.omega: BiEXNEX weights must lie in [0,1]");
      break;
    case ModelKind::IndEXNEX:
      require_len(omega_t, K, "model.omega_t");
      require_len(omega_e, K, "model.omega_e");
      for (int k = 0; k < K; ++k)
        if (!(omega_t[k] >= 0.0 && omega_t[k] <= 1.0) ||
            !(omega_e[k] >= 0.0 && omega_e[k] <= 1.0))
          throw ConfigError("model.omega_t/omega_e: weights must lie in [0,1]");
      break;
    case ModelKind::EBiEXNEX: {
      if (lambda.size() != static_cast<std::size_t>(K))
        throw ConfigError("model.lambda: expected K rows");
      for (const auto& row : lambda) {
        double sum = 0.0;
        for (double l : row) {
          if (l < 0.0) throw ConfigError("model.lambda: weights must be non-negative");
          sum += l;
        }
        if (std::fabs(sum - 1.0) > 1e-9)
          throw ConfigError("model.lambda: each row must sum to 1");
      }
      break;
    }
  }
}

std::array<double, 4> ModelSpec::log_weights(int k) const {
  auto safe_log = [](double w) { return w > 0.0 ? std::log(w) : kNegInf; };
  switch (kind) {
    case ModelKind::BHM:
      return {0.0, kNegInf, kNegInf, kNegInf};
    case ModelKind::SA:
      return {kNegInf, kNegInf, kNegInf, 0.0};
    case ModelKind::BiEXNEX:
      return {safe_log(omega[k]), kNegInf, kNegInf, safe_log(1.0 - omega[k])};
    case ModelKind::EBiEXNEX:
    case ModelKind::IndEXNEX:
      return {safe_log(lambda[k][0]), safe_log(lambda[k][1]), safe_log(lambda[k][2]),
              safe_log(lambda[k][3])};
  }
  throw ContractError("log_weights: bad ModelKind");
}

ParamState ParamState::zeros(int K) {
  ParamState st;
  st.alpha_t.assign(K, 0.0);
  st.alpha_e.assign(K, 0.0);
  st.theta_t.assign(K, 0.0);
  st.theta_e.assign(K, 0.0);
  st.sigma[0].assign(K, 1.0);
  st.sigma[1].assign(K, 1.0);
  st.phi1 = st.phi2 = 1.0;
  st.Z.assign(K, kCompNexNex);
  return st;
}

void ParamState::validate(const ModelSpec& spec) const {
  const int k_ = K();
  if (static_cast<int>(alpha_t.size()) != k_ || static_cast<int>(alpha_e.size()) != k_ ||
      static_cast<int>(theta_e.size()) != k_ || static_cast<int>(Z.size()) != k_ ||
      static_cast<int>(sigma[0].size()) != k_ || static_cast<int>(sigma[1].size()) != k_)
    throw ContractError("param state: inconsistent vector lengths");
  for (int j = 0; j < 2; ++j)
    for (double s : sigma[j])
      if (!(s > 0.0)) throw ContractError("param state: sigma must be positive");
  if (!(phi1 > 0.0) || !(phi2 > 0.0)) throw ContractError("param state: phi must be positive");
  if (!(rho > -1.0 && rho < 1.0) || !(kappa > -1.0 && kappa < 1.0))
    throw ContractError("param state: correlations must lie in (-1,1)");
  for (int k = 0; k < k_; ++k) {
    if (Z[k] < 0 || Z[k] > 3) throw ContractError("param state: Z out of range");
    if (spec.log_weights(k)[Z[k]] == kNegInf)
      throw ContractError("param state: indicator assigned to a zero-weight component");
  }
}

double log_likelihood(const TrialData& data, const ParamState& state) {
  if (data.K != state.K()) throw ContractError("log_likelihood: data/state K mismatch");
  double total = 0.0;
  for (int j = 0; j < 2; ++j) {
    for (int k = 0; k < data.K; ++k) {
      const ArmData& arm = data.arms[j][k];
      double lp = 0.0;
      if (arm.n > 0) {
        const double a = state.alpha_t[k] + (j == kTreatment ? state.theta_t[k] : 0.0);
        lp += log_choose(arm.n, arm.tox_count) + arm.tox_count * a - arm.n * softplus(a);
      }
      if (!arm.eff.empty()) {
        const double mu = state.alpha_e[k] + (j == kTreatment ? state.theta_e[k] : 0.0);
        const double sd = state.sigma[j][k];
        for (double z : arm.eff) lp += normal_logpdf(z, mu, sd);
      }
      if (!std::isfinite(lp))
        throw NumericError("log_likelihood: non-finite contribution at arm " +
                           std::string(j == kControl ? "C" : "E") + ", subtrial " +
                           std::to_string(k + 1));
      total += lp;
    }
  }
  return total;
}

double component_logdensity(const ParamState& state, const ModelSpec& spec, int k, int comp) {
  const double tt = state.theta_t[k], te = state.theta_e[k];
  const PriorSpec& pr = spec.priors;
  switch (comp) {
    case kCompExEx:
      return bvn_logpdf(tt, te, state.beta1, state.beta2, state.phi1, state.phi2, state.rho);
    case kCompExNex:  // diagonal by construction (Eq. 4b)
      return normal_logpdf(tt, state.beta1, state.phi1) +
             normal_logpdf(te, pr.nex_mean_e[k], pr.nex_sd_e[k]);
    case kCompNexEx:  // diagonal by construction (Eq. 4c)
      return normal_logpdf(tt, pr.nex_mean_t[k], pr.nex_sd_t[k]) +
             normal_logpdf(te, state.beta2, state.phi2);
    case kCompNexNex:
      return bvn_logpdf(tt, te, pr.nex_mean_t[k], pr.nex_mean_e[k], pr.nex_sd_t[k],
                        pr.nex_sd_e[k], state.kappa);
    default:
      throw ContractError("component_logdensity: component index out of range");
  }
}

namespace {

// Half-N(var) prior placed on a variance v, evaluated as a density on the
// corresponding SD x (v = x^2, Jacobian dv/dx = 2x).
double sd_from_halfnormal_variance_logpdf(double x, double halfnormal_var) {
  const double scale = std::sqrt(halfnormal_var);
  return half_normal_logpdf(x * x, scale) + std::log(2.0 * x);
}

// Hyperprior terms common to all five kinds. The U(-1,1) constants for rho
// and kappa are always included (even where a kind pins them to zero) so the
// degeneracy identities between kinds hold exactly.
double log_hyperprior(const ParamState& state, const ModelSpec& spec) {
  const PriorSpec& pr = spec.priors;
  const int K = state.K();
  double lp = 0.0;
  for (int k = 0; k < K; ++k)
    lp += normal_logpdf(state.alpha_t[k], 0.0, pr.alpha_sd) +
          normal_logpdf(state.alpha_e[k], 0.0, pr.alpha_sd);
  if (pr.fixed_sigma <= 0.0)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < K; ++k)
        lp += sd_from_halfnormal_variance_logpdf(state.sigma[j][k], pr.sigma_halfnormal_var);
  lp += normal_logpdf(state.beta1, 0.0, pr.beta_sd) + normal_logpdf(state.beta2, 0.0, pr.beta_sd);
  lp += sd_from_halfnormal_variance_logpdf(state.phi1, pr.phi_halfnormal_var) +
        sd_from_halfnormal_variance_logpdf(state.phi2, pr.phi_halfnormal_var);
  lp += 2.0 * std::log(0.5);  // rho, kappa ~ U(-1,1)
  return lp;
}

double log_prior_impl(const ParamState& state, const ModelSpec& spec) {
  const int K = state.K();
  double lp = log_hyperprior(state, spec);
  for (int k = 0; k < K; ++k) {
    const double lw = spec.log_weights(k)[state.Z[k]];
    if (lw == kNegInf)
      throw ContractError("log_prior: indicator occupies a zero-weight component");
    lp += lw + component_logdensity(state, spec, k, state.Z[k]);
  }
  return lp;
}

}  // namespace

double log_prior_biexnex(const ParamState& state, const ModelSpec& spec) {
  if (spec.kind != ModelKind::BHM && spec.kind != ModelKind::BiEXNEX &&
      spec.kind != ModelKind::SA)
    throw ContractError("log_prior_biexnex: spec kind is not in the BiEXNEX family");
  return log_prior_impl(state, spec);
}

double log_prior_ebiexnex(const ParamState& state, const ModelSpec& spec) {
  if (spec.kind != ModelKind::EBiEXNEX && spec.kind != ModelKind::IndEXNEX)
    throw ContractError("log_prior_ebiexnex: spec kind is not in the four-component family");
  return log_prior_impl(state, spec);
}

double log_prior(const ParamState& state, const ModelSpec& spec) {
  switch (spec.kind) {
    case ModelKind::BHM:
    case ModelKind::BiEXNEX:
    case ModelKind::SA:
      return log_prior_biexnex(state, spec);
    case ModelKind::EBiEXNEX:
    case ModelKind::IndEXNEX:
      return log_prior_ebiexnex(state, spec);
  }
  throw ContractError("log_prior: bad ModelKind");
}

std::array<double, 4> indicator_full_conditional(const ParamState& state, const ModelSpec& spec,
                                                 int k) {
  if (k < 0 || k >= state.K()) throw ContractError("indicator_full_conditional: bad subtrial");
  const auto lw = spec.log_weights(k);
  std::array<double, 4> lp{};
  for (int c = 0; c < 4; ++c)
    lp[c] = (lw[c] == kNegInf) ? kNegInf : lw[c] + component_logdensity(state, spec, k, c);
  const double lse = log_sum_exp(lp);
  std::array<double, 4> prob{};
  for (int c = 0; c < 4; ++c) prob[c] = (lp[c] == kNegInf) ? 0.0 : std::exp(lp[c] - lse);
  return prob;
}

double factored_indicator_conditional(const ParamState& state, const ModelSpec& spec, int k,
                                      bool toxicity, bool other_ex) {
  if (spec.omega_t.size() != static_cast<std::size_t>(state.K()) ||
      spec.omega_e.size() != static_cast<std::size_t>(state.K()))
    throw ContractError(
        "factored_indicator_conditional: spec lacks factored weights omega_t/omega_e");
  // Components touched when this endpoint flips, holding the other fixed.
  int c_ex, c_nex;
  double w_ex;
  if (toxicity) {
    c_ex = other_ex ? kCompExEx : kCompExNex;
    c_nex = other_ex ? kCompNexEx : kCompNexNex;
    w_ex = spec.omega_t[k];
  } else {
    c_ex = other_ex ? kCompExEx : kCompNexEx;
    c_nex = other_ex ? kCompExNex : kCompNexNex;
    w_ex = spec.omega_e[k];
  }
  const double a = std::log(w_ex) + component_logdensity(state, spec, k, c_ex);
  const double b = std::log(1.0 - w_ex) + component_logdensity(state, spec, k, c_nex);
  const std::array<double, 2> lp{a, b};
  return std::exp(a - log_sum_exp(lp));
}

}  // namespace bxn
