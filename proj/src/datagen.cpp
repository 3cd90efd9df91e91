#include <cmath>
#include <cstddef>

#include "bxn/errors.hpp"
#include "bxn/special.hpp"
#include "bxn/trial_data.hpp"

namespace bxn {

void TrialData::validate() const {
  if (K < 1) throw ConfigError("trial data: K must be >= 1");
  for (int j = 0; j < 2; ++j) {
    if (arms[j].size() != static_cast<std::size_t>(K))
      throw ConfigError("trial data: arm vectors must have length K");
    for (const ArmData& a : arms[j]) {
      if (a.n < 0 || a.tox_count < 0 || a.tox_count > a.n)
        throw ConfigError("trial data: require 0 <= tox_count <= n");
      if (!a.eff.empty() && a.eff.size() != static_cast<std::size_t>(a.n))
        throw ConfigError("trial data: efficacy vector must be empty or length n");
    }
  }
}

ArmData generate_arm(const BivariateNormalParams& params, double threshold, int n,
                     RngStream& rng) {
  if (n < 1) throw ContractError("generate_arm: n must be >= 1");
  ArmData out;
  out.n = n;
  out.eff.reserve(n);
  for (int i = 0; i < n; ++i) {
    const auto [x, z] = sample_bivariate_normal(params, rng);
    out.tox_count += (x <= threshold) ? 1 : 0;
    out.eff.push_back(z);
  }
  return out;
}

double treatment_latent_mean(double p_Ck, double theta_t, double threshold, double sd) {
  if (!(p_Ck > 0.0 && p_Ck < 1.0))
    throw ContractError("treatment_latent_mean: p_Ck must lie in (0,1)");
  if (!(sd > 0.0)) throw ContractError("treatment_latent_mean: sd must be positive");
  const double p_Ek = inv_logit(logit(p_Ck) + theta_t);
  if (!(p_Ek > 0.0 && p_Ek < 1.0))
    throw NumericError("treatment_latent_mean: implied treatment toxicity rate is numerically 0 or 1");
  return normal_quantile(1.0 - p_Ek, threshold, sd);
}

TrialData generate_trial(const Scenario& s, const RngStream& rep) {
  s.validate();
  TrialData out;
  out.K = s.K;
  out.arms[kControl].resize(s.K);
  out.arms[kTreatment].resize(s.K);

  for (int k = 0; k < s.K; ++k) {
    const double mu2C = s.mu1C[k] + s.efficacy_offset;

    BivariateNormalParams control;
    control.mean1 = s.mu1C[k];
    control.mean2 = mu2C;
    control.sd1 = s.sd1;
    control.sd2 = s.sd2;
    control.corr = s.gen_corr_control;

    const double p_Ck = normal_cdf(s.threshold_T, s.mu1C[k], s.sd1);
    BivariateNormalParams treatment;
    treatment.mean1 = treatment_latent_mean(p_Ck, s.theta_t[k], s.threshold_T, s.sd1);
    treatment.mean2 = mu2C + s.theta_e[k];
    treatment.sd1 = s.sd1;
    treatment.sd2 = s.sd2;
    treatment.corr = s.gen_corr_treatment;

    for (int j = 0; j < 2; ++j) {
      RngStream arm_rng = rep.child(2 * static_cast<std::uint64_t>(k) + j);
      out.arms[j][k] =
          generate_arm(j == kControl ? control : treatment, s.threshold_T, s.arm_sizes[k], arm_rng);
    }
  }
  return out;
}

}  // namespace bxn
