#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace bxn {

/// One simulation scenario: true subtrial-specific effects plus every
/// knob of the data-generation mechanism.
struct Scenario {
  std::string name;
  int K = 0;                    // number of subtrials
  std::vector<double> theta_t;  // toxicity effect, log-odds scale
  std::vector<double> theta_e;  // efficacy effect, mean-difference scale
  std::vector<double> mu1C;     // latent toxicity mean, control arm
  double efficacy_offset = 2.0;  // mu'_2Ck = mu'_1Ck + offset
  double threshold_T = 0.8;      // dichotomisation cut
  double gen_corr_control = 0.8;    // rho'
  double gen_corr_treatment = 0.8;  // rho''
  double sd1 = 1.0;  // latent toxicity SD (both arms)
  double sd2 = 1.0;  // efficacy SD (both arms)
  std::vector<int> arm_sizes;  // n_Ck = n_Ek per subtrial

  /// Throws ConfigError on length mismatches or invalid entries.
  void validate() const;
};

enum class TruthLabel { null_, desirable };

/// Scenario library: Global Null, 1a-2c, Ia-IIIb (arm sizes 10,10,10,6,12,10)
/// and the small-sample sub-scenarios 1.1-1.4, 2.1-2.4 (arm sizes 5,5,5,3,6,5).
std::vector<Scenario> builtin_scenarios();

/// Exact-name lookup into builtin_scenarios(); ConfigError listing available
/// names when not found.
Scenario find_scenario(std::string_view name);

/// Per-subtrial labels: desirable iff theta_t < 0 and theta_e > delta_truth
/// (strict), otherwise null.
std::vector<TruthLabel> truth_labels(const Scenario& s, double delta_truth);

/// Theoretical per-arm marginals implied by a scenario.
struct ArmSummary {
  double p_C;   // control toxicity rate Phi(T; mu'_1Ck, sd1)
  double p_E;   // treatment toxicity rate inv_logit(logit(p_C) + theta_t)
  double mu_C;  // control efficacy mean mu'_1Ck + offset
  double mu_E;  // treatment efficacy mean mu_C + theta_e
};

std::vector<ArmSummary> expected_arm_summaries(const Scenario& s);

}  // namespace bxn
