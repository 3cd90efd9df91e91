#pragma once

#include <array>
#include <vector>

#include "bxn/rng.hpp"
#include "bxn/scenario.hpp"
#include "bxn/stats.hpp"

namespace bxn {

inline constexpr int kControl = 0;
inline constexpr int kTreatment = 1;

/// One (arm, subtrial) cell: binomial toxicity count plus patient-level
/// efficacy observations. eff may be empty (toxicity-only data); otherwise
/// its length must equal n.
struct ArmData {
  int n = 0;
  int tox_count = 0;
  std::vector<double> eff;
};

struct TrialData {
  int K = 0;
  std::array<std::vector<ArmData>, 2> arms;  // [kControl/kTreatment][k]

  /// Throws ConfigError on count/range violations.
  void validate() const;
};

/// Draws n latent (x, z) pairs and reduces to (count of x <= threshold, z).
ArmData generate_arm(const BivariateNormalParams& params, double threshold, int n,
                     RngStream& rng);

/// mu'_1Ek solving Phi(T; mu, sd) = inv_logit(logit(p_Ck) + theta_t).
/// Throws NumericError when the implied treatment rate is numerically 0 or 1.
double treatment_latent_mean(double p_Ck, double theta_t, double threshold, double sd);

/// One full simulated trial. `rep` names the replicate-level stream; each
/// (subtrial, arm) cell draws from its own substream so that one arm's data
/// never depends on another's sample-size or ordering.
TrialData generate_trial(const Scenario& s, const RngStream& rep);

}  // namespace bxn
