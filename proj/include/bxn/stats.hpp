#pragma once

#include <array>

#include "bxn/rng.hpp"

namespace bxn {

/// Parameters of a bivariate normal over the latent toxicity score x and the
/// observed efficacy score z.
struct BivariateNormalParams {
  double mean1 = 0.0;
  double mean2 = 0.0;
  double sd1 = 1.0;
  double sd2 = 1.0;
  double corr = 0.0;

  /// Throws ConfigError unless sd1, sd2 > 0 and corr in (-1, 1).
  void validate() const;
};

/// One draw (x, z) from the bivariate normal.
std::array<double, 2> sample_bivariate_normal(const BivariateNormalParams& p, RngStream& rng);

/// Draw from a half-normal with the given scale (|N(0, scale^2)|).
double sample_half_normal(double scale, RngStream& rng);

/// Correlation between the dichotomized outcome y = I(x <= threshold) and z
/// under the bivariate normal law. Evaluated by adaptive quadrature of
///   E[z I(x <= threshold)] = int_{-inf}^{t} (mean2 + corr*sd2*u) phi(u) du,
/// t = (threshold - mean1)/sd1. Throws NumericError when P(y=1) is 0 or 1 to
/// machine precision (correlation undefined).
double outcome_correlation(const BivariateNormalParams& p, double threshold);

}  // namespace bxn
