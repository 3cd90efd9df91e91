#include "bxn/stats.hpp"

#include <cmath>

#include "bxn/errors.hpp"
#include "bxn/special.hpp"

namespace bxn {

void BivariateNormalParams::validate() const {
  if (!(sd1 > 0.0) || !(sd2 > 0.0))
    throw ConfigError("bivariate normal: standard deviations must be positive");
  if (!(corr > -1.0 && corr < 1.0))
    throw ConfigError("bivariate normal: correlation must lie in (-1,1)");
}

std::array<double, 2> sample_bivariate_normal(const BivariateNormalParams& p, RngStream& rng) {
  const double u1 = rng.next_normal();
  const double u2 = rng.next_normal();
  const double x = p.mean1 + p.sd1 * u1;
  const double z = p.mean2 + p.sd2 * (p.corr * u1 + std::sqrt(1.0 - p.corr * p.corr) * u2);
  return {x, z};
}

double sample_half_normal(double scale, RngStream& rng) {
  if (!(scale > 0.0)) throw ContractError("sample_half_normal: scale must be positive");
  return scale * std::fabs(rng.next_normal());
}

namespace {

struct TruncCtx {
  double mean2, slope;  // integrand: (mean2 + slope*u) * phi(u)
};

double trunc_integrand(double u, const void* ctx) {
  const auto* c = static_cast<const TruncCtx*>(ctx);
  return (c->mean2 + c->slope * u) * std_normal_pdf(u);
}

}  // namespace

double outcome_correlation(const BivariateNormalParams& p, double threshold) {
  p.validate();
  const double t = (threshold - p.mean1) / p.sd1;
  const double prob = normal_cdf(t, 0.0, 1.0);
  const double pq = prob * (1.0 - prob);
  if (!(pq > 0.0))
    throw NumericError("outcome_correlation: dichotomized outcome is degenerate");

  // Lower quadrature limit: the integrand is O(phi(u)), negligible below -40.
  const double lo = std::min(t, 0.0) - 40.0;
  TruncCtx ctx{p.mean2, p.corr * p.sd2};
  const double ezy = adaptive_simpson(trunc_integrand, &ctx, lo, t, 1e-13);

  const double cov = ezy - p.mean2 * prob;
  return cov / (p.sd2 * std::sqrt(pq));
}

}  // namespace bxn
