#include <array>
#include <cmath>
#include <vector>

#include "doctest.h"

#include "bxn/errors.hpp"
#include "bxn/special.hpp"
#include "bxn/stats.hpp"

using namespace bxn;

#define CHECK_NEAR(a, b, tol) CHECK(std::abs((a) - (b)) <= (tol))

TEST_CASE("BivariateNormalParams validation") {
  BivariateNormalParams p;
  CHECK_NOTHROW(p.validate());
  p.corr = 1.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.corr = -1.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.corr = 0.0;
  p.sd1 = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.sd1 = 1.0;
  p.sd2 = -2.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("sample_bivariate_normal empirical moments") {
  BivariateNormalParams p;
  p.mean1 = 1.0;
  p.mean2 = -2.0;
  p.sd1 = 2.0;
  p.sd2 = 0.5;
  p.corr = 0.8;
  RngStream rng(42, 0);
  const int n = 100000;
  double s1 = 0, s2 = 0, s11 = 0, s22 = 0, s12 = 0;
  for (int i = 0; i < n; ++i) {
    auto [x, z] = sample_bivariate_normal(p, rng);
    s1 += x;
    s2 += z;
    s11 += x * x;
    s22 += z * z;
    s12 += x * z;
  }
  const double m1 = s1 / n, m2 = s2 / n;
  const double v1 = s11 / n - m1 * m1, v2 = s22 / n - m2 * m2;
  const double cov = s12 / n - m1 * m2;
  CHECK_NEAR(m1, 1.0, 0.03);
  CHECK_NEAR(m2, -2.0, 0.01);
  CHECK_NEAR(std::sqrt(v1), 2.0, 0.03);
  CHECK_NEAR(std::sqrt(v2), 0.5, 0.01);
  CHECK_NEAR(cov / std::sqrt(v1 * v2), 0.8, 0.01);
}

TEST_CASE("zero correlation gives independent margins") {
  BivariateNormalParams p;
  p.corr = 0.0;
  RngStream rng(7, 3);
  const int n = 100000;
  double s12 = 0;
  for (int i = 0; i < n; ++i) {
    auto [x, z] = sample_bivariate_normal(p, rng);
    s12 += x * z;
  }
  CHECK_NEAR(s12 / n, 0.0, 0.015);
}

TEST_CASE("sample_half_normal mean matches scale * sqrt(2/pi)") {
  RngStream rng(11, 0);
  const int n = 200000;
  double acc05 = 0, acc5 = 0;
  for (int i = 0; i < n; ++i) acc05 += sample_half_normal(0.5, rng);
  for (int i = 0; i < n; ++i) acc5 += sample_half_normal(5.0, rng);
  CHECK_NEAR(acc05 / n, 0.5 * std::sqrt(2.0 / M_PI), 0.005);  // 0.3989
  CHECK_NEAR(acc5 / n, 5.0 * std::sqrt(2.0 / M_PI), 0.05);    // 3.989
  // all draws non-negative
  RngStream rng2(11, 1);
  for (int i = 0; i < 1000; ++i) CHECK(sample_half_normal(2.0, rng2) >= 0.0);
}

TEST_CASE("outcome_correlation against a Monte Carlo oracle") {
  BivariateNormalParams p;
  p.mean1 = 0.3;
  p.mean2 = 1.1;
  p.sd1 = 1.4;
  p.sd2 = 0.9;
  p.corr = -0.55;
  const double threshold = 0.8;
  const double analytic = outcome_correlation(p, threshold);

  RngStream rng(2024, 5);
  const int n = 400000;
  double sy = 0, sz = 0, syz = 0, szz = 0;
  for (int i = 0; i < n; ++i) {
    auto [x, z] = sample_bivariate_normal(p, rng);
    const double y = (x <= threshold) ? 1.0 : 0.0;
    sy += y;
    sz += z;
    syz += y * z;
    szz += z * z;
  }
  const double my = sy / n, mz = sz / n;
  const double vy = my * (1.0 - my);
  const double vz = szz / n - mz * mz;
  const double mc = (syz / n - my * mz) / std::sqrt(vy * vz);
  CHECK_NEAR(analytic, mc, 3.0 * 1.5 / std::sqrt(double(n)));
}

TEST_CASE("outcome_correlation sign and degenerate cases") {
  BivariateNormalParams p;
  p.corr = 0.6;
  // y = I(x <= t) moves opposite to x, so positive latent correlation gives a
  // negative outcome correlation.
  CHECK(outcome_correlation(p, 0.0) < 0.0);
  p.corr = -0.6;
  CHECK(outcome_correlation(p, 0.0) > 0.0);
  p.corr = 0.0;
  CHECK_NEAR(outcome_correlation(p, 0.0), 0.0, 1e-10);

  // antisymmetry in the latent correlation
  p.corr = 0.37;
  const double a = outcome_correlation(p, 0.4);
  p.corr = -0.37;
  const double b = outcome_correlation(p, 0.4);
  CHECK_NEAR(a, -b, 1e-9);

  // threshold far in the tail: P(y) degenerate to machine precision
  p.corr = 0.2;
  CHECK_THROWS_AS(outcome_correlation(p, 60.0), NumericError);
  CHECK_THROWS_AS(outcome_correlation(p, -60.0), NumericError);
}
