#include <cmath>
#include <vector>

#include "doctest.h"

#include "bxn/errors.hpp"
#include "bxn/special.hpp"

using namespace bxn;

#define CHECK_NEAR(a, b, tol) CHECK(std::abs((a) - (b)) <= (tol))

TEST_CASE("logit and inv_logit") {
  CHECK(logit(0.5) == 0.0);
  CHECK_NEAR(logit(0.34), -0.6633, 1e-3);
  CHECK_NEAR(inv_logit(-1.463), 0.188, 2e-3);
  CHECK_THROWS_AS(logit(0.0), NumericError);
  CHECK_THROWS_AS(logit(1.0), NumericError);

  for (double p : {1e-6, 1e-3, 0.2, 0.5, 0.9, 1.0 - 1e-6})
    CHECK_NEAR(inv_logit(logit(p)), p, 1e-12);
}

TEST_CASE("softplus is stable at extreme arguments") {
  CHECK_NEAR(softplus(0.0), std::log(2.0), 1e-15);
  CHECK_NEAR(softplus(800.0), 800.0, 1e-9);
  CHECK_NEAR(softplus(-800.0), 0.0, 1e-300);
  CHECK(std::isfinite(softplus(800.0)));
}

TEST_CASE("normal_cdf fixture values") {
  CHECK(normal_cdf(0.8, 0.8, 1.0) == 0.5);
  CHECK_NEAR(normal_cdf(0.8, 1.2, 1.0), 0.3446, 2e-4);
  CHECK_NEAR(normal_cdf(0.8, 1.5, 1.0), 0.2420, 2e-4);
  // symmetry
  CHECK_NEAR(normal_cdf(-1.3, 0.0, 1.0) + normal_cdf(1.3, 0.0, 1.0), 1.0, 1e-14);
}

TEST_CASE("normal_quantile fixture values and round-trip") {
  CHECK(normal_quantile(0.5, 0.0, 1.0) == 0.0);
  CHECK_NEAR(normal_quantile(0.81, 0.8, 1.0), 1.678, 2e-3);
  CHECK_NEAR(normal_quantile(0.66, 0.8, 1.0), 1.212, 2e-3);
  CHECK_THROWS_AS(normal_quantile(0.0, 0.0, 1.0), NumericError);
  CHECK_THROWS_AS(normal_quantile(1.0, 0.0, 1.0), NumericError);

  for (double p : {1e-6, 1e-4, 0.025, 0.5, 0.975, 1.0 - 1e-6}) {
    const double x = normal_quantile(p, 2.0, 3.0);
    CHECK_NEAR(normal_cdf(x, 2.0, 3.0), p, 1e-9);
  }
}

TEST_CASE("bvn_logpdf agrees with the direct formula") {
  const double x1 = 0.3, x2 = -1.1, m1 = 0.1, m2 = 0.4, s1 = 1.5, s2 = 0.7, r = -0.6;
  const double z1 = (x1 - m1) / s1, z2 = (x2 - m2) / s2;
  const double q = (z1 * z1 - 2.0 * r * z1 * z2 + z2 * z2) / (1.0 - r * r);
  const double ref =
      -std::log(2.0 * M_PI * s1 * s2 * std::sqrt(1.0 - r * r)) - 0.5 * q;
  CHECK_NEAR(bvn_logpdf(x1, x2, m1, m2, s1, s2, r), ref, 1e-12);

  // zero correlation factorizes
  const double a = bvn_logpdf(x1, x2, m1, m2, s1, s2, 0.0);
  const double b = normal_logpdf(x1, m1, s1) + normal_logpdf(x2, m2, s2);
  CHECK_NEAR(a, b, 1e-13);
}

TEST_CASE("half_normal_logpdf normalisation") {
  const double scale = 0.5;
  // density at 0 is sqrt(2/pi)/scale
  CHECK_NEAR(half_normal_logpdf(0.0, scale),
             std::log(std::sqrt(2.0 / M_PI) / scale), 1e-12);
  CHECK_NEAR(std::exp(half_normal_logpdf(scale, scale)),
             std::sqrt(2.0 / M_PI) / scale * std::exp(-0.5), 1e-12);
}

TEST_CASE("log_choose matches small binomial coefficients") {
  CHECK_NEAR(std::exp(log_choose(5, 2)), 10.0, 1e-10);
  CHECK_NEAR(std::exp(log_choose(10, 0)), 1.0, 1e-12);
  CHECK_NEAR(std::exp(log_choose(10, 10)), 1.0, 1e-12);
  CHECK_NEAR(std::exp(log_choose(20, 7)), 77520.0, 1e-6);
}

TEST_CASE("log_sum_exp") {
  std::vector<double> v{0.0, 0.0};
  CHECK_NEAR(log_sum_exp(v), std::log(2.0), 1e-14);
  std::vector<double> big{1000.0, 1000.0 + std::log(2.0)};
  CHECK_NEAR(log_sum_exp(big), 1000.0 + std::log(3.0), 1e-12);
  std::vector<double> inf{-INFINITY, 1.0};
  CHECK_NEAR(log_sum_exp(inf), 1.0, 1e-14);
}

namespace {
double square(double x, const void*) { return x * x; }
double std_gauss(double x, const void*) { return bxn::std_normal_pdf(x); }
}  // namespace

TEST_CASE("adaptive_simpson on polynomials and gaussians") {
  CHECK_NEAR(adaptive_simpson(square, nullptr, 0.0, 1.0, 1e-12), 1.0 / 3.0, 1e-10);
  CHECK_NEAR(adaptive_simpson(std_gauss, nullptr, -10.0, 10.0, 1e-12), 1.0, 1e-9);
}
