#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace bxn {

inline constexpr double kLn2Pi = 1.8378770664093454836;  // ln(2*pi)
inline constexpr double kSqrt2 = 1.4142135623730950488;

/// log(p / (1-p)); requires p in (0, 1).
double logit(double p);

/// 1 / (1 + exp(-x)); overflow-safe for any finite x.
double inv_logit(double x);

/// log(1 + exp(x)) without overflow.
double softplus(double x);

/// Standard normal density / log-density.
double std_normal_pdf(double z);
double std_normal_logpdf(double z);

/// N(mu, sd^2) log-density.
double normal_logpdf(double x, double mu, double sd);

/// Phi((x - mu) / sd) evaluated via erfc; absolute error < 1e-15.
double normal_cdf(double x, double mu, double sd);

/// Inverse of normal_cdf in p: Wichura's AS 241 rational approximation with
/// one Newton polish. Requires p in (0, 1).
double normal_quantile(double p, double mu, double sd);

/// Bivariate normal log-density with means (m1, m2), sds (s1, s2),
/// correlation r in (-1, 1).
double bvn_logpdf(double x1, double x2, double m1, double m2, double s1, double s2, double r);

/// Half-normal log-density with scale a (x >= 0):
/// f(x) = sqrt(2/pi)/a * exp(-x^2 / (2 a^2)).
double half_normal_logpdf(double x, double scale);

/// log(C(n, y)) via lgamma.
double log_choose(long n, long y);

/// Numerically stable log(sum(exp(x_i))).
double log_sum_exp(std::span<const double> x);

/// Adaptive Simpson quadrature of f on [a, b] to absolute tolerance tol.
double adaptive_simpson(double (*f)(double, const void*), const void* ctx, double a, double b,
                        double tol);

}  // namespace bxn
