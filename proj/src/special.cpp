#include "bxn/special.hpp"

#include <limits>

#include "bxn/errors.hpp"

namespace bxn {

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw NumericError("logit: argument must lie in (0,1)");
  return std::log(p) - std::log1p(-p);
}

double inv_logit(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  if (x > 35.0) return x;
  if (x < -35.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

double std_normal_pdf(double z) { return std::exp(-0.5 * z * z - 0.5 * kLn2Pi); }

double std_normal_logpdf(double z) { return -0.5 * z * z - 0.5 * kLn2Pi; }

double normal_logpdf(double x, double mu, double sd) {
  const double z = (x - mu) / sd;
  return -0.5 * z * z - 0.5 * kLn2Pi - std::log(sd);
}

double normal_cdf(double x, double mu, double sd) {
  const double z = (x - mu) / sd;
  return 0.5 * std::erfc(-z / kSqrt2);
}

namespace {

// Wichura (1988), algorithm AS 241, PPND16: inverse standard normal.
double ppnd16(double p) {
  const double q = p - 0.5;
  double r;
  if (std::fabs(q) <= 0.425) {
    r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) *
                    r +
                4.5921953931549871457e4) *
                   r +
               1.3731693765509461125e4) *
                  r +
              1.9715909503065514427e3) *
                 r +
             1.3314166789178437745e2) *
                r +
            3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) *
                    r +
                2.1213794301586595867e4) *
                   r +
               5.3941960214247511077e3) *
                  r +
              6.8718700749205790830e2) *
                 r +
             4.2313330701600911252e1) *
                r +
            1.0);
  }
  r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) *
                   r +
               1.27045825245236838258e0) *
                  r +
              3.64784832476320460504e0) *
                 r +
             5.76949722146069140550e0) *
                r +
            4.63033784615654529590e0) *
               r +
           1.42343711074968357734e0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) *
                   r +
               1.48103976427480074590e-1) *
                  r +
              6.89767334985100004550e-1) *
                 r +
             1.67638483018380384940e0) *
                r +
            2.05319162663775882187e0) *
               r +
           1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) *
                   r +
               2.65321895265761230930e-2) *
                  r +
              2.96560571828504891230e-1) *
                 r +
             1.78482653991729133580e0) *
                r +
            5.46378491116411436990e0) *
               r +
           6.65790464350110377720e0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) *
                   r +
               7.86869131145613259100e-4) *
                  r +
              1.48753612908506148525e-2) *
                 r +
             1.36929880922735805310e-1) *
                r +
            5.99832206555887937690e-1) *
               r +
           1.0);
  }
  return (q < 0.0) ? -val : val;
}

}  // namespace

double normal_quantile(double p, double mu, double sd) {
  if (!(p > 0.0 && p < 1.0)) throw NumericError("normal_quantile: p must lie in (0,1)");
  double z = ppnd16(p);
  // One Newton step sharpens the approximation to full double precision
  // where the density is not vanishingly small.
  if (p > 1e-300 && p < 1.0 - 1e-16) {
    const double f = std_normal_pdf(z);
    if (f > 1e-280) z -= (0.5 * std::erfc(-z / kSqrt2) - p) / f;
  }
  return mu + sd * z;
}

double bvn_logpdf(double x1, double x2, double m1, double m2, double s1, double s2, double r) {
  const double omr2 = 1.0 - r * r;
  const double z1 = (x1 - m1) / s1;
  const double z2 = (x2 - m2) / s2;
  const double q = (z1 * z1 - 2.0 * r * z1 * z2 + z2 * z2) / omr2;
  return -kLn2Pi - std::log(s1) - std::log(s2) - 0.5 * std::log(omr2) - 0.5 * q;
}

double half_normal_logpdf(double x, double scale) {
  if (x < 0.0) return -std::numeric_limits<double>::infinity();
  const double z = x / scale;
  return 0.5 * std::log(2.0 / (3.14159265358979323846)) - std::log(scale) - 0.5 * z * z;
}

double log_choose(long n, long y) {
  if (y < 0 || y > n) throw ContractError("log_choose: require 0 <= y <= n");
  return std::lgamma(n + 1.0) - std::lgamma(y + 1.0) - std::lgamma(n - y + 1.0);
}

double log_sum_exp(std::span<const double> x) {
  if (x.empty()) throw ContractError("log_sum_exp: empty input");
  double m = -std::numeric_limits<double>::infinity();
  for (double v : x)
    if (v > m) m = v;
  if (!std::isfinite(m)) return m;  // all -inf (or a stray +inf/nan propagates)
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

namespace {

double simpson(double a, double fa, double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adsimp(double (*f)(double, const void*), const void* ctx, double a, double fa, double b,
              double fb, double m, double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm, ctx), frm = f(rm, ctx);
  const double left = simpson(a, fa, m, fm, flm);
  const double right = simpson(m, fm, b, fb, frm);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adsimp(f, ctx, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adsimp(f, ctx, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(double (*f)(double, const void*), const void* ctx, double a, double b,
                        double tol) {
  if (!(b > a)) throw ContractError("adaptive_simpson: require b > a");
  const double m = 0.5 * (a + b);
  const double fa = f(a, ctx), fb = f(b, ctx), fm = f(m, ctx);
  const double whole = simpson(a, fa, b, fb, fm);
  return adsimp(f, ctx, a, fa, b, fb, m, fm, whole, tol, 48);
}

}  // namespace bxn
