#include "oracles.hpp"

#include <cmath>
#include <stdexcept>

#include "bxn/special.hpp"

namespace bxn::oracle {

GridPosterior grid_tox_posterior(int n_C, int y_C, int n_E, int y_E, double alpha_sd,
                                 double nex_mean, double nex_sd, int grid, double half_width) {
  if (n_C < 1 || n_E < 1 || grid < 10) throw std::invalid_argument("grid_tox_posterior");
  const double ca = logit((y_C + 0.5) / (n_C + 1.0));
  const double ct = logit((y_E + 0.5) / (n_E + 1.0)) - ca;
  const double ha = half_width, ht = half_width;
  const double da = 2.0 * ha / grid, dt = 2.0 * ht / grid;

  // log-likelihood pieces depend on alpha and alpha+theta only
  auto loglik_C = [&](double a) { return y_C * a - n_C * softplus(a); };
  auto loglik_E = [&](double s) { return y_E * s - n_E * softplus(s); };

  std::vector<double> theta(grid), wtheta(grid, 0.0);
  double lp_max = -1e300;
  std::vector<double> lp(static_cast<std::size_t>(grid) * grid);
  for (int i = 0; i < grid; ++i) {
    const double a = ca - ha + da * (i + 0.5);
    const double la = loglik_C(a) + normal_logpdf(a, 0.0, alpha_sd);
    for (int j = 0; j < grid; ++j) {
      const double t = ct - ht + dt * (j + 0.5);
      if (i == 0) theta[j] = t;
      const double v = la + loglik_E(a + t) + normal_logpdf(t, nex_mean, nex_sd);
      lp[static_cast<std::size_t>(i) * grid + j] = v;
      if (v > lp_max) lp_max = v;
    }
  }
  double total = 0.0;
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      const double w = std::exp(lp[static_cast<std::size_t>(i) * grid + j] - lp_max);
      wtheta[j] += w;
      total += w;
    }

  GridPosterior out;
  double m1 = 0.0, m2 = 0.0;
  for (int j = 0; j < grid; ++j) {
    const double w = wtheta[j] / total;
    m1 += w * theta[j];
    m2 += w * theta[j] * theta[j];
  }
  out.mean_theta = m1;
  out.sd_theta = std::sqrt(std::max(0.0, m2 - m1 * m1));

  // median: linear interpolation of the cumulative marginal across cells
  double cum = 0.0;
  for (int j = 0; j < grid; ++j) {
    const double w = wtheta[j] / total;
    if (cum + w >= 0.5) {
      const double frac = (0.5 - cum) / w;
      out.median_theta = theta[j] + (frac - 0.5) * dt;
      return out;
    }
    cum += w;
  }
  out.median_theta = theta.back();
  return out;
}

ConjugatePosterior conjugate_eff_posterior(const std::vector<double>& z_C,
                                           const std::vector<double>& z_E, double sigma,
                                           double alpha_sd, double nex_mean, double nex_sd) {
  const double isig2 = 1.0 / (sigma * sigma);
  const double nC = static_cast<double>(z_C.size());
  const double nE = static_cast<double>(z_E.size());
  double sC = 0.0, sE = 0.0;
  for (double z : z_C) sC += z;
  for (double z : z_E) sE += z;

  // precision = prior + X'X / sigma^2 for design rows (1,0) and (1,1)
  const double p11 = 1.0 / (alpha_sd * alpha_sd) + (nC + nE) * isig2;
  const double p12 = nE * isig2;
  const double p22 = 1.0 / (nex_sd * nex_sd) + nE * isig2;
  const double b1 = (sC + sE) * isig2;
  const double b2 = nex_mean / (nex_sd * nex_sd) + sE * isig2;

  const double det = p11 * p22 - p12 * p12;
  ConjugatePosterior out;
  out.mean_alpha = (p22 * b1 - p12 * b2) / det;
  out.mean_theta = (p11 * b2 - p12 * b1) / det;
  out.sd_alpha = std::sqrt(p22 / det);
  out.sd_theta = std::sqrt(p11 / det);
  return out;
}

namespace {

struct ExCdfCtx {
  double x, beta_sd, phi_var;
};

// phi^2 ~ HalfN(scale = sqrt(phi_var)); change of variables to phi gives
// p(phi) = sqrt(2/pi)/s * exp(-phi^4 / (2 s^2)) * 2 phi.
double ex_cdf_integrand(double phi, const void* raw) {
  const auto* c = static_cast<const ExCdfCtx*>(raw);
  const double marg_sd = std::sqrt(c->beta_sd * c->beta_sd + phi * phi);
  const double s = std::sqrt(c->phi_var);
  const double dens =
      std::sqrt(2.0 / M_PI) / s * std::exp(-phi * phi * phi * phi / (2.0 * s * s)) * 2.0 * phi;
  return normal_cdf(c->x, 0.0, marg_sd) * dens;
}

double ex_prior_cdf(double x, double beta_sd, double phi_var) {
  ExCdfCtx ctx{x, beta_sd, phi_var};
  const double hi = std::sqrt(10.0 * std::sqrt(phi_var));
  return adaptive_simpson(ex_cdf_integrand, &ctx, 0.0, hi, 1e-12);
}

double invert_cdf(double p, double lo, double hi, double (*cdf)(double, const void*),
                  const void* ctx) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid, ctx) < p)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

struct MixCtx {
  double w_ex, beta_sd, phi_var, nex_mean, nex_sd;
};

double mix_cdf(double x, const void* raw) {
  const auto* c = static_cast<const MixCtx*>(raw);
  double v = (1.0 - c->w_ex) * normal_cdf(x, c->nex_mean, c->nex_sd);
  if (c->w_ex > 0.0) v += c->w_ex * ex_prior_cdf(x, c->beta_sd, c->phi_var);
  return v;
}

}  // namespace

double ex_prior_quantile(double p, double beta_sd, double phi_var) {
  MixCtx ctx{1.0, beta_sd, phi_var, 0.0, 1.0};
  return invert_cdf(p, -60.0, 60.0, mix_cdf, &ctx);
}

double mixture_prior_quantile(double p, double w_ex, double beta_sd, double phi_var,
                              double nex_mean, double nex_sd) {
  MixCtx ctx{w_ex, beta_sd, phi_var, nex_mean, nex_sd};
  return invert_cdf(p, -60.0, 60.0, mix_cdf, &ctx);
}

double half_normal_quantile(double p, double variance) {
  return std::sqrt(variance) * normal_quantile(0.5 * (1.0 + p), 0.0, 1.0);
}

}  // namespace bxn::oracle
