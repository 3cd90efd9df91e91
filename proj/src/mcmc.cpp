#include "bxn/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#include "bxn/errors.hpp"
#include "bxn/special.hpp"

namespace bxn {

void McmcConfig::validate() const {
  if (chains < 1) throw ConfigError("mcmc.chains: must be >= 1");
  if (burn_in < 0) throw ConfigError("mcmc.burn_in: must be >= 0");
  if (iterations < 100) throw ConfigError("mcmc.iterations: must be >= 100");
  if (thin < 1 || thin > iterations)
    throw ConfigError("mcmc.thin: must lie in [1, iterations]");
  if (adapt_window < 1) throw ConfigError("mcmc.adapt_window: must be >= 1");
  if (!(target_accept_scalar > 0.0 && target_accept_scalar < 1.0) ||
      !(target_accept_block > 0.0 && target_accept_block < 1.0))
    throw ConfigError("mcmc.target_accept: must lie in (0,1)");
}

std::vector<std::string> coordinate_names(int K) {
  std::vector<std::string> names;
  names.reserve(6 * K + 6);
  auto push = [&](const char* stem) {
    for (int k = 1; k <= K; ++k) names.push_back(std::string(stem) + "[" + std::to_string(k) + "]");
  };
  push("alpha_t");
  push("alpha_e");
  push("theta_t");
  push("theta_e");
  push("sigma_C");
  push("sigma_E");
  names.insert(names.end(), {"beta1", "beta2", "phi1", "phi2", "rho", "kappa"});
  return names;
}

// Block-id encoding: family * 256 + subtrial index.
namespace {
enum BlockFamily {
  kBlkTheta = 0,
  kBlkAlphaT = 1,
  kBlkAlphaE = 2,
  kBlkSigmaC = 3,
  kBlkSigmaE = 4,
  kBlkGroupT = 5,
  kBlkGroupE = 6,
  kBlkPhi1 = 7,
  kBlkPhi2 = 8,
  kBlkRho = 9,
  kBlkKappa = 10,
};
}  // namespace

std::string block_name(int block_id) {
  const int fam = block_id / 256, k = block_id % 256;
  switch (fam) {
    case kBlkTheta: return "theta[" + std::to_string(k + 1) + "]";
    case kBlkAlphaT: return "alpha_t[" + std::to_string(k + 1) + "]";
    case kBlkAlphaE: return "alpha_e[" + std::to_string(k + 1) + "]";
    case kBlkSigmaC: return "sigma_C[" + std::to_string(k + 1) + "]";
    case kBlkSigmaE: return "sigma_E[" + std::to_string(k + 1) + "]";
    case kBlkGroupT: return "group_t";
    case kBlkGroupE: return "group_e";
    case kBlkPhi1: return "phi1";
    case kBlkPhi2: return "phi2";
    case kBlkRho: return "rho";
    case kBlkKappa: return "kappa";
    default: throw ContractError("block_name: bad block id");
  }
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct SuffArm {
  int n = 0, y = 0;
  double lnC = 0.0;
  int m = 0;
  double S1 = 0.0, S2 = 0.0;  // sum z, sum z^2
};

// Scalar proposal with Robbins-Monro log-scale adaptation.
struct ScalarProposal {
  double ls = 0.0;  // log proposal SD
  int acc_w = 0, n_w = 0;  // current-window counters
  long acc_post = 0, n_post = 0;  // post-burn-in counters
};

// 2x2 covariance proposal: running moments feed a Cholesky refreshed at
// window boundaries; a scalar log-multiplier adapts on top.
struct BlockProposal {
  double ls = 0.0;
  double l11 = 0.4, l21 = 0.0, l22 = 0.4;
  long n = 0;
  double mean1 = 0.0, mean2 = 0.0;
  double m11 = 0.0, m12 = 0.0, m22 = 0.0;  // co-moment accumulators
  int acc_w = 0, n_w = 0;
  long acc_post = 0, n_post = 0;

  void observe(double x1, double x2) {
    ++n;
    const double d1 = x1 - mean1, d2 = x2 - mean2;
    mean1 += d1 / n;
    mean2 += d2 / n;
    m11 += d1 * (x1 - mean1);
    m22 += d2 * (x2 - mean2);
    m12 += d1 * (x2 - mean2);
  }

  void refresh_chol() {
    if (n < 10) return;
    constexpr double s2 = 2.38 * 2.38 / 2.0;  // optimal-scaling constant, d = 2
    const double c11 = s2 * (m11 / (n - 1) + 1e-6);
    const double c12 = s2 * (m12 / (n - 1));
    const double c22 = s2 * (m22 / (n - 1) + 1e-6);
    l11 = std::sqrt(c11);
    l21 = c12 / l11;
    const double rem = c22 - l21 * l21;
    l22 = std::sqrt(std::max(rem, 1e-12));
  }
};

class Sampler {
 public:
  Sampler(const TrialData& data, const ModelSpec& spec, const McmcConfig& cfg, int chain_id,
          std::uint64_t stream)
      : spec_(spec),
        cfg_(cfg),
        K_(data.K),
        chain_id_(chain_id),
        rng_(cfg.seed, substream_id(stream, static_cast<std::uint64_t>(chain_id))) {
    cfg.validate();
    data.validate();
    spec.validate(K_);
    build_suffstats(data);
    precompute_nex();
    init_state();
    init_caches();
    init_proposals();
  }

  ChainDraws run();

 private:
  const ModelSpec& spec_;
  const McmcConfig& cfg_;
  int K_;
  int chain_id_;
  RngStream rng_;

  SuffArm suff_[2][64];  // [arm][k]; K is small (paper uses 6)
  bool sigma_fixed_ = false;

  ParamState st_;

  // per-k NEX constants
  double m1_[64], m2_[64], s1_[64], s2_[64], ls1_[64], ls2_[64], is1_[64], is2_[64];

  // hyperparameter caches
  double lphi1_ = 0.0, lphi2_ = 0.0, iphi1_ = 1.0, iphi2_ = 1.0;
  double l1mr2_ = 0.0, i1mr2_ = 1.0, l1mk2_ = 0.0, i1mk2_ = 1.0;

  // likelihood caches
  double ll_bin_[2][64], ll_norm_[2][64], lnsig_[2][64];
  double comp_lp_[64];  // component log-density at current (Z_k, theta_k)

  // proposals
  BlockProposal theta_prop_[64];
  ScalarProposal alpha_t_prop_[64], alpha_e_prop_[64], sigma_prop_[2][64];
  ScalarProposal group_t_prop_, group_e_prop_;
  ScalarProposal phi1_prop_, phi2_prop_, rho_prop_, kappa_prop_;

  std::vector<ScaleEvent> scale_history_;

  bool theta_direct_[64];  // treatment arm empty: exact conditional draw
  bool multi_component_ = false;

  void build_suffstats(const TrialData& data) {
    if (K_ < 1 || K_ > 64) throw ConfigError("mcmc: K must lie in [1, 64]");
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < K_; ++k) {
        const ArmData& a = data.arms[j][k];
        SuffArm& s = suff_[j][k];
        s.n = a.n;
        s.y = a.tox_count;
        s.lnC = a.n > 0 ? log_choose(a.n, a.tox_count) : 0.0;
        s.m = static_cast<int>(a.eff.size());
        s.S1 = s.S2 = 0.0;
        for (double z : a.eff) {
          s.S1 += z;
          s.S2 += z * z;
        }
      }
    for (int k = 0; k < K_; ++k)
      theta_direct_[k] = suff_[kTreatment][k].n == 0 && suff_[kTreatment][k].m == 0;
  }

  void precompute_nex() {
    const PriorSpec& pr = spec_.priors;
    sigma_fixed_ = pr.fixed_sigma > 0.0;
    for (int k = 0; k < K_; ++k) {
      m1_[k] = pr.nex_mean_t[k];
      m2_[k] = pr.nex_mean_e[k];
      s1_[k] = pr.nex_sd_t[k];
      s2_[k] = pr.nex_sd_e[k];
      ls1_[k] = std::log(s1_[k]);
      ls2_[k] = std::log(s2_[k]);
      is1_[k] = 1.0 / s1_[k];
      is2_[k] = 1.0 / s2_[k];
    }
    // Indicator Gibbs only when some subtrial genuinely mixes components;
    // degenerate weight settings (e.g. BiEXNEX omega = 1) then consume the
    // same RNG stream as the kind they collapse to.
    multi_component_ = false;
    for (int k = 0; k < K_; ++k) {
      int active = 0;
      for (double lw : spec_.log_weights(k))
        if (lw != kNegInf) ++active;
      if (active == 0) throw ConfigError("model: subtrial has no active mixture component");
      if (active > 1) multi_component_ = true;
    }
  }

  void init_state() {
    st_ = ParamState::zeros(K_);
    const double hn75 = normal_quantile(0.75, 0.0, 1.0);
    const double sigma_med = std::sqrt(std::sqrt(spec_.priors.sigma_halfnormal_var) * hn75);
    const double phi_med = std::sqrt(std::sqrt(spec_.priors.phi_halfnormal_var) * hn75);
    for (int k = 0; k < K_; ++k) {
      const SuffArm& c = suff_[kControl][k];
      double p0 = 0.5;
      if (c.n > 0)
        p0 = (c.y > 0 && c.y < c.n) ? static_cast<double>(c.y) / c.n
                                    : (c.y + 0.5) / (c.n + 1.0);
      st_.alpha_t[k] = logit(p0) + 0.1 * rng_.next_normal();
      st_.alpha_e[k] = (c.m > 0 ? c.S1 / c.m : 0.0) + 0.1 * rng_.next_normal();
      st_.theta_t[k] = 0.0;
      st_.theta_e[k] = 0.0;
      for (int j = 0; j < 2; ++j)
        st_.sigma[j][k] = sigma_fixed_ ? spec_.priors.fixed_sigma : sigma_med;
    }
    st_.beta1 = st_.beta2 = 0.0;
    st_.phi1 = st_.phi2 = phi_med;
    st_.rho = st_.kappa = 0.0;
    // indicators from prior weights
    for (int k = 0; k < K_; ++k) {
      const auto lw = spec_.log_weights(k);
      double u = rng_.next_double(), acc = 0.0;
      int pick = -1;
      for (int c = 0; c < 4; ++c) {
        if (lw[c] == kNegInf) continue;
        acc += std::exp(lw[c]);
        if (pick < 0 && u < acc) pick = c;
      }
      if (pick < 0)  // u landed on the accumulated-rounding tail
        for (int c = 3; c >= 0; --c)
          if (lw[c] != kNegInf) {
            pick = c;
            break;
          }
      st_.Z[k] = pick;
    }
  }

  void refresh_phi_cache() {
    lphi1_ = std::log(st_.phi1);
    lphi2_ = std::log(st_.phi2);
    iphi1_ = 1.0 / st_.phi1;
    iphi2_ = 1.0 / st_.phi2;
  }
  void refresh_rho_cache() {
    l1mr2_ = std::log1p(-st_.rho * st_.rho);
    i1mr2_ = 1.0 / (1.0 - st_.rho * st_.rho);
  }
  void refresh_kappa_cache() {
    l1mk2_ = std::log1p(-st_.kappa * st_.kappa);
    i1mk2_ = 1.0 / (1.0 - st_.kappa * st_.kappa);
  }

  double comp_eval(int k, int c, double tt, double te) const {
    switch (c) {
      case kCompExEx: {
        const double z1 = (tt - st_.beta1) * iphi1_;
        const double z2 = (te - st_.beta2) * iphi2_;
        const double q = i1mr2_ * (z1 * z1 - 2.0 * st_.rho * z1 * z2 + z2 * z2);
        return -kLn2Pi - lphi1_ - lphi2_ - 0.5 * l1mr2_ - 0.5 * q;
      }
      case kCompExNex: {
        const double z1 = (tt - st_.beta1) * iphi1_;
        const double z2 = (te - m2_[k]) * is2_[k];
        return -kLn2Pi - lphi1_ - ls2_[k] - 0.5 * (z1 * z1 + z2 * z2);
      }
      case kCompNexEx: {
        const double z1 = (tt - m1_[k]) * is1_[k];
        const double z2 = (te - st_.beta2) * iphi2_;
        return -kLn2Pi - ls1_[k] - lphi2_ - 0.5 * (z1 * z1 + z2 * z2);
      }
      default: {
        const double z1 = (tt - m1_[k]) * is1_[k];
        const double z2 = (te - m2_[k]) * is2_[k];
        const double q = i1mk2_ * (z1 * z1 - 2.0 * st_.kappa * z1 * z2 + z2 * z2);
        return -kLn2Pi - ls1_[k] - ls2_[k] - 0.5 * l1mk2_ - 0.5 * q;
      }
    }
  }

  double bin_eval(int j, int k, double a) const {
    const SuffArm& s = suff_[j][k];
    if (s.n == 0) return 0.0;
    return s.lnC + s.y * a - s.n * softplus(a);
  }

  double norm_eval(int j, int k, double mu, double lnsig, double sig) const {
    const SuffArm& s = suff_[j][k];
    if (s.m == 0) return 0.0;
    const double q = s.S2 - 2.0 * mu * s.S1 + s.m * mu * mu;
    return -s.m * lnsig - 0.5 * s.m * kLn2Pi - 0.5 * q / (sig * sig);
  }

  double arm_mu(int j, int k) const {
    return st_.alpha_e[k] + (j == kTreatment ? st_.theta_e[k] : 0.0);
  }
  double arm_a(int j, int k) const {
    return st_.alpha_t[k] + (j == kTreatment ? st_.theta_t[k] : 0.0);
  }

  void init_caches() {
    refresh_phi_cache();
    refresh_rho_cache();
    refresh_kappa_cache();
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < K_; ++k) {
        lnsig_[j][k] = std::log(st_.sigma[j][k]);
        ll_bin_[j][k] = bin_eval(j, k, arm_a(j, k));
        ll_norm_[j][k] = norm_eval(j, k, arm_mu(j, k), lnsig_[j][k], st_.sigma[j][k]);
      }
    for (int k = 0; k < K_; ++k)
      comp_lp_[k] = comp_eval(k, st_.Z[k], st_.theta_t[k], st_.theta_e[k]);

    double lp = 0.0;
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < K_; ++k) lp += ll_bin_[j][k] + ll_norm_[j][k];
    for (int k = 0; k < K_; ++k) lp += comp_lp_[k];
    if (!std::isfinite(lp))
      throw NumericError("mcmc chain " + std::to_string(chain_id_) +
                         ": non-finite log-posterior at initial state");
  }

  void init_proposals() {
    for (int k = 0; k < K_; ++k) {
      alpha_t_prop_[k].ls = std::log(0.5);
      alpha_e_prop_[k].ls = std::log(0.5);
      sigma_prop_[0][k].ls = std::log(0.4);
      sigma_prop_[1][k].ls = std::log(0.4);
      theta_prop_[k].ls = 0.0;
    }
    phi1_prop_.ls = std::log(0.5);
    phi2_prop_.ls = std::log(0.5);
    rho_prop_.ls = std::log(0.5);
    kappa_prop_.ls = std::log(0.5);
    group_t_prop_.ls = std::log(2.0);
    group_e_prop_.ls = std::log(2.0);
  }

  bool mh_accept(double log_ratio) {
    if (log_ratio >= 0.0) return true;
    return std::log(rng_.next_uniform(0.0, 1.0)) < log_ratio;
  }

  // --- sweep blocks -------------------------------------------------------

  void update_indicators() {
    if (!multi_component_) return;
    if (spec_.scheme == IndicatorScheme::factored2x2) {
      update_indicators_factored();
      return;
    }
    for (int k = 0; k < K_; ++k) {
      const auto lw = spec_.log_weights(k);
      double lp[4], mx = kNegInf;
      for (int c = 0; c < 4; ++c) {
        lp[c] = (lw[c] == kNegInf)
                    ? kNegInf
                    : lw[c] + comp_eval(k, c, st_.theta_t[k], st_.theta_e[k]);
        if (lp[c] > mx) mx = lp[c];
      }
      double tot = 0.0, cum[4];
      for (int c = 0; c < 4; ++c) {
        tot += (lp[c] == kNegInf) ? 0.0 : std::exp(lp[c] - mx);
        cum[c] = tot;
      }
      const double u = rng_.next_double() * tot;
      int pick = 3;
      for (int c = 0; c < 4; ++c)
        if (u < cum[c]) {
          pick = c;
          break;
        }
      st_.Z[k] = pick;
      comp_lp_[k] = lp[pick] - lw[pick];
    }
  }

  void update_indicators_factored() {
    // Appendix-A scheme: Z_tk | Z_ek then Z_ek | Z_tk, product weights.
    for (int k = 0; k < K_; ++k) {
      const double tt = st_.theta_t[k], te = st_.theta_e[k];
      const double lwt = std::log(spec_.omega_t[k]), lwt0 = std::log(1.0 - spec_.omega_t[k]);
      const double lwe = std::log(spec_.omega_e[k]), lwe0 = std::log(1.0 - spec_.omega_e[k]);
      bool tox_ex = st_.Z[k] == kCompExEx || st_.Z[k] == kCompExNex;
      bool eff_ex = st_.Z[k] == kCompExEx || st_.Z[k] == kCompNexEx;

      auto comp_of = [](bool t_ex, bool e_ex) {
        return t_ex ? (e_ex ? kCompExEx : kCompExNex) : (e_ex ? kCompNexEx : kCompNexNex);
      };
      {  // toxicity indicator given efficacy indicator
        const double a = lwt + comp_eval(k, comp_of(true, eff_ex), tt, te);
        const double b = lwt0 + comp_eval(k, comp_of(false, eff_ex), tt, te);
        const double mx = std::max(a, b);
        const double p_ex = std::exp(a - mx) / (std::exp(a - mx) + std::exp(b - mx));
        tox_ex = rng_.next_double() < p_ex;
      }
      {  // efficacy indicator given the fresh toxicity indicator
        const double a = lwe + comp_eval(k, comp_of(tox_ex, true), tt, te);
        const double b = lwe0 + comp_eval(k, comp_of(tox_ex, false), tt, te);
        const double mx = std::max(a, b);
        const double p_ex = std::exp(a - mx) / (std::exp(a - mx) + std::exp(b - mx));
        eff_ex = rng_.next_double() < p_ex;
      }
      st_.Z[k] = comp_of(tox_ex, eff_ex);
      comp_lp_[k] = comp_eval(k, st_.Z[k], tt, te);
    }
  }

  void draw_component_pair(int k, int c, double& tt, double& te) {
    double a1, a2, b1, b2, r;
    switch (c) {
      case kCompExEx: a1 = st_.beta1; a2 = st_.beta2; b1 = st_.phi1; b2 = st_.phi2; r = st_.rho; break;
      case kCompExNex: a1 = st_.beta1; a2 = m2_[k]; b1 = st_.phi1; b2 = s2_[k]; r = 0.0; break;
      case kCompNexEx: a1 = m1_[k]; a2 = st_.beta2; b1 = s1_[k]; b2 = st_.phi2; r = 0.0; break;
      default: a1 = m1_[k]; a2 = m2_[k]; b1 = s1_[k]; b2 = s2_[k]; r = st_.kappa; break;
    }
    const double u1 = rng_.next_normal(), u2 = rng_.next_normal();
    tt = a1 + b1 * u1;
    te = a2 + b2 * (r * u1 + std::sqrt(1.0 - r * r) * u2);
  }

  void update_theta(bool adapting) {
    for (int k = 0; k < K_; ++k) {
      if (theta_direct_[k]) {
        // no treatment-arm data: the full conditional is the component law
        double tt, te;
        draw_component_pair(k, st_.Z[k], tt, te);
        st_.theta_t[k] = tt;
        st_.theta_e[k] = te;
        comp_lp_[k] = comp_eval(k, st_.Z[k], tt, te);
        continue;
      }
      BlockProposal& pr = theta_prop_[k];
      const double s = std::exp(pr.ls);
      const double u1 = rng_.next_normal(), u2 = rng_.next_normal();
      const double tt = st_.theta_t[k] + s * pr.l11 * u1;
      const double te = st_.theta_e[k] + s * (pr.l21 * u1 + pr.l22 * u2);
      const double a_new = st_.alpha_t[k] + tt;
      const double mu_new = st_.alpha_e[k] + te;
      const double bin_new = bin_eval(kTreatment, k, a_new);
      const double norm_new =
          norm_eval(kTreatment, k, mu_new, lnsig_[kTreatment][k], st_.sigma[kTreatment][k]);
      const double comp_new = comp_eval(k, st_.Z[k], tt, te);
      const double delta = bin_new + norm_new + comp_new - ll_bin_[kTreatment][k] -
                           ll_norm_[kTreatment][k] - comp_lp_[k];
      ++pr.n_w;
      if (!adapting) ++pr.n_post;
      if (mh_accept(delta)) {
        st_.theta_t[k] = tt;
        st_.theta_e[k] = te;
        ll_bin_[kTreatment][k] = bin_new;
        ll_norm_[kTreatment][k] = norm_new;
        comp_lp_[k] = comp_new;
        ++pr.acc_w;
        if (!adapting) ++pr.acc_post;
      }
      if (adapting) pr.observe(st_.theta_t[k], st_.theta_e[k]);
    }
  }

  void update_alpha(bool adapting) {
    const double isd2 = 1.0 / (spec_.priors.alpha_sd * spec_.priors.alpha_sd);
    for (int k = 0; k < K_; ++k) {
      {
        ScalarProposal& pr = alpha_t_prop_[k];
        const double cur = st_.alpha_t[k];
        const double prop = cur + std::exp(pr.ls) * rng_.next_normal();
        const double binC = bin_eval(kControl, k, prop);
        const double binE = bin_eval(kTreatment, k, prop + st_.theta_t[k]);
        const double delta = binC + binE - ll_bin_[kControl][k] - ll_bin_[kTreatment][k] -
                             0.5 * (prop * prop - cur * cur) * isd2;
        ++pr.n_w;
        if (!adapting) ++pr.n_post;
        if (mh_accept(delta)) {
          st_.alpha_t[k] = prop;
          ll_bin_[kControl][k] = binC;
          ll_bin_[kTreatment][k] = binE;
          ++pr.acc_w;
          if (!adapting) ++pr.acc_post;
        }
      }
      {
        ScalarProposal& pr = alpha_e_prop_[k];
        const double cur = st_.alpha_e[k];
        const double prop = cur + std::exp(pr.ls) * rng_.next_normal();
        const double nC = norm_eval(kControl, k, prop, lnsig_[kControl][k], st_.sigma[kControl][k]);
        const double nE = norm_eval(kTreatment, k, prop + st_.theta_e[k], lnsig_[kTreatment][k],
                                    st_.sigma[kTreatment][k]);
        const double delta = nC + nE - ll_norm_[kControl][k] - ll_norm_[kTreatment][k] -
                             0.5 * (prop * prop - cur * cur) * isd2;
        ++pr.n_w;
        if (!adapting) ++pr.n_post;
        if (mh_accept(delta)) {
          st_.alpha_e[k] = prop;
          ll_norm_[kControl][k] = nC;
          ll_norm_[kTreatment][k] = nE;
          ++pr.acc_w;
          if (!adapting) ++pr.acc_post;
        }
      }
    }
  }

  void update_sigma(bool adapting) {
    if (sigma_fixed_) return;
    const double hn_var = spec_.priors.sigma_halfnormal_var;
    const double scale_v = std::sqrt(hn_var);
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < K_; ++k) {
        if (suff_[j][k].m == 0) {
          // conditional reduces to the prior: sigma^2 ~ Half-N(var), exact draw
          const double v = scale_v * std::fabs(rng_.next_normal());
          st_.sigma[j][k] = std::sqrt(v);
          lnsig_[j][k] = std::log(st_.sigma[j][k]);
          continue;
        }
        ScalarProposal& pr = sigma_prop_[j][k];
        const double x = lnsig_[j][k];
        const double xn = x + std::exp(pr.ls) * rng_.next_normal();
        const double sn = std::exp(xn);
        const double mu = arm_mu(j, k);
        const double ll_new = norm_eval(j, k, mu, xn, sn);
        // prior + jacobian on the ln-sigma scale:
        //   ln p(x) = lnHN(e^{2x}; var) + ln 2 + 2x  (constants dropped)
        const double pri_new = -0.5 * (sn * sn) * (sn * sn) / hn_var + 2.0 * xn;
        const double s = st_.sigma[j][k];
        const double pri_old = -0.5 * (s * s) * (s * s) / hn_var + 2.0 * x;
        const double delta = ll_new + pri_new - ll_norm_[j][k] - pri_old;
        ++pr.n_w;
        if (!adapting) ++pr.n_post;
        if (mh_accept(delta)) {
          st_.sigma[j][k] = sn;
          lnsig_[j][k] = xn;
          ll_norm_[j][k] = ll_new;
          ++pr.acc_w;
          if (!adapting) ++pr.acc_post;
        }
      }
  }

  // which subtrials currently attach to beta1/phi1 (toxicity-EX components)
  // and beta2/phi2 (efficacy-EX components)
  bool any_z(int c1, int c2) const {
    for (int k = 0; k < K_; ++k)
      if (st_.Z[k] == c1 || st_.Z[k] == c2) return true;
    return false;
  }

  void recompute_comp_all() {
    for (int k = 0; k < K_; ++k)
      comp_lp_[k] = comp_eval(k, st_.Z[k], st_.theta_t[k], st_.theta_e[k]);
  }

  // (beta1, beta2) is linear-Gaussian given theta, Z and the scales, so the
  // block draw is exact conjugate Gibbs. Two translation moves follow,
  // shifting beta together with its attached theta coordinates; on sparse
  // data the centred pair (beta, theta) is nearly collinear and plain
  // component-wise updates mix at O(1/(1 - corr^2)) sweeps without them.
  void update_beta(bool adapting) {
    const double bprec = 1.0 / (spec_.priors.beta_sd * spec_.priors.beta_sd);
    double p11 = bprec, p12 = 0.0, p22 = bprec, b1 = 0.0, b2 = 0.0;
    for (int k = 0; k < K_; ++k) {
      const double tt = st_.theta_t[k], te = st_.theta_e[k];
      switch (st_.Z[k]) {
        case kCompExEx: {
          // Sigma0^{-1} for [[phi1^2, r p1 p2], [r p1 p2, phi2^2]]
          const double a = i1mr2_ * iphi1_ * iphi1_;
          const double d = i1mr2_ * iphi2_ * iphi2_;
          const double o = -st_.rho * i1mr2_ * iphi1_ * iphi2_;
          p11 += a;
          p22 += d;
          p12 += o;
          b1 += a * tt + o * te;
          b2 += d * te + o * tt;
          break;
        }
        case kCompExNex:
          p11 += iphi1_ * iphi1_;
          b1 += tt * iphi1_ * iphi1_;
          break;
        case kCompNexEx:
          p22 += iphi2_ * iphi2_;
          b2 += te * iphi2_ * iphi2_;
          break;
        default:
          break;
      }
    }
    // mean = P^{-1} b, draw via Cholesky of the covariance P^{-1}
    const double det = p11 * p22 - p12 * p12;
    const double c11 = p22 / det, c12 = -p12 / det, c22 = p11 / det;
    const double m1 = c11 * b1 + c12 * b2, m2 = c12 * b1 + c22 * b2;
    const double l11 = std::sqrt(c11), l21 = c12 / l11;
    const double l22 = std::sqrt(std::max(c22 - l21 * l21, 0.0));
    const double u1 = rng_.next_normal(), u2 = rng_.next_normal();
    st_.beta1 = m1 + l11 * u1;
    st_.beta2 = m2 + l21 * u1 + l22 * u2;
    for (int k = 0; k < K_; ++k)
      if (st_.Z[k] != kCompNexNex)
        comp_lp_[k] = comp_eval(k, st_.Z[k], st_.theta_t[k], st_.theta_e[k]);

    group_move(true, adapting);
    group_move(false, adapting);
  }

  // Translation of (beta, attached thetas) by one scalar. Component densities
  // are shift-invariant in the moved coordinates, so the ratio is the beta
  // prior times the attached treatment-arm likelihood terms.
  void group_move(bool toxicity, bool adapting) {
    bool attached = false;
    for (int k = 0; k < K_; ++k) {
      const int z = st_.Z[k];
      if (toxicity ? (z == kCompExEx || z == kCompExNex) : (z == kCompExEx || z == kCompNexEx)) {
        attached = true;
        break;
      }
    }
    if (!attached) return;  // conjugate draw above already hit the prior exactly
    ScalarProposal& pr = toxicity ? group_t_prop_ : group_e_prop_;
    const double shift = std::exp(pr.ls) * rng_.next_normal();
    const double bsd = spec_.priors.beta_sd;
    const double cur = toxicity ? st_.beta1 : st_.beta2;
    const double prop = cur + shift;
    double delta = -0.5 * (prop * prop - cur * cur) / (bsd * bsd);
    double lik_new[64];
    for (int k = 0; k < K_; ++k) {
      lik_new[k] = 0.0;
      const int z = st_.Z[k];
      const bool moved =
          toxicity ? (z == kCompExEx || z == kCompExNex) : (z == kCompExEx || z == kCompNexEx);
      if (!moved || theta_direct_[k]) continue;
      if (toxicity) {
        lik_new[k] = bin_eval(kTreatment, k, st_.alpha_t[k] + st_.theta_t[k] + shift);
        delta += lik_new[k] - ll_bin_[kTreatment][k];
      } else {
        lik_new[k] = norm_eval(kTreatment, k, st_.alpha_e[k] + st_.theta_e[k] + shift,
                               lnsig_[kTreatment][k], st_.sigma[kTreatment][k]);
        delta += lik_new[k] - ll_norm_[kTreatment][k];
      }
    }
    ++pr.n_w;
    if (!adapting) ++pr.n_post;
    if (mh_accept(delta)) {
      ++pr.acc_w;
      if (!adapting) ++pr.acc_post;
      if (toxicity)
        st_.beta1 = prop;
      else
        st_.beta2 = prop;
      for (int k = 0; k < K_; ++k) {
        const int z = st_.Z[k];
        const bool moved =
            toxicity ? (z == kCompExEx || z == kCompExNex) : (z == kCompExEx || z == kCompNexEx);
        if (!moved) continue;
        if (toxicity)
          st_.theta_t[k] += shift;
        else
          st_.theta_e[k] += shift;
        if (!theta_direct_[k]) {
          if (toxicity)
            ll_bin_[kTreatment][k] = lik_new[k];
          else
            ll_norm_[kTreatment][k] = lik_new[k];
        }
      }
    }
  }

  void update_phi(bool adapting) {
    const double hn_var = spec_.priors.phi_halfnormal_var;
    const double scale_v = std::sqrt(hn_var);
    for (int which = 0; which < 2; ++which) {
      const bool attached =
          which == 0 ? any_z(kCompExEx, kCompExNex) : any_z(kCompExEx, kCompNexEx);
      double& phi = which == 0 ? st_.phi1 : st_.phi2;
      ScalarProposal& pr = which == 0 ? phi1_prop_ : phi2_prop_;
      if (!attached) {
        phi = std::sqrt(scale_v * std::fabs(rng_.next_normal()));
        refresh_phi_cache();
        continue;
      }
      const double old = phi;
      const double x = std::log(old);
      const double xn = x + std::exp(pr.ls) * rng_.next_normal();
      const double pn = std::exp(xn);
      double delta =
          -0.5 * ((pn * pn) * (pn * pn) - (old * old) * (old * old)) / hn_var + 2.0 * (xn - x);
      phi = pn;
      refresh_phi_cache();
      double comp_new[64];
      for (int k = 0; k < K_; ++k) {
        const bool touched = which == 0 ? (st_.Z[k] == kCompExEx || st_.Z[k] == kCompExNex)
                                        : (st_.Z[k] == kCompExEx || st_.Z[k] == kCompNexEx);
        if (!touched) {
          comp_new[k] = comp_lp_[k];
          continue;
        }
        comp_new[k] = comp_eval(k, st_.Z[k], st_.theta_t[k], st_.theta_e[k]);
        delta += comp_new[k] - comp_lp_[k];
      }
      ++pr.n_w;
      if (!adapting) ++pr.n_post;
      if (mh_accept(delta)) {
        for (int k = 0; k < K_; ++k) comp_lp_[k] = comp_new[k];
        ++pr.acc_w;
        if (!adapting) ++pr.acc_post;
      } else {
        phi = old;
        refresh_phi_cache();
      }
    }
  }

  void update_corr(bool adapting) {
    // rho: attached through component 0 only
    if (!spec_.rho_fixed_zero()) {
      const bool attached = any_z(kCompExEx, kCompExEx);
      if (!attached) {
        st_.rho = rng_.next_uniform(-1.0, 1.0);
        refresh_rho_cache();
      } else {
        ScalarProposal& pr = rho_prop_;
        const double old = st_.rho;
        const double z = std::atanh(old);
        const double zn = z + std::exp(pr.ls) * rng_.next_normal();
        const double rn = std::tanh(zn);
        // flat prior on rho; Fisher-z jacobian contributes ln(1 - rho^2)
        double delta = std::log1p(-rn * rn) - std::log1p(-old * old);
        st_.rho = rn;
        refresh_rho_cache();
        double comp_new[64];
        for (int k = 0; k < K_; ++k) {
          if (st_.Z[k] != kCompExEx) {
            comp_new[k] = comp_lp_[k];
            continue;
          }
          comp_new[k] = comp_eval(k, st_.Z[k], st_.theta_t[k], st_.theta_e[k]);
          delta += comp_new[k] - comp_lp_[k];
        }
        ++pr.n_w;
        if (!adapting) ++pr.n_post;
        if (mh_accept(delta)) {
          for (int k = 0; k < K_; ++k) comp_lp_[k] = comp_new[k];
          ++pr.acc_w;
          if (!adapting) ++pr.acc_post;
        } else {
          st_.rho = old;
          refresh_rho_cache();
        }
      }
    }
    // kappa: attached through component 3 only
    if (!spec_.kappa_fixed_zero()) {
      const bool attached = any_z(kCompNexNex, kCompNexNex);
      if (!attached) {
        st_.kappa = rng_.next_uniform(-1.0, 1.0);
        refresh_kappa_cache();
      } else {
        ScalarProposal& pr = kappa_prop_;
        const double old = st_.kappa;
        const double z = std::atanh(old);
        const double zn = z + std::exp(pr.ls) * rng_.next_normal();
        const double rn = std::tanh(zn);
        double delta = std::log1p(-rn * rn) - std::log1p(-old * old);
        st_.kappa = rn;
        refresh_kappa_cache();
        double comp_new[64];
        for (int k = 0; k < K_; ++k) {
          if (st_.Z[k] != kCompNexNex) {
            comp_new[k] = comp_lp_[k];
            continue;
          }
          comp_new[k] = comp_eval(k, st_.Z[k], st_.theta_t[k], st_.theta_e[k]);
          delta += comp_new[k] - comp_lp_[k];
        }
        ++pr.n_w;
        if (!adapting) ++pr.n_post;
        if (mh_accept(delta)) {
          for (int k = 0; k < K_; ++k) comp_lp_[k] = comp_new[k];
          ++pr.acc_w;
          if (!adapting) ++pr.acc_post;
        } else {
          st_.kappa = old;
          refresh_kappa_cache();
        }
      }
    }
  }

  // --- adaptation ---------------------------------------------------------

  void adapt_scalar(ScalarProposal& pr, double target, double step, int sweep, int block_id) {
    if (pr.n_w == 0) return;
    const double rate = static_cast<double>(pr.acc_w) / pr.n_w;
    pr.ls += step * (rate - target);
    pr.acc_w = pr.n_w = 0;
    scale_history_.push_back({sweep, block_id, pr.ls});
  }

  void adapt_block(BlockProposal& pr, double target, double step, int sweep, int block_id) {
    pr.refresh_chol();
    if (pr.n_w > 0) {
      const double rate = static_cast<double>(pr.acc_w) / pr.n_w;
      pr.ls += step * (rate - target);
      pr.acc_w = pr.n_w = 0;
    }
    scale_history_.push_back({sweep, block_id, pr.ls});
  }

  void adapt(int sweep) {
    const int batch = sweep / cfg_.adapt_window;
    const double step = std::min(0.5, 4.0 / std::sqrt(static_cast<double>(batch)));
    const double ts = cfg_.target_accept_scalar, tb = cfg_.target_accept_block;
    for (int k = 0; k < K_; ++k) {
      if (!theta_direct_[k]) adapt_block(theta_prop_[k], tb, step, sweep, kBlkTheta * 256 + k);
      adapt_scalar(alpha_t_prop_[k], ts, step, sweep, kBlkAlphaT * 256 + k);
      adapt_scalar(alpha_e_prop_[k], ts, step, sweep, kBlkAlphaE * 256 + k);
      if (!sigma_fixed_) {
        if (suff_[0][k].m > 0) adapt_scalar(sigma_prop_[0][k], ts, step, sweep, kBlkSigmaC * 256 + k);
        if (suff_[1][k].m > 0) adapt_scalar(sigma_prop_[1][k], ts, step, sweep, kBlkSigmaE * 256 + k);
      }
    }
    adapt_scalar(group_t_prop_, ts, step, sweep, kBlkGroupT * 256);
    adapt_scalar(group_e_prop_, ts, step, sweep, kBlkGroupE * 256);
    adapt_scalar(phi1_prop_, ts, step, sweep, kBlkPhi1 * 256);
    adapt_scalar(phi2_prop_, ts, step, sweep, kBlkPhi2 * 256);
    if (!spec_.rho_fixed_zero()) adapt_scalar(rho_prop_, ts, step, sweep, kBlkRho * 256);
    if (!spec_.kappa_fixed_zero()) adapt_scalar(kappa_prop_, ts, step, sweep, kBlkKappa * 256);
  }

  void sweep(bool adapting) {
    update_indicators();
    update_theta(adapting);
    update_alpha(adapting);
    update_sigma(adapting);
    update_beta(adapting);
    update_phi(adapting);
    update_corr(adapting);
  }
};

ChainDraws Sampler::run() {
  ChainDraws out;
  out.K = K_;
  out.n_coords = 6 * K_ + 6;
  out.n_kept = cfg_.iterations / cfg_.thin;
  out.draws.reserve(static_cast<std::size_t>(out.n_kept) * out.n_coords);
  out.z.reserve(static_cast<std::size_t>(out.n_kept) * K_);

  for (int s = 1; s <= cfg_.burn_in; ++s) {
    sweep(true);
    if (s % cfg_.adapt_window == 0) adapt(s);
  }
  for (int s = 1; s <= cfg_.iterations; ++s) {
    sweep(false);
    if (s % cfg_.thin != 0) continue;
    for (int k = 0; k < K_; ++k) out.draws.push_back(st_.alpha_t[k]);
    for (int k = 0; k < K_; ++k) out.draws.push_back(st_.alpha_e[k]);
    for (int k = 0; k < K_; ++k) out.draws.push_back(st_.theta_t[k]);
    for (int k = 0; k < K_; ++k) out.draws.push_back(st_.theta_e[k]);
    for (int k = 0; k < K_; ++k) out.draws.push_back(st_.sigma[kControl][k]);
    for (int k = 0; k < K_; ++k) out.draws.push_back(st_.sigma[kTreatment][k]);
    out.draws.insert(out.draws.end(),
                     {st_.beta1, st_.beta2, st_.phi1, st_.phi2, st_.rho, st_.kappa});
    for (int k = 0; k < K_; ++k) out.z.push_back(static_cast<signed char>(st_.Z[k]));
  }

  auto rate = [](long a, long n) { return n > 0 ? static_cast<double>(a) / n : 0.0; };
  long a_th = 0, n_th = 0, a_at = 0, n_at = 0, a_ae = 0, n_ae = 0, a_sg = 0, n_sg = 0;
  for (int k = 0; k < K_; ++k) {
    a_th += theta_prop_[k].acc_post;
    n_th += theta_prop_[k].n_post;
    a_at += alpha_t_prop_[k].acc_post;
    n_at += alpha_t_prop_[k].n_post;
    a_ae += alpha_e_prop_[k].acc_post;
    n_ae += alpha_e_prop_[k].n_post;
    for (int j = 0; j < 2; ++j) {
      a_sg += sigma_prop_[j][k].acc_post;
      n_sg += sigma_prop_[j][k].n_post;
    }
  }
  out.accept_rates["theta"] = rate(a_th, n_th);
  out.accept_rates["alpha_t"] = rate(a_at, n_at);
  out.accept_rates["alpha_e"] = rate(a_ae, n_ae);
  out.accept_rates["sigma"] = rate(a_sg, n_sg);
  out.accept_rates["group_t"] = rate(group_t_prop_.acc_post, group_t_prop_.n_post);
  out.accept_rates["group_e"] = rate(group_e_prop_.acc_post, group_e_prop_.n_post);
  out.accept_rates["phi1"] = rate(phi1_prop_.acc_post, phi1_prop_.n_post);
  out.accept_rates["phi2"] = rate(phi2_prop_.acc_post, phi2_prop_.n_post);
  out.accept_rates["rho"] = rate(rho_prop_.acc_post, rho_prop_.n_post);
  out.accept_rates["kappa"] = rate(kappa_prop_.acc_post, kappa_prop_.n_post);
  out.scale_history = std::move(scale_history_);
  return out;
}

}  // namespace

ChainDraws run_chain(const TrialData& data, const ModelSpec& spec, const McmcConfig& cfg,
                     int chain_id, std::uint64_t stream) {
  Sampler s(data, spec, cfg, chain_id, stream);
  return s.run();
}

PosteriorDraws run_posterior(const TrialData& data, const ModelSpec& spec, const McmcConfig& cfg,
                             std::uint64_t stream) {
  cfg.validate();
  PosteriorDraws out;
  out.K = data.K;
  out.coord_names = coordinate_names(data.K);
  out.chains.reserve(cfg.chains);
  for (int c = 0; c < cfg.chains; ++c) out.chains.push_back(run_chain(data, spec, cfg, c, stream));
  return out;
}

int PosteriorDraws::n_total() const {
  int n = 0;
  for (const auto& c : chains) n += c.n_kept;
  return n;
}

int PosteriorDraws::coord_index(const std::string& coord) const {
  for (std::size_t i = 0; i < coord_names.size(); ++i)
    if (coord_names[i] == coord) return static_cast<int>(i);
  throw ContractError("unknown coordinate '" + coord + "'");
}

std::vector<double> PosteriorDraws::pooled(int coord) const {
  std::vector<double> out;
  out.reserve(n_total());
  for (const auto& c : chains)
    for (int it = 0; it < c.n_kept; ++it) out.push_back(c.value(it, coord));
  return out;
}

}  // namespace bxn
