#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#include "bxn/errors.hpp"
#include "bxn/mcmc.hpp"

namespace bxn {

double quantile_type7(std::vector<double> x, double p) {
  if (x.empty()) throw ContractError("quantile_type7: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw ContractError("quantile_type7: p outside [0,1]");
  std::sort(x.begin(), x.end());
  const double h = (static_cast<double>(x.size()) - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= x.size()) return x.back();
  const double frac = h - static_cast<double>(lo);
  return x[lo] + frac * (x[lo + 1] - x[lo]);
}

SummaryStats posterior_summary(const PosteriorDraws& draws, const std::string& coord) {
  const int idx = draws.coord_index(coord);
  std::vector<double> x = draws.pooled(idx);
  if (x.empty()) throw ContractError("posterior_summary: no draws");
  SummaryStats s{};
  s.median = quantile_type7(x, 0.5);
  s.q025 = quantile_type7(x, 0.025);
  s.q975 = quantile_type7(x, 0.975);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  s.mean = mean;
  s.sd = x.size() > 1 ? std::sqrt(ss / (static_cast<double>(x.size()) - 1.0)) : 0.0;
  return s;
}

namespace {

// split each chain's kept sequence in half -> sequences for R-hat/ESS
std::vector<std::vector<double>> split_sequences(const PosteriorDraws& d, int coord) {
  std::vector<std::vector<double>> seqs;
  for (const auto& c : d.chains) {
    const int half = c.n_kept / 2;
    if (half < 2) continue;
    std::vector<double> a(half), b(half);
    for (int i = 0; i < half; ++i) {
      a[i] = c.value(i, coord);
      b[i] = c.value(c.n_kept - half + i, coord);
    }
    seqs.push_back(std::move(a));
    seqs.push_back(std::move(b));
  }
  return seqs;
}

struct RhatEss {
  double rhat = 1.0, ess = 0.0;
  bool degenerate = false;
};

double seq_mean(const std::vector<double>& s) {
  double m = 0.0;
  for (double v : s) m += v;
  return m / static_cast<double>(s.size());
}

// lag-t autocovariance (biased normalisation, as in standard ESS estimators)
double autocov(const std::vector<double>& s, double mean, int t) {
  const int n = static_cast<int>(s.size());
  double acc = 0.0;
  for (int i = 0; i + t < n; ++i) acc += (s[i] - mean) * (s[i + t] - mean);
  return acc / static_cast<double>(n);
}

RhatEss rhat_ess(const std::vector<std::vector<double>>& seqs) {
  RhatEss out;
  const int m = static_cast<int>(seqs.size());
  if (m < 2) {
    out.degenerate = true;
    return out;
  }
  const int n = static_cast<int>(seqs[0].size());
  std::vector<double> means(m), vars(m);
  for (int i = 0; i < m; ++i) {
    const auto [lo, hi] = std::minmax_element(seqs[i].begin(), seqs[i].end());
    if (*lo == *hi) {  // exactly constant: summation noise must not fake variance
      means[i] = *lo;
      vars[i] = 0.0;
      continue;
    }
    means[i] = seq_mean(seqs[i]);
    double ss = 0.0;
    for (double v : seqs[i]) ss += (v - means[i]) * (v - means[i]);
    vars[i] = ss / (n - 1.0);
  }
  const double grand = seq_mean(means);
  double b = 0.0;
  for (double mu : means) b += (mu - grand) * (mu - grand);
  b *= n / (m - 1.0);
  double w = 0.0;
  for (double v : vars) w += v;
  w /= m;
  if (!(w > 0.0)) {
    out.degenerate = true;
    out.rhat = 1.0;
    out.ess = 0.0;
    return out;
  }
  const double varplus = (n - 1.0) / n * w + b / n;
  out.rhat = std::sqrt(varplus / w);

  // Geyer initial-monotone-sequence ESS on the combined chains
  double tau = 1.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (int t = 1; t + 1 < n; t += 2) {
    double ac_t = 0.0, ac_t1 = 0.0;
    for (int i = 0; i < m; ++i) {
      ac_t += autocov(seqs[i], means[i], t);
      ac_t1 += autocov(seqs[i], means[i], t + 1);
    }
    ac_t /= m;
    ac_t1 /= m;
    const double rho_t = 1.0 - (w - ac_t) / varplus;
    const double rho_t1 = 1.0 - (w - ac_t1) / varplus;
    double pair = rho_t + rho_t1;
    if (pair <= 0.0) break;
    if (pair > prev_pair) pair = prev_pair;  // enforce monotone decrease
    prev_pair = pair;
    tau += 2.0 * pair;
  }
  out.ess = std::min(static_cast<double>(m) * n / std::max(tau, 1e-12),
                     static_cast<double>(m) * n);
  return out;
}

}  // namespace

std::vector<CoordDiagnostic> diagnostics(const PosteriorDraws& draws) {
  std::vector<CoordDiagnostic> out;
  out.reserve(draws.coord_names.size());
  for (std::size_t c = 0; c < draws.coord_names.size(); ++c) {
    const auto seqs = split_sequences(draws, static_cast<int>(c));
    const RhatEss re = rhat_ess(seqs);
    out.push_back({draws.coord_names[c], re.rhat, re.ess, re.degenerate});
  }
  return out;
}

double max_split_rhat(const PosteriorDraws& draws) {
  double mx = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t c = 0; c < draws.coord_names.size(); ++c) {
    const auto seqs = split_sequences(draws, static_cast<int>(c));
    if (seqs.size() < 2) continue;
    const int m = static_cast<int>(seqs.size());
    const int n = static_cast<int>(seqs[0].size());
    std::vector<double> means(m), vars(m);
    for (int i = 0; i < m; ++i) {
      const auto [lo, hi] = std::minmax_element(seqs[i].begin(), seqs[i].end());
      if (*lo == *hi) {
        means[i] = *lo;
        vars[i] = 0.0;
        continue;
      }
      means[i] = seq_mean(seqs[i]);
      double ss = 0.0;
      for (double v : seqs[i]) ss += (v - means[i]) * (v - means[i]);
      vars[i] = ss / (n - 1.0);
    }
    const double grand = seq_mean(means);
    double b = 0.0;
    for (double mu : means) b += (mu - grand) * (mu - grand);
    b *= n / (m - 1.0);
    double w = 0.0;
    for (double v : vars) w += v;
    w /= m;
    if (!(w > 0.0)) continue;  // degenerate coordinate, same contract as diagnostics()
    any = true;
    mx = std::max(mx, std::sqrt(((n - 1.0) / n * w + b / n) / w));
  }
  return any ? mx : 1.0;
}

std::vector<WeightEstimate> marginal_exchangeability_weights(const PosteriorDraws& draws) {
  if (draws.chains.empty() || draws.n_total() == 0)
    throw ContractError("marginal_exchangeability_weights: empty draws");
  std::vector<WeightEstimate> out(draws.K);
  for (int k = 0; k < draws.K; ++k) {
    // indicator series as pseudo-draws, reusing the ESS machinery
    for (int which = 0; which < 2; ++which) {
      std::vector<std::vector<double>> seqs;
      double total = 0.0;
      long count = 0;
      for (const auto& c : draws.chains) {
        std::vector<double> s(c.n_kept);
        for (int it = 0; it < c.n_kept; ++it) {
          const int z = c.z_value(it, k);
          const bool ex = which == 0 ? (z == kCompExEx || z == kCompExNex)
                                     : (z == kCompExEx || z == kCompNexEx);
          s[it] = ex ? 1.0 : 0.0;
          total += s[it];
          ++count;
        }
        const int half = c.n_kept / 2;
        if (half >= 2) {
          seqs.emplace_back(s.begin(), s.begin() + half);
          seqs.emplace_back(s.end() - half, s.end());
        }
      }
      const double p = total / static_cast<double>(count);
      double se = 0.0;
      if (p > 0.0 && p < 1.0) {
        const RhatEss re = rhat_ess(seqs);
        const double ess = (re.degenerate || re.ess <= 0.0) ? static_cast<double>(count) : re.ess;
        se = std::sqrt(p * (1.0 - p) / ess);
      }
      if (which == 0) {
        out[k].w_tox = p;
        out[k].se_tox = se;
      } else {
        out[k].w_eff = p;
        out[k].se_eff = se;
      }
    }
  }
  return out;
}

}  // namespace bxn
