#include "bxn/scenario.hpp"

#include <cstddef>

#include "bxn/errors.hpp"
#include "bxn/special.hpp"

namespace bxn {

void Scenario::validate() const {
  if (K < 1) throw ConfigError("scenario '" + name + "': K must be >= 1");
  const auto len = static_cast<std::size_t>(K);
  if (theta_t.size() != len || theta_e.size() != len || mu1C.size() != len ||
      arm_sizes.size() != len)
    throw ConfigError("scenario '" + name + "': all per-subtrial vectors must have length K");
  for (int n : arm_sizes)
    if (n < 1) throw ConfigError("scenario '" + name + "': arm sizes must be >= 1");
  if (!(sd1 > 0.0) || !(sd2 > 0.0))
    throw ConfigError("scenario '" + name + "': latent SDs must be positive");
  if (!(gen_corr_control > -1.0 && gen_corr_control < 1.0) ||
      !(gen_corr_treatment > -1.0 && gen_corr_treatment < 1.0))
    throw ConfigError("scenario '" + name + "': generation correlations must lie in (-1,1)");
}

namespace {

Scenario make(std::string name, std::vector<double> tt, std::vector<double> te,
              std::vector<int> sizes) {
  Scenario s;
  s.name = std::move(name);
  s.K = 6;
  s.theta_t = std::move(tt);
  s.theta_e = std::move(te);
  s.mu1C = {1.2, 1.5, 1.02, 0.88, 1.05, 0.96};
  s.arm_sizes = std::move(sizes);
  s.validate();
  return s;
}

const std::vector<int> kMainSizes{10, 10, 10, 6, 12, 10};
const std::vector<int> kSmallSizes{5, 5, 5, 3, 6, 5};

std::vector<double> rep6(double v) { return std::vector<double>(6, v); }

}  // namespace

std::vector<Scenario> builtin_scenarios() {
  std::vector<Scenario> out;

  // null scenarios
  out.push_back(make("Global Null", rep6(0), rep6(0), kMainSizes));
  out.push_back(make("1a", rep6(0), rep6(0.75), kMainSizes));
  out.push_back(make("1b", rep6(0), rep6(2.25), kMainSizes));
  out.push_back(make("1c", rep6(0), {0, 0.75, 1.75, 4, 8, 12}, kMainSizes));
  out.push_back(make("2a", rep6(-1.25), rep6(0), kMainSizes));
  out.push_back(make("2b", rep6(-2.5), rep6(0), kMainSizes));
  out.push_back(make("2c", {0, -0.55, -1.55, -3.1, -6.6, -9.5}, rep6(0), kMainSizes));

  // power scenarios
  out.push_back(make("Ia", {-0.8, -0.68, -0.72, -0.77, -0.96, -0.92},
                     {0.76, 0.82, 0.69, 0.72, 0.75, 0.66}, kMainSizes));
  out.push_back(make("Ib", {-0.95, -0.82, -1.07, 0.20, -1.67, -2.10},
                     {0.77, 0.73, 0.80, 1.80, -0.46, -1.20}, kMainSizes));
  out.push_back(make("IIa", {-1.4, 1.4, 0.87, -2.2, 0.15, -0.8},
                     {-1.77, 0.05, 0.68, 1.80, -0.46, 2.12}, kMainSizes));
  out.push_back(make("IIb", {-1.4, 1.4, -0.87, -2.2, 0.15, 0.8},
                     {1.43, -1.66, 1.08, 1.46, -0.02, -1.84}, kMainSizes));
  out.push_back(make("IIIa", {-1.5, 2.34, 0.87, -0.55, -3, 4.22}, rep6(1.0), kMainSizes));
  out.push_back(make("IIIb", rep6(-1.2), {-1.27, 3.48, 2.78, -0.02, 1.15, -0.12}, kMainSizes));

  // small-sample sub-scenarios (halved arms)
  out.push_back(make("1.1", {-0.69, -1.2, -1.24, -0.74, -1.04, -0.8}, rep6(1.0), kSmallSizes));
  out.push_back(make("1.2", {-0.97, -0.6, -1.09, -0.48, 0.38, -1.72}, rep6(1.0), kSmallSizes));
  out.push_back(make("1.3", {-3.82, -1.24, -0.4, 0.12, 0.11, 0.36}, rep6(1.0), kSmallSizes));
  out.push_back(make("1.4", {-2.46, 4.17, -0.28, -2.64, 0.79, -2.83}, rep6(1.0), kSmallSizes));
  out.push_back(make("2.1", rep6(-1.2), {0.77, 1.40, 1.15, 0.86, 1.25, 0.90}, kSmallSizes));
  out.push_back(make("2.2", rep6(-1.2), {2.15, 0.36, 1.08, 1.86, 0.89, 0.47}, kSmallSizes));
  out.push_back(make("2.3", rep6(-1.2), {2.86, 1.27, -1.51, -0.59, -0.68, 0.43}, kSmallSizes));
  out.push_back(make("2.4", rep6(-1.2), {-1.26, 4.70, -3.55, 0.09, -3.18, 2.13}, kSmallSizes));

  return out;
}

Scenario find_scenario(std::string_view name) {
  const auto all = builtin_scenarios();
  for (const auto& s : all)
    if (s.name == name) return s;
  std::string msg = "unknown scenario '";
  msg += name;
  msg += "'; available:";
  for (const auto& s : all) {
    msg += " '";
    msg += s.name;
    msg += "'";
  }
  throw ConfigError(msg);
}

std::vector<TruthLabel> truth_labels(const Scenario& s, double delta_truth) {
  s.validate();
  std::vector<TruthLabel> out(s.K);
  for (int k = 0; k < s.K; ++k)
    out[k] = (s.theta_t[k] < 0.0 && s.theta_e[k] > delta_truth) ? TruthLabel::desirable
                                                                : TruthLabel::null_;
  return out;
}

std::vector<ArmSummary> expected_arm_summaries(const Scenario& s) {
  s.validate();
  std::vector<ArmSummary> out(s.K);
  for (int k = 0; k < s.K; ++k) {
    ArmSummary& a = out[k];
    a.p_C = normal_cdf(s.threshold_T, s.mu1C[k], s.sd1);
    a.p_E = inv_logit(logit(a.p_C) + s.theta_t[k]);
    a.mu_C = s.mu1C[k] + s.efficacy_offset;
    a.mu_E = a.mu_C + s.theta_e[k];
  }
  return out;
}

}  // namespace bxn
