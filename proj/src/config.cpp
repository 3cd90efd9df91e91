#include "bxn/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"

#include "bxn/errors.hpp"

namespace bxn {

using json = nlohmann::ordered_json;

std::string to_string(RunMode m) {
  switch (m) {
    case RunMode::fit: return "fit";
    case RunMode::oc: return "oc";
    case RunMode::calibrate: return "calibrate";
    case RunMode::scenarios: return "scenarios";
  }
  throw ContractError("to_string: bad RunMode");
}

RunMode run_mode_from_string(const std::string& s) {
  if (s == "fit") return RunMode::fit;
  if (s == "oc") return RunMode::oc;
  if (s == "calibrate") return RunMode::calibrate;
  if (s == "scenarios") return RunMode::scenarios;
  throw ConfigError("mode: unknown value '" + s + "' (expected fit, oc, calibrate or scenarios)");
}

namespace {

// Strict-object cursor: every fetched key is recorded; close() rejects the
// rest so config typos cannot silently fall back to defaults.
class Strict {
 public:
  Strict(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) {
    if (!j_.contains(key)) return false;
    seen_.insert(key);
    return true;
  }

  const json& at(const std::string& key) { return j_.at(key); }

  std::string sub(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  template <typename T>
  void get(const std::string& key, T& out);

  void close() const {
    for (const auto& item : j_.items())
      if (seen_.find(item.key()) == seen_.end())
        throw ConfigError(sub(item.key()) + ": unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path + ": expected a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path + ": expected an integer");
  return v.get<int>();
}

std::uint64_t as_u64(const json& v, const std::string& path) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    throw ConfigError(path + ": expected a non-negative integer");
  return v.get<std::uint64_t>();
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw ConfigError(path + ": expected true or false");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path + ": expected a string");
  return v.get<std::string>();
}

std::vector<double> as_number_array(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(as_number(e, path));
  return out;
}

std::vector<std::string> as_string_array(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path + ": expected an array of strings");
  std::vector<std::string> out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(as_string(e, path));
  return out;
}

template <>
void Strict::get<double>(const std::string& key, double& out) {
  if (has(key)) out = as_number(at(key), sub(key));
}
template <>
void Strict::get<int>(const std::string& key, int& out) {
  if (has(key)) out = as_int(at(key), sub(key));
}
template <>
void Strict::get<std::uint64_t>(const std::string& key, std::uint64_t& out) {
  if (has(key)) out = as_u64(at(key), sub(key));
}
template <>
void Strict::get<bool>(const std::string& key, bool& out) {
  if (has(key)) out = as_bool(at(key), sub(key));
}
template <>
void Strict::get<std::string>(const std::string& key, std::string& out) {
  if (has(key)) out = as_string(at(key), sub(key));
}
template <>
void Strict::get<std::vector<double>>(const std::string& key, std::vector<double>& out) {
  if (has(key)) out = as_number_array(at(key), sub(key));
}

PriorSpec parse_priors(const json& j, const std::string& path) {
  Strict s(j, path);
  PriorSpec pr;
  s.get("alpha_sd", pr.alpha_sd);
  s.get("beta_sd", pr.beta_sd);
  s.get("sigma_halfnormal_var", pr.sigma_halfnormal_var);
  s.get("phi_halfnormal_var", pr.phi_halfnormal_var);
  s.get("fixed_sigma", pr.fixed_sigma);
  s.get("nex_mean_t", pr.nex_mean_t);
  s.get("nex_mean_e", pr.nex_mean_e);
  s.get("nex_sd_t", pr.nex_sd_t);
  s.get("nex_sd_e", pr.nex_sd_e);
  s.close();
  return pr;
}

McmcConfig parse_mcmc(const json& j, const std::string& path) {
  Strict s(j, path);
  McmcConfig cfg;
  s.get("chains", cfg.chains);
  s.get("burn_in", cfg.burn_in);
  s.get("iterations", cfg.iterations);
  s.get("thin", cfg.thin);
  s.get("adapt_window", cfg.adapt_window);
  s.get("target_accept_scalar", cfg.target_accept_scalar);
  s.get("target_accept_block", cfg.target_accept_block);
  s.get("seed", cfg.seed);
  s.close();
  cfg.validate();
  return cfg;
}

DecisionRuleSpec parse_decision(const json& j, const std::string& path) {
  Strict s(j, path);
  DecisionRuleSpec d;
  std::string rule = to_string(d.rule);
  s.get("rule", rule);
  d.rule = decision_rule_from_string(rule);
  s.get("eta", d.eta);
  s.get("eta1", d.eta1);
  s.get("eta2", d.eta2);
  s.get("delta", d.delta);
  s.close();
  d.validate();
  return d;
}

Scenario parse_scenario(const json& j, const std::string& path) {
  Strict s(j, path);
  Scenario scn;
  s.get("name", scn.name);
  s.get("theta_t", scn.theta_t);
  s.get("theta_e", scn.theta_e);
  s.get("mu1C", scn.mu1C);
  s.get("efficacy_offset", scn.efficacy_offset);
  s.get("threshold_T", scn.threshold_T);
  s.get("gen_corr_control", scn.gen_corr_control);
  s.get("gen_corr_treatment", scn.gen_corr_treatment);
  s.get("sd1", scn.sd1);
  s.get("sd2", scn.sd2);
  if (s.has("arm_sizes")) {
    const json& a = s.at("arm_sizes");
    if (!a.is_array()) throw ConfigError(s.sub("arm_sizes") + ": expected an array of integers");
    for (const auto& e : a) scn.arm_sizes.push_back(as_int(e, s.sub("arm_sizes")));
  }
  s.close();
  scn.K = static_cast<int>(scn.theta_t.size());
  scn.validate();
  return scn;
}

ModelConfig parse_model(const json& j, const std::string& path) {
  Strict s(j, path);
  ModelConfig mc;
  s.get("kind", mc.kind);
  model_kind_from_string(mc.kind);  // fail fast with the field path implied
  mc.label = mc.kind;
  s.get("label", mc.label);
  if (s.has("omega")) {
    const json& w = s.at("omega");
    if (w.is_number())
      mc.omega_scalar = as_number(w, s.sub("omega"));
    else
      mc.omega = as_number_array(w, s.sub("omega"));
  }
  if (s.has("omega_t")) {
    const json& w = s.at("omega_t");
    if (w.is_number())
      mc.omega_t_scalar = as_number(w, s.sub("omega_t"));
    else
      mc.omega_t = as_number_array(w, s.sub("omega_t"));
  }
  if (s.has("omega_e")) {
    const json& w = s.at("omega_e");
    if (w.is_number())
      mc.omega_e_scalar = as_number(w, s.sub("omega_e"));
    else
      mc.omega_e = as_number_array(w, s.sub("omega_e"));
  }
  if (s.has("lambda")) {
    const json& l = s.at("lambda");
    if (!l.is_array() || l.empty())
      throw ConfigError(s.sub("lambda") + ": expected a weight row or rows");
    auto parse_row = [&](const json& row) {
      const auto v = as_number_array(row, s.sub("lambda"));
      if (v.size() != 4)
        throw ConfigError(s.sub("lambda") + ": each row needs exactly 4 weights");
      return std::array<double, 4>{v[0], v[1], v[2], v[3]};
    };
    if (l.front().is_array())
      for (const auto& row : l) mc.lambda.push_back(parse_row(row));
    else
      mc.lambda.push_back(parse_row(l));
  }
  s.get("scheme", mc.scheme);
  if (mc.scheme != "joint4" && mc.scheme != "factored2x2")
    throw ConfigError(s.sub("scheme") + ": expected joint4 or factored2x2");
  s.get("pin_rho", mc.pin_rho);
  s.get("pin_kappa", mc.pin_kappa);
  s.close();
  return mc;
}

FitConfig parse_fit(const json& j, const std::string& path) {
  Strict s(j, path);
  FitConfig f;
  s.get("scenario", f.scenario);
  s.get("counts_csv", f.counts_csv);
  s.get("efficacy_csv", f.efficacy_csv);
  s.get("dump_draws", f.dump_draws);
  s.close();
  if (f.counts_csv.empty() != f.efficacy_csv.empty())
    throw ConfigError(path + ": counts_csv and efficacy_csv must be given together");
  return f;
}

CalibrateConfig parse_calibrate(const json& j, const std::string& path) {
  Strict s(j, path);
  CalibrateConfig c;
  s.get("target_error", c.target_error);
  s.get("replicates", c.replicates);
  s.get("scenario", c.scenario);
  s.close();
  if (!(c.target_error > 0.0 && c.target_error <= 1.0))
    throw ConfigError(path + ".target_error: must lie in (0, 1]");
  if (c.replicates < 1) throw ConfigError(path + ".replicates: must be >= 1");
  return c;
}

std::vector<ModelConfig> default_models() {
  std::vector<ModelConfig> out;
  for (const char* kind : {"BHM", "BiEXNEX", "E-BiEXNEX", "IndEXNEX", "SA"}) {
    ModelConfig mc;
    mc.kind = kind;
    mc.label = kind;
    out.push_back(std::move(mc));
  }
  return out;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  cfg.models = default_models();

  std::string trimmed = text;
  trimmed.erase(std::remove_if(trimmed.begin(), trimmed.end(),
                               [](unsigned char c) { return std::isspace(c); }),
                trimmed.end());
  if (trimmed.empty()) return cfg;

  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    // byte offset -> line/column for the error message
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min(text.size(), e.byte > 0 ? e.byte - 1 : 0);
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("config: syntax error at line " + std::to_string(line) + ", column " +
                      std::to_string(col) + ": " + e.what());
  }

  Strict s(j, "");
  if (s.has("mode")) cfg.mode = run_mode_from_string(as_string(s.at("mode"), "mode"));
  s.get("seed", cfg.seed);
  s.get("n_reps", cfg.n_reps);
  if (cfg.n_reps < 1) throw ConfigError("n_reps: must be >= 1");
  s.get("threads", cfg.threads);
  if (cfg.threads < 0) throw ConfigError("threads: must be >= 0");
  s.get("out_dir", cfg.out_dir);
  s.get("emit_plots", cfg.emit_plots);
  s.get("emit_go_matrices", cfg.emit_go_matrices);
  if (s.has("scenarios")) cfg.scenario_names = as_string_array(s.at("scenarios"), "scenarios");
  if (s.has("scenario_inline"))
    cfg.inline_scenario = parse_scenario(s.at("scenario_inline"), "scenario_inline");
  if (s.has("models")) {
    const json& m = s.at("models");
    if (!m.is_array() || m.empty()) throw ConfigError("models: expected a non-empty array");
    cfg.models.clear();
    for (std::size_t i = 0; i < m.size(); ++i)
      cfg.models.push_back(parse_model(m[i], "models[" + std::to_string(i) + "]"));
  }
  if (s.has("priors")) cfg.priors = parse_priors(s.at("priors"), "priors");
  if (s.has("mcmc")) cfg.mcmc = parse_mcmc(s.at("mcmc"), "mcmc");
  if (s.has("decision")) cfg.decision = parse_decision(s.at("decision"), "decision");
  if (s.has("fit")) cfg.fit = parse_fit(s.at("fit"), "fit");
  if (s.has("calibrate")) cfg.calibrate = parse_calibrate(s.at("calibrate"), "calibrate");
  s.close();

  // fail fast on malformed model weight overrides, independent of K
  for (const auto& mc : cfg.models) {
    if (mc.omega_scalar && !(*mc.omega_scalar >= 0.0 && *mc.omega_scalar <= 1.0))
      throw ConfigError("models: omega must lie in [0,1]");
    for (double w : mc.omega)
      if (!(w >= 0.0 && w <= 1.0)) throw ConfigError("models: omega must lie in [0,1]");
    for (const auto& row : mc.lambda) {
      double sum = 0.0;
      for (double l : row) {
        if (l < 0.0) throw ConfigError("models: lambda weights must be non-negative");
        sum += l;
      }
      if (std::fabs(sum - 1.0) > 1e-9)
        throw ConfigError("models: each lambda row must sum to 1");
    }
  }
  return cfg;
}

LabeledModel ModelConfig::build(int K, const PriorSpec& priors) const {
  ModelSpec spec;
  spec.kind = model_kind_from_string(kind);
  spec.priors = priors;
  spec.pin_rho = pin_rho;
  spec.pin_kappa = pin_kappa;
  spec.scheme = scheme == "factored2x2" ? IndicatorScheme::factored2x2 : IndicatorScheme::joint4;
  auto broadcast = [K](const std::optional<double>& scalar, const std::vector<double>& vec) {
    if (scalar) return std::vector<double>(static_cast<std::size_t>(K), *scalar);
    return vec;
  };
  spec.omega = broadcast(omega_scalar, omega);
  spec.omega_t = broadcast(omega_t_scalar, omega_t);
  spec.omega_e = broadcast(omega_e_scalar, omega_e);
  spec.lambda = lambda;
  if (lambda.size() == 1 && K > 1)
    spec.lambda.assign(static_cast<std::size_t>(K), lambda.front());
  spec.finalize(K);
  return {label.empty() ? kind : label, spec};
}

std::vector<Scenario> RunConfig::resolve_scenarios() const {
  std::vector<Scenario> out;
  for (const std::string& name : scenario_names) out.push_back(find_scenario(name));
  if (inline_scenario) out.push_back(*inline_scenario);
  if (out.empty() && (mode == RunMode::oc))
    throw ConfigError("scenarios: oc mode needs at least one named or inline scenario");
  return out;
}

std::vector<LabeledModel> RunConfig::build_models(int K) const {
  std::vector<LabeledModel> out;
  out.reserve(models.size());
  for (const auto& mc : models) out.push_back(mc.build(K, priors));
  return out;
}

namespace {

json scenario_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["theta_t"] = s.theta_t;
  j["theta_e"] = s.theta_e;
  j["mu1C"] = s.mu1C;
  j["efficacy_offset"] = s.efficacy_offset;
  j["threshold_T"] = s.threshold_T;
  j["gen_corr_control"] = s.gen_corr_control;
  j["gen_corr_treatment"] = s.gen_corr_treatment;
  j["sd1"] = s.sd1;
  j["sd2"] = s.sd2;
  j["arm_sizes"] = s.arm_sizes;
  return j;
}

json model_json(const ModelConfig& m) {
  json j;
  j["kind"] = m.kind;
  j["label"] = m.label.empty() ? m.kind : m.label;
  if (m.omega_scalar) j["omega"] = *m.omega_scalar;
  if (!m.omega.empty()) j["omega"] = m.omega;
  if (!m.lambda.empty()) {
    json rows = json::array();
    for (const auto& row : m.lambda) rows.push_back(std::vector<double>(row.begin(), row.end()));
    j["lambda"] = rows;
  }
  if (m.omega_t_scalar) j["omega_t"] = *m.omega_t_scalar;
  if (!m.omega_t.empty()) j["omega_t"] = m.omega_t;
  if (m.omega_e_scalar) j["omega_e"] = *m.omega_e_scalar;
  if (!m.omega_e.empty()) j["omega_e"] = m.omega_e;
  j["scheme"] = m.scheme;
  if (m.pin_rho) j["pin_rho"] = true;
  if (m.pin_kappa) j["pin_kappa"] = true;
  return j;
}

}  // namespace

std::string serialize_config(const RunConfig& cfg) {
  json j;
  j["mode"] = to_string(cfg.mode);
  j["seed"] = cfg.seed;
  j["n_reps"] = cfg.n_reps;
  j["threads"] = cfg.threads;
  j["out_dir"] = cfg.out_dir;
  j["emit_plots"] = cfg.emit_plots;
  j["emit_go_matrices"] = cfg.emit_go_matrices;
  j["scenarios"] = cfg.scenario_names;
  if (cfg.inline_scenario) j["scenario_inline"] = scenario_json(*cfg.inline_scenario);
  json models = json::array();
  for (const auto& m : cfg.models) models.push_back(model_json(m));
  j["models"] = models;
  json priors;
  priors["alpha_sd"] = cfg.priors.alpha_sd;
  priors["beta_sd"] = cfg.priors.beta_sd;
  priors["sigma_halfnormal_var"] = cfg.priors.sigma_halfnormal_var;
  priors["phi_halfnormal_var"] = cfg.priors.phi_halfnormal_var;
  if (cfg.priors.fixed_sigma > 0.0) priors["fixed_sigma"] = cfg.priors.fixed_sigma;
  if (!cfg.priors.nex_mean_t.empty()) priors["nex_mean_t"] = cfg.priors.nex_mean_t;
  if (!cfg.priors.nex_mean_e.empty()) priors["nex_mean_e"] = cfg.priors.nex_mean_e;
  if (!cfg.priors.nex_sd_t.empty()) priors["nex_sd_t"] = cfg.priors.nex_sd_t;
  if (!cfg.priors.nex_sd_e.empty()) priors["nex_sd_e"] = cfg.priors.nex_sd_e;
  j["priors"] = priors;
  json mcmc;
  mcmc["chains"] = cfg.mcmc.chains;
  mcmc["burn_in"] = cfg.mcmc.burn_in;
  mcmc["iterations"] = cfg.mcmc.iterations;
  mcmc["thin"] = cfg.mcmc.thin;
  mcmc["adapt_window"] = cfg.mcmc.adapt_window;
  mcmc["target_accept_scalar"] = cfg.mcmc.target_accept_scalar;
  mcmc["target_accept_block"] = cfg.mcmc.target_accept_block;
  mcmc["seed"] = cfg.mcmc.seed;
  j["mcmc"] = mcmc;
  json decision;
  decision["rule"] = to_string(cfg.decision.rule);
  decision["eta"] = cfg.decision.eta;
  decision["eta1"] = cfg.decision.eta1;
  decision["eta2"] = cfg.decision.eta2;
  decision["delta"] = cfg.decision.delta;
  j["decision"] = decision;
  json fit;
  fit["scenario"] = cfg.fit.scenario;
  if (!cfg.fit.counts_csv.empty()) {
    fit["counts_csv"] = cfg.fit.counts_csv;
    fit["efficacy_csv"] = cfg.fit.efficacy_csv;
  }
  fit["dump_draws"] = cfg.fit.dump_draws;
  j["fit"] = fit;
  json calibrate;
  calibrate["target_error"] = cfg.calibrate.target_error;
  calibrate["replicates"] = cfg.calibrate.replicates;
  calibrate["scenario"] = cfg.calibrate.scenario;
  j["calibrate"] = calibrate;
  return j.dump(2) + "\n";
}

}  // namespace bxn
