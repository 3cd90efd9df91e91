#include "bxn/runner.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "bxn/csv.hpp"
#include "bxn/errors.hpp"
#include "bxn/svg.hpp"
#include "bxn/trial_data.hpp"

namespace bxn {

namespace {

constexpr std::uint64_t kDataTag = 1;  // replicate data streams live under (seed, 1, r)
constexpr std::uint64_t kFitTag = 2;   // fit streams under (seed, 2, r, m)

std::string read_file(const std::string& path, const std::string& field) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(field + ": cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void require_unique_labels(const std::vector<LabeledModel>& models) {
  std::set<std::string> seen;
  for (const auto& m : models)
    if (!seen.insert(m.label).second)
      throw ConfigError("models: duplicate label '" + m.label + "'");
}

Scenario resolve_one_scenario(const RunConfig& cfg, const std::string& name) {
  if (cfg.inline_scenario && cfg.inline_scenario->name == name) return *cfg.inline_scenario;
  return find_scenario(name);
}

std::string metric_title(const std::string& metric) {
  return metric == "type1_error" ? "type I error rate" : metric;
}

}  // namespace

std::string sanitize_filename(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                    (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
    out += ok ? c : '_';
  }
  return out;
}

OutputMap cmd_fit(const RunConfig& cfg) {
  TrialData data;
  if (!cfg.fit.counts_csv.empty()) {
    data = parse_trial_csv(read_file(cfg.fit.counts_csv, "fit.counts_csv"),
                           read_file(cfg.fit.efficacy_csv, "fit.efficacy_csv"));
  } else {
    const Scenario scn = resolve_one_scenario(cfg, cfg.fit.scenario);
    // same dataset as oc replicate 0 under this seed
    RngStream rep(cfg.seed, substream_id(substream_id(0, kDataTag), 0));
    data = generate_trial(scn, rep);
  }

  const auto models = cfg.build_models(data.K);
  require_unique_labels(models);

  OutputMap out;
  out["fit_data_counts.csv"] = trial_counts_csv(data);
  out["fit_data_efficacy.csv"] = trial_efficacy_csv(data);

  // every model fits from the same stream so that degenerate pairs (e.g. SA
  // vs BiEXNEX with omega pinned to 0) consume identical randomness
  const std::uint64_t fit_stream =
      substream_id(substream_id(substream_id(0, kFitTag), 0), 0);

  for (const auto& model : models) {
    McmcConfig mcfg = cfg.mcmc;
    mcfg.seed = cfg.seed;
    const PosteriorDraws draws = run_posterior(data, model.spec, mcfg, fit_stream);
    const std::string stem = "fit_" + sanitize_filename(model.label) + "_";

    CsvBuilder summary({"coordinate", "median", "q025", "q975", "mean", "sd"});
    for (const std::string& coord : draws.coord_names) {
      const SummaryStats s = posterior_summary(draws, coord);
      summary.row({coord, format_number(s.median), format_number(s.q025),
                   format_number(s.q975), format_number(s.mean), format_number(s.sd)});
    }
    out[stem + "summary.csv"] = summary.str();

    CsvBuilder weights({"subtrial", "w_tox", "se_tox", "w_eff", "se_eff"});
    const auto west = marginal_exchangeability_weights(draws);
    for (std::size_t k = 0; k < west.size(); ++k)
      weights.row({std::to_string(k + 1), format_number(west[k].w_tox),
                   format_number(west[k].se_tox), format_number(west[k].w_eff),
                   format_number(west[k].se_eff)});
    out[stem + "weights.csv"] = weights.str();

    CsvBuilder decision({"subtrial", "go", "prob_tox", "prob_eff", "prob_joint"});
    const DecisionOutcome dec = decide(draws, cfg.decision);
    for (std::size_t k = 0; k < dec.subtrials.size(); ++k) {
      const SubtrialDecision& d = dec.subtrials[k];
      decision.row({std::to_string(k + 1), d.go ? "1" : "0", format_number(d.prob_tox),
                    format_number(d.prob_eff), format_number(d.prob_joint)});
    }
    out[stem + "decision.csv"] = decision.str();

    CsvBuilder diag({"coordinate", "rhat", "ess", "degenerate"});
    for (const CoordDiagnostic& cd : diagnostics(draws))
      diag.row({cd.coord, format_number(cd.rhat), format_number(cd.ess),
                cd.degenerate ? "1" : "0"});
    out[stem + "diagnostics.csv"] = diag.str();

    if (cfg.fit.dump_draws) {
      CsvBuilder dump({"chain", "iteration", "coordinate", "value"});
      for (std::size_t c = 0; c < draws.chains.size(); ++c) {
        const ChainDraws& ch = draws.chains[c];
        for (int it = 0; it < ch.n_kept; ++it)
          for (int j = 0; j < ch.n_coords; ++j)
            dump.row({std::to_string(c + 1), std::to_string(it + 1), draws.coord_names[j],
                      format_number(ch.value(it, j))});
      }
      out[stem + "draws.csv"] = dump.str();
    }
  }
  return out;
}

OutputMap cmd_oc(const RunConfig& cfg) {
  const auto scenarios = cfg.resolve_scenarios();

  OCReport combined;
  CsvBuilder flags({"scenario", "model", "n_flagged", "n_reps"});
  CsvBuilder timings({"scenario", "model", "total_fit_seconds"});
  OutputMap out;

  for (const Scenario& scn : scenarios) {
    const auto models = cfg.build_models(scn.K);
    require_unique_labels(models);
    const OCRun run =
        run_oc(scn, models, cfg.decision, cfg.mcmc, cfg.n_reps, cfg.seed, cfg.threads);
    combined.rows.insert(combined.rows.end(), run.report.rows.begin(), run.report.rows.end());

    for (const ModelOCDetail& d : run.details) {
      flags.row({scn.name, d.model, std::to_string(d.n_flagged), std::to_string(cfg.n_reps)});
      timings.row({scn.name, d.model, format_number(d.total_fit_seconds)});
      if (cfg.emit_go_matrices) {
        std::vector<std::string> header = {"replicate"};
        for (int k = 1; k <= scn.K; ++k) header.push_back("go_" + std::to_string(k));
        CsvBuilder go(header);
        for (int r = 0; r < cfg.n_reps; ++r) {
          std::vector<std::string> row = {std::to_string(r + 1)};
          for (int k = 0; k < scn.K; ++k)
            row.push_back(d.go[static_cast<std::size_t>(r) * scn.K + k] ? "1" : "0");
          go.row(row);
        }
        out["oc_go_" + sanitize_filename(scn.name) + "_" + sanitize_filename(d.model) +
            ".csv"] = go.str();
      }
    }

    if (cfg.emit_plots) {
      for (const std::string metric : {"type1_error", "power"}) {
        std::vector<int> subtrials;
        for (const OCRow& r : run.report.rows)
          if (r.metric == metric && r.subtrial > 0 &&
              (subtrials.empty() || subtrials.back() != r.subtrial))
            if (std::find(subtrials.begin(), subtrials.end(), r.subtrial) == subtrials.end())
              subtrials.push_back(r.subtrial);
        if (subtrials.empty()) continue;
        std::sort(subtrials.begin(), subtrials.end());
        std::vector<std::string> group_labels;
        for (int k : subtrials) group_labels.push_back(std::to_string(k));
        std::vector<BarSeries> series;
        for (const ModelOCDetail& d : run.details) {
          BarSeries s;
          s.label = d.model;
          for (int k : subtrials)
            for (const OCRow& r : run.report.rows)
              if (r.model == d.model && r.metric == metric && r.subtrial == k) {
                s.values.push_back(r.estimate);
                s.errors.push_back(r.mc_se);
              }
          series.push_back(std::move(s));
        }
        out["oc_" + sanitize_filename(scn.name) + "_" + metric + ".svg"] =
            grouped_bar_svg(scn.name + ": " + metric_title(metric), metric_title(metric),
                            group_labels, series);
      }
    }
  }

  out["oc_report.csv"] = oc_report_csv(combined);
  out["model_comparison.csv"] = comparison_csv(compare_models(combined));
  out["oc_flags.csv"] = flags.str();
  out["oc_timings.csv"] = timings.str();
  return out;
}

OutputMap cmd_calibrate(const RunConfig& cfg) {
  const Scenario scn = resolve_one_scenario(cfg, cfg.calibrate.scenario);
  const auto models = cfg.build_models(scn.K);
  require_unique_labels(models);

  OutputMap out;
  CsvBuilder table({"model", "rule", "target_error", "replicates", "ok", "threshold",
                    "achieved_max_error"});
  for (const auto& model : models) {
    McmcConfig mcfg = cfg.mcmc;
    mcfg.seed = cfg.seed;
    const CalibrationResult res =
        calibrate_threshold(model.spec, cfg.decision, cfg.calibrate.target_error,
                            cfg.calibrate.replicates, mcfg, cfg.seed, &scn);
    table.row({model.label, to_string(res.rule.rule), format_number(cfg.calibrate.target_error),
               std::to_string(res.replicates), res.ok ? "1" : "0",
               format_number(res.threshold), format_number(res.achieved_max_error)});
    if (!res.ok) {
      CsvBuilder frontier({"threshold", "max_error"});
      for (const FrontierPoint& p : res.frontier)
        frontier.row({format_number(p.threshold), format_number(p.max_error)});
      out["calibration_frontier_" + sanitize_filename(model.label) + ".csv"] = frontier.str();
    }
  }
  out["calibration.csv"] = table.str();
  return out;
}

OutputMap cmd_scenarios(const RunConfig& cfg) {
  std::vector<Scenario> scenarios = cfg.resolve_scenarios();
  if (scenarios.empty()) scenarios = builtin_scenarios();

  CsvBuilder table({"scenario", "subtrial", "n_per_arm", "theta_t", "theta_e", "truth", "p_C",
                    "p_E", "mu_C", "mu_E"});
  for (const Scenario& s : scenarios) {
    const auto summaries = expected_arm_summaries(s);
    const auto labels = truth_labels(s, 0.0);
    for (int k = 0; k < s.K; ++k) {
      table.row({s.name, std::to_string(k + 1), std::to_string(s.arm_sizes[k]),
                 format_number(s.theta_t[k]), format_number(s.theta_e[k]),
                 labels[k] == TruthLabel::desirable ? "desirable" : "null",
                 format_number(summaries[k].p_C),
                 format_number(summaries[k].p_E), format_number(summaries[k].mu_C),
                 format_number(summaries[k].mu_E)});
    }
  }
  OutputMap out;
  out["scenarios.csv"] = table.str();
  return out;
}

OutputMap run_command(const RunConfig& cfg) {
  switch (cfg.mode) {
    case RunMode::fit: return cmd_fit(cfg);
    case RunMode::oc: return cmd_oc(cfg);
    case RunMode::calibrate: return cmd_calibrate(cfg);
    case RunMode::scenarios: return cmd_scenarios(cfg);
  }
  throw ContractError("run_command: bad mode");
}

}  // namespace bxn
