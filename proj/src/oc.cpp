#include "bxn/oc.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <thread>

#include "bxn/errors.hpp"
#include "bxn/trial_data.hpp"

namespace bxn {

namespace {

constexpr double kRhatFlag = 1.1;

double binom_se(double p, int n) { return std::sqrt(p * (1.0 - p) / n); }

}  // namespace

std::optional<double> overall_error_rate(const std::vector<std::uint8_t>& go, int n_reps, int K,
                                         const std::vector<TruthLabel>& labels) {
  if (n_reps < 1 || static_cast<int>(labels.size()) != K ||
      static_cast<int>(go.size()) != n_reps * K)
    throw ContractError("overall_error_rate: shape mismatch");
  bool any_null = false;
  for (TruthLabel l : labels) any_null |= l == TruthLabel::null_;
  if (!any_null) return std::nullopt;
  int bad = 0;
  for (int r = 0; r < n_reps; ++r) {
    bool err = false;
    for (int k = 0; k < K; ++k)
      err |= labels[k] == TruthLabel::null_ && go[static_cast<std::size_t>(r) * K + k] != 0;
    bad += err;
  }
  return static_cast<double>(bad) / n_reps;
}

OCRun run_oc(const Scenario& scenario, const std::vector<LabeledModel>& models,
             const DecisionRuleSpec& rule, const McmcConfig& cfg, int n_reps, std::uint64_t seed,
             int n_threads) {
  if (n_reps < 1) throw ConfigError("oc: n_reps must be >= 1");
  if (models.empty()) throw ConfigError("oc: at least one model required");
  scenario.validate();
  rule.validate();
  const int K = scenario.K;
  const int M = static_cast<int>(models.size());
  for (const auto& m : models) m.spec.validate(K);

  McmcConfig fit_cfg = cfg;
  fit_cfg.seed = seed;

  OCRun run;
  run.details.resize(M);
  for (int m = 0; m < M; ++m) {
    run.details[m].model = models[m].label;
    run.details[m].go.assign(static_cast<std::size_t>(n_reps) * K, 0);
    run.details[m].rhat_max.assign(n_reps, 0.0);
  }

  const long n_tasks = static_cast<long>(n_reps) * M;
  std::atomic<long> next{0};
  std::mutex err_mutex;
  std::string first_error;
  std::atomic<bool> abort{false};
  std::vector<double> task_seconds(static_cast<std::size_t>(n_tasks), 0.0);

  auto worker = [&]() {
    for (;;) {
      const long t = next.fetch_add(1);
      if (t >= n_tasks || abort.load()) return;
      const int r = static_cast<int>(t / M);
      const int m = static_cast<int>(t % M);
      try {
        const auto start = std::chrono::steady_clock::now();
        const std::uint64_t data_stream = substream_id(substream_id(0, 1), r);
        const TrialData data = generate_trial(scenario, RngStream(seed, data_stream));
        const std::uint64_t fit_stream = substream_id(substream_id(substream_id(0, 2), r), m);
        const PosteriorDraws draws = run_posterior(data, models[m].spec, fit_cfg, fit_stream);
        const DecisionOutcome outcome = decide(draws, rule);
        ModelOCDetail& det = run.details[m];
        for (int k = 0; k < K; ++k)
          det.go[static_cast<std::size_t>(r) * K + k] = outcome.subtrials[k].go ? 1 : 0;
        det.rhat_max[r] = max_split_rhat(draws);
        task_seconds[t] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                              .count();
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (first_error.empty())
          first_error = "replicate " + std::to_string(r + 1) + ", model " + models[m].label +
                        ": " + e.what();
        abort.store(true);
        return;
      }
    }
  };

  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (!first_error.empty()) throw NumericError("oc aborted at " + first_error);

  const std::vector<TruthLabel> labels = truth_labels(scenario, 0.0);
  const std::string rule_name = to_string(rule.rule);
  for (int m = 0; m < M; ++m) {
    ModelOCDetail& det = run.details[m];
    double rhat_sum = 0.0;
    for (int r = 0; r < n_reps; ++r) {
      rhat_sum += det.rhat_max[r];
      det.n_flagged += det.rhat_max[r] > kRhatFlag;
      det.total_fit_seconds += task_seconds[static_cast<std::size_t>(r) * M + m];
    }
    const double mean_rhat = rhat_sum / n_reps;
    for (int k = 0; k < K; ++k) {
      int go = 0;
      for (int r = 0; r < n_reps; ++r) go += det.go[static_cast<std::size_t>(r) * K + k];
      const double est = static_cast<double>(go) / n_reps;
      OCRow row;
      row.scenario = scenario.name;
      row.model = models[m].label;
      row.rule = rule_name;
      row.subtrial = k + 1;
      row.metric = labels[k] == TruthLabel::desirable ? "power" : "type1_error";
      row.estimate = est;
      row.mc_se = binom_se(est, n_reps);
      row.n_reps = n_reps;
      row.mean_rhat_max = mean_rhat;
      run.report.rows.push_back(std::move(row));
    }
    const auto oer = overall_error_rate(det.go, n_reps, K, labels);
    if (oer.has_value()) {
      run.oer_defined = true;
      OCRow row;
      row.scenario = scenario.name;
      row.model = models[m].label;
      row.rule = rule_name;
      row.subtrial = 0;
      row.metric = "oer";
      row.estimate = *oer;
      row.mc_se = binom_se(*oer, n_reps);
      row.n_reps = n_reps;
      row.mean_rhat_max = mean_rhat;
      run.report.rows.push_back(std::move(row));
    }
  }
  return run;
}

std::vector<ComparisonRow> compare_models(const OCReport& report) {
  // group rows by (scenario, metric) for the per-subtrial metrics
  std::map<std::pair<std::string, std::string>, std::map<std::string, std::vector<OCRow>>> groups;
  for (const OCRow& row : report.rows) {
    if (row.metric != "type1_error" && row.metric != "power") continue;
    groups[{row.scenario, row.metric}][row.model].push_back(row);
  }
  std::vector<ComparisonRow> out;
  for (const auto& [key, by_model] : groups) {
    ComparisonRow cmp;
    cmp.scenario = key.first;
    cmp.metric = key.second;
    for (const auto& [model, rows] : by_model) {
      ModelRank mr;
      mr.model = model;
      double var = 0.0;
      for (const OCRow& r : rows) {
        mr.mean_estimate += r.estimate;
        var += r.mc_se * r.mc_se;
      }
      const double n = static_cast<double>(rows.size());
      mr.mean_estimate /= n;
      mr.se = std::sqrt(var) / n;
      cmp.entries.push_back(std::move(mr));
    }
    std::stable_sort(cmp.entries.begin(), cmp.entries.end(),
                     [](const ModelRank& a, const ModelRank& b) {
                       return a.mean_estimate > b.mean_estimate;
                     });
    for (std::size_t i = 0; i < cmp.entries.size(); ++i) {
      if (i > 0 && cmp.entries[i].mean_estimate == cmp.entries[i - 1].mean_estimate)
        cmp.entries[i].rank = cmp.entries[i - 1].rank;
      else
        cmp.entries[i].rank = static_cast<int>(i) + 1;
      const ModelRank& best = cmp.entries.front();
      const double gap = best.mean_estimate - cmp.entries[i].mean_estimate;
      const double pooled = std::sqrt(best.se * best.se + cmp.entries[i].se * cmp.entries[i].se);
      cmp.entries[i].within_2se_of_best = gap <= 2.0 * pooled;
    }
    out.push_back(std::move(cmp));
  }
  return out;
}

}  // namespace bxn
