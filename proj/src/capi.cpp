#include "biexnex.h"

#include <charconv>
#include <string>
#include <utility>
#include <vector>

#include "bxn/errors.hpp"
#include "bxn/runner.hpp"

namespace {

thread_local std::string t_last_error;

template <typename F>
int guarded(F&& f) {
  try {
    f();
    t_last_error.clear();
    return BXN_OK;
  } catch (const bxn::ConfigError& e) {
    t_last_error = e.what();
    return BXN_ERR_CONFIG;
  } catch (const bxn::NumericError& e) {
    t_last_error = e.what();
    return BXN_ERR_NUMERIC;
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return BXN_ERR_INTERNAL;
  } catch (...) {
    t_last_error = "unknown error";
    return BXN_ERR_INTERNAL;
  }
}

int fail_config(const std::string& msg) {
  t_last_error = msg;
  return BXN_ERR_CONFIG;
}

long long parse_ll(const std::string& v, const char* key) {
  long long out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw bxn::ConfigError(std::string(key) + ": expected an integer, got '" + v + "'");
  return out;
}

bool parse_flag(const std::string& v, const char* key) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  throw bxn::ConfigError(std::string(key) + ": expected 0/1/true/false, got '" + v + "'");
}

}  // namespace

struct bxn_run {
  bxn::RunConfig cfg;
  std::vector<std::pair<std::string, std::string>> outputs;  // name-sorted
  mutable std::string scratch;                               // get_option return buffer
};

extern "C" {

const char* bxn_version(void) { return "1.0.0"; }

const char* bxn_last_error(void) { return t_last_error.c_str(); }

bxn_run* bxn_run_create(void) {
  try {
    auto* run = new bxn_run;
    run->cfg = bxn::parse_config("");
    return run;
  } catch (...) {
    return nullptr;
  }
}

void bxn_run_destroy(bxn_run* run) { delete run; }

int bxn_run_set_config_json(bxn_run* run, const char* text) {
  if (!run) return fail_config("null run handle");
  if (!text) return fail_config("null config text");
  return guarded([&] { run->cfg = bxn::parse_config(text); });
}

int bxn_run_set_mode(bxn_run* run, const char* mode) {
  if (!run) return fail_config("null run handle");
  if (!mode) return fail_config("null mode");
  return guarded([&] { run->cfg.mode = bxn::run_mode_from_string(mode); });
}

int bxn_run_set_option(bxn_run* run, const char* key, const char* value) {
  if (!run) return fail_config("null run handle");
  if (!key || !value) return fail_config("null option key or value");
  const std::string k = key, v = value;
  return guarded([&] {
    if (k == "seed") {
      const long long s = parse_ll(v, "seed");
      if (s < 0) throw bxn::ConfigError("seed: must be >= 0");
      run->cfg.seed = static_cast<std::uint64_t>(s);
    } else if (k == "n_reps") {
      const long long n = parse_ll(v, "n_reps");
      if (n < 1) throw bxn::ConfigError("n_reps: must be >= 1");
      run->cfg.n_reps = static_cast<int>(n);
    } else if (k == "threads") {
      const long long n = parse_ll(v, "threads");
      if (n < 0) throw bxn::ConfigError("threads: must be >= 0");
      run->cfg.threads = static_cast<int>(n);
    } else if (k == "out_dir") {
      run->cfg.out_dir = v;
    } else if (k == "emit_plots") {
      run->cfg.emit_plots = parse_flag(v, "emit_plots");
    } else if (k == "emit_go_matrices") {
      run->cfg.emit_go_matrices = parse_flag(v, "emit_go_matrices");
    } else {
      throw bxn::ConfigError("unknown option '" + k + "'");
    }
  });
}

const char* bxn_run_get_option(const bxn_run* run, const char* key) {
  if (!run || !key) return nullptr;
  const std::string k = key;
  if (k == "seed")
    run->scratch = std::to_string(run->cfg.seed);
  else if (k == "n_reps")
    run->scratch = std::to_string(run->cfg.n_reps);
  else if (k == "threads")
    run->scratch = std::to_string(run->cfg.threads);
  else if (k == "out_dir")
    run->scratch = run->cfg.out_dir;
  else if (k == "emit_plots")
    run->scratch = run->cfg.emit_plots ? "1" : "0";
  else if (k == "emit_go_matrices")
    run->scratch = run->cfg.emit_go_matrices ? "1" : "0";
  else
    return nullptr;
  return run->scratch.c_str();
}

int bxn_run_execute(bxn_run* run) {
  if (!run) return fail_config("null run handle");
  return guarded([&] {
    bxn::OutputMap out = bxn::run_command(run->cfg);
    run->outputs.assign(std::make_move_iterator(out.begin()), std::make_move_iterator(out.end()));
  });
}

int bxn_run_output_count(const bxn_run* run) {
  return run ? static_cast<int>(run->outputs.size()) : 0;
}

const char* bxn_run_output_name(const bxn_run* run, int index) {
  if (!run || index < 0 || index >= static_cast<int>(run->outputs.size())) return nullptr;
  return run->outputs[static_cast<std::size_t>(index)].first.c_str();
}

const char* bxn_run_output_data(const bxn_run* run, int index, size_t* size) {
  if (!run || index < 0 || index >= static_cast<int>(run->outputs.size())) {
    if (size) *size = 0;
    return nullptr;
  }
  const std::string& body = run->outputs[static_cast<std::size_t>(index)].second;
  if (size) *size = body.size();
  return body.c_str();
}

}  // extern "C"
