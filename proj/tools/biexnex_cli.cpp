// Batch front-end for the biexnex shared library: parse flags, hand the run
// description to the C API, persist the buffered outputs.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "biexnex.h"

namespace fs = std::filesystem;

namespace {

int fail(int code, const std::string& msg) {
  std::cerr << "biexnex: " << msg << "\n";
  return code;
}

int check(int rc) {
  if (rc != BXN_OK) {
    std::cerr << "biexnex: " << bxn_last_error() << "\n";
    return rc;
  }
  return BXN_OK;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"biexnex: randomized basket-trial simulation and analysis"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  std::string seed, reps, threads;
  bool emit_plots = false;
  bool emit_go = false;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (default from config)");
  app.add_option("--seed", seed, "master seed override");
  app.add_option("--reps", reps, "replicate-count override");
  app.add_option("--threads", threads, "worker-thread override")->envname("BXN_THREADS");
  app.add_flag("--emit-plots", emit_plots, "also write SVG bar charts (oc mode)");
  app.add_flag("--emit-go-matrices", emit_go, "also write per-replicate Go matrices (oc mode)");

  app.add_subcommand("fit", "fit the configured models to one dataset");
  app.add_subcommand("oc", "operating-characteristics study over scenarios");
  app.add_subcommand("calibrate", "calibrate decision thresholds on a null scenario");
  app.add_subcommand("scenarios", "emit the scenario reference table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : BXN_ERR_CONFIG;
  }

  bxn_run* run = bxn_run_create();
  if (!run) return fail(BXN_ERR_INTERNAL, "out of memory");
  struct Guard {
    bxn_run* r;
    ~Guard() { bxn_run_destroy(r); }
  } guard{run};

  if (!config_path.empty()) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) return fail(BXN_ERR_CONFIG, "cannot read config '" + config_path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (int rc = check(bxn_run_set_config_json(run, ss.str().c_str()))) return rc;
  }
  if (int rc = check(bxn_run_set_mode(run, app.get_subcommands().front()->get_name().c_str())))
    return rc;
  if (!seed.empty())
    if (int rc = check(bxn_run_set_option(run, "seed", seed.c_str()))) return rc;
  if (!reps.empty())
    if (int rc = check(bxn_run_set_option(run, "n_reps", reps.c_str()))) return rc;
  if (!threads.empty())
    if (int rc = check(bxn_run_set_option(run, "threads", threads.c_str()))) return rc;
  if (emit_plots)
    if (int rc = check(bxn_run_set_option(run, "emit_plots", "1"))) return rc;
  if (emit_go)
    if (int rc = check(bxn_run_set_option(run, "emit_go_matrices", "1"))) return rc;
  if (!out_dir.empty())
    if (int rc = check(bxn_run_set_option(run, "out_dir", out_dir.c_str()))) return rc;

  if (int rc = check(bxn_run_execute(run))) return rc;

  const fs::path dir = bxn_run_get_option(run, "out_dir");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec && !fs::is_directory(dir))
    return fail(BXN_ERR_CONFIG, "cannot create output directory '" + dir.string() + "'");

  const int n = bxn_run_output_count(run);
  for (int i = 0; i < n; ++i) {
    size_t size = 0;
    const char* name = bxn_run_output_name(run, i);
    const char* data = bxn_run_output_data(run, i, &size);
    const fs::path path = dir / name;
    std::ofstream outf(path, std::ios::binary);
    if (!outf || !outf.write(data, static_cast<std::streamsize>(size)))
      return fail(BXN_ERR_INTERNAL, "cannot write '" + path.string() + "'");
    std::cout << path.string() << "\n";
  }
  return 0;
}
