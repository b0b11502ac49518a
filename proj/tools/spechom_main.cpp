// Command-line front end: configured solves, the grid and contrast sweeps,
// and structure dumps. Exit status 0 on success, 1 on config or I/O errors,
// 2 when any solve failed to converge (its CSV row is still written).

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spechom/spechom.hpp"

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_dir;
  std::string method;
  int alpha = 0;  // 0 = keep config value
  bool seed_cache = false;
  bool parallel = false;
};

void add_common_flags(CLI::App* cmd, CliOptions& opt, bool solver_overrides) {
  cmd->add_option("--config", opt.config_path, "path to the JSON run config")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", opt.out_dir, "output directory (overrides the config)");
  if (solver_overrides) {
    cmd->add_option("--method", opt.method, "solver method (overrides the config)")
        ->check(CLI::IsMember({"fp", "krylov"}));
    cmd->add_option("--alpha", opt.alpha, "problem order (overrides the config)")
        ->check(CLI::Range(1, 2));
    cmd->add_flag("--seed-cache", opt.seed_cache,
                  "assemble the displacement corrector before timing order-2 solves");
    cmd->add_flag("--parallel", opt.parallel, "run independent sweep points concurrently");
  }
}

int run(const CLI::App& app, const CLI::App* solve, const CLI::App* sweep_grid,
        const CLI::App* sweep_contrast, const CLI::App* dump, const CliOptions& opt) {
  spechom::RunConfig cfg = spechom::load_run_config(opt.config_path);
  if (!opt.out_dir.empty()) cfg.output_directory = opt.out_dir;
  if (!opt.method.empty()) cfg.solve.method = spechom::parse_method(opt.method);
  if (opt.alpha != 0) cfg.alpha = opt.alpha;
  (void)app;

  if (dump->parsed()) {
    spechom::dump_structure(cfg, cfg.output_directory);
    std::printf("wrote %s/fields/structure.{bin,json,u8}\n", cfg.output_directory.c_str());
    return 0;
  }

  const spechom::ExperimentOptions opts{opt.parallel, opt.seed_cache};
  std::vector<spechom::ResultRow> rows;
  if (solve->parsed())
    rows = spechom::run_single(cfg, opts);
  else if (sweep_grid->parsed())
    rows = spechom::run_grid_sweep(cfg, opts);
  else if (sweep_contrast->parsed())
    rows = spechom::run_contrast_sweep(cfg, opts);

  const std::string csv = cfg.output_directory + "/results.csv";
  spechom::write_results_csv(csv, rows);
  long converged = 0;
  for (const auto& r : rows) converged += r.converged ? 1 : 0;
  std::printf("%zu rows (%ld converged) -> %s\n", rows.size(), converged, csv.c_str());
  return spechom::exit_code_for(rows);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FFT-based homogenization of periodic linear elastic microstructures"};
  app.require_subcommand(1);
  CliOptions opt;

  CLI::App* solve = app.add_subcommand("solve", "run the configured single solve");
  CLI::App* sweep_grid =
      app.add_subcommand("sweep-grid", "solve at every configured grid size, orders 1 and 2");
  CLI::App* sweep_contrast =
      app.add_subcommand("sweep-contrast", "solve at every configured core/coating contrast");
  CLI::App* dump = app.add_subcommand("dump-structure", "rasterize and dump the phase map");
  add_common_flags(solve, opt, true);
  add_common_flags(sweep_grid, opt, true);
  add_common_flags(sweep_contrast, opt, true);
  add_common_flags(dump, opt, false);

  CLI11_PARSE(app, argc, argv);
  try {
    return run(app, solve, sweep_grid, sweep_contrast, dump, opt);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
