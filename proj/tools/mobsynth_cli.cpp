// mobsynth command-line front end. Talks to the library only through the C
// interface.
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mobsynth/mobsynth.h"

namespace {

// Thrown to unwind with an exit status after printing the library error.
struct Failure {
  int status;
};

void check(ms_status status, const char* action) {
  if (status == MS_OK) return;
  std::fprintf(stderr, "mobsynth: %s: %s\n", action, ms_last_error());
  throw Failure{static_cast<int>(status)};
}

template <typename T, void (*Destroy)(T*)>
struct Deleter {
  void operator()(T* p) const { Destroy(p); }
};
using Options = std::unique_ptr<ms_options, Deleter<ms_options, ms_options_destroy>>;
using Bundle = std::unique_ptr<ms_bundle, Deleter<ms_bundle, ms_bundle_destroy>>;
using Trajs = std::unique_ptr<ms_trajectories,
                              Deleter<ms_trajectories, ms_trajectories_destroy>>;
using Report = std::unique_ptr<ms_report, Deleter<ms_report, ms_report_destroy>>;
using Run = std::unique_ptr<ms_run, Deleter<ms_run, ms_run_destroy>>;

Bundle load_bundle(const std::string& dir) {
  ms_bundle* b = nullptr;
  check(ms_bundle_load(dir.c_str(), &b), "loading bundle");
  return Bundle(b);
}

std::string path_in(const std::string& dir, const char* name) {
  return (std::filesystem::path(dir) / name).string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthesize daily mobility trajectories from aggregated statistics"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config, out_dir = ".";
  app.add_option("--config", config, "Flat key = value file; flags override it");
  app.add_option("--out", out_dir, "Output directory");

  // Flags forwarded to the options object under the same key.
  const std::vector<std::pair<std::string, std::string>> passthrough = {
      {"seed", "Master seed"},
      {"jobs", "Worker threads"},
      {"tau-max", "Annealing steps per group (even; 0 = 2000 x population)"},
      {"t-max", "Start temperature of each cooling phase"},
      {"t-min", "End temperature of each cooling phase"},
      {"n-max", "Visit-count support cap"},
      {"threshold", "Suppression threshold for make-world"},
      {"steps-per-agent", "Annealing steps per agent when tau-max is 0"},
      {"w-od", "OD loss weight"},
      {"w-vf", "Visit-frequency loss weight"},
      {"w-dt", "Dwell-travel loss weight"},
      {"levels", "Grid levels of the world (side 2^levels)"},
      {"population", "World population, e.g. male_20s:1000,female_40s:1000"},
      {"grid-w-vf", "Comma list of w_vf values for grid-search"},
      {"grid-w-dt", "Comma list of w_dt values for grid-search"},
      {"grid-seeds", "Comma list of seeds for grid-search"},
  };
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> flags;
  for (const auto& [key, help] : passthrough) {
    flags[key] = app.add_option("--" + key, values[key], help);
  }

  auto* make_world = app.add_subcommand("make-world", "Sample a ground-truth world and its reference bundle");
  auto* fit = app.add_subcommand("fit-quantiles", "Fit and fill the dwell-travel table");
  auto* generate = app.add_subcommand("generate", "Anneal synthetic trajectories");
  auto* evaluate = app.add_subcommand("evaluate", "Score trajectories against a bundle");
  auto* grid = app.add_subcommand("grid-search", "Run the loss-weight grid");

  std::string bundle_dir, trajectories_path;
  for (auto* sub : {fit, generate, evaluate, grid}) {
    sub->add_option("--bundle", bundle_dir, "Directory with od.csv, quantiles.csv, census.csv")
        ->required();
  }
  evaluate->add_option("--trajectories", trajectories_path, "trajectories.csv to score")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "mobsynth: %s\n", e.what());
    return 1;
  }

  try {
    ms_options* raw = nullptr;
    check(ms_options_create(&raw), "creating options");
    Options options(raw);
    if (!config.empty()) check(ms_options_load(options.get(), config.c_str()), "reading config");
    for (const auto& [key, opt] : flags) {
      if (opt->count() == 0) continue;
      check(ms_options_set(options.get(), key.c_str(), values[key].c_str()),
            ("option --" + key).c_str());
    }

    if (*make_world) {
      ms_trajectories* w = nullptr;
      ms_bundle* b = nullptr;
      check(ms_make_world(options.get(), &w, &b), "make-world");
      Trajs world(w);
      Bundle bundle(b);
      check(ms_trajectories_save(world.get(), path_in(out_dir, "world.csv").c_str()),
            "writing world.csv");
      check(ms_bundle_save(bundle.get(), out_dir.c_str()), "writing bundle");
      std::size_t n = 0;
      check(ms_trajectories_count(world.get(), &n), "counting agents");
      std::printf("wrote %zu agents and the reference bundle to %s\n", n, out_dir.c_str());
    } else if (*fit) {
      Bundle bundle = load_bundle(bundle_dir);
      const std::string path = path_in(out_dir, "params.csv");
      check(ms_fit_params(bundle.get(), path.c_str()), "fit-quantiles");
      std::printf("wrote %s\n", path.c_str());
    } else if (*generate) {
      Bundle bundle = load_bundle(bundle_dir);
      ms_run* r = nullptr;
      check(ms_generate(bundle.get(), options.get(), &r), "generate");
      Run run(r);
      check(ms_run_save(run.get(), out_dir.c_str()), "writing results");
      ms_report* rep = nullptr;
      check(ms_run_report(run.get(), &rep), "report");
      Report report(rep);
      std::fputs(ms_report_summary(report.get()), stdout);
    } else if (*evaluate) {
      Bundle bundle = load_bundle(bundle_dir);
      ms_trajectories* t = nullptr;
      check(ms_trajectories_load(trajectories_path.c_str(), &t), "loading trajectories");
      Trajs trajs(t);
      ms_report* rep = nullptr;
      check(ms_evaluate(trajs.get(), bundle.get(), options.get(), &rep), "evaluate");
      Report report(rep);
      check(ms_report_save(report.get(), path_in(out_dir, "loss_report.json").c_str()),
            "writing loss_report.json");
      std::fputs(ms_report_summary(report.get()), stdout);
    } else if (*grid) {
      Bundle bundle = load_bundle(bundle_dir);
      check(ms_grid_search(bundle.get(), options.get(), out_dir.c_str()), "grid-search");
      std::printf("wrote grid.csv, grid_means.csv and grid_failures.csv to %s\n",
                  out_dir.c_str());
    }
  } catch (const Failure& f) {
    return f.status;
  }
  return 0;
}
