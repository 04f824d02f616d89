#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mobsynth/anneal.hpp"
#include "mobsynth/pipeline.hpp"
#include "mobsynth/worldgen.hpp"

namespace mobsynth {

// Every tunable of the pipeline, settable by key. Keys use dashes; an
// underscore is accepted in place of any dash.
//
//   seed, jobs, tau-max, t-max, t-min, n-max, threshold, steps-per-agent,
//   w-od, w-vf, w-dt, levels, population (e.g. "male_20s:1000,female_40s:1000"),
//   grid-w-vf, grid-w-dt, grid-seeds (comma lists)
struct Options {
  std::uint64_t seed = 1;
  int jobs = 1;
  std::int64_t tau_max = 0;  // 0: steps-per-agent * population
  double t_max = 1.0;
  double t_min = 1e-3;
  int n_max = kDefaultVisitCap;
  std::int64_t threshold = 1;
  std::int64_t steps_per_agent = 2000;
  Weights weights;
  int levels = 3;
  std::map<Demographic, std::int64_t> population = WorldSpec{}.population;
  std::vector<double> grid_w_vf = GridSearchPlan{}.w_vf;
  std::vector<double> grid_w_dt = GridSearchPlan{}.w_dt;
  std::vector<std::uint64_t> grid_seeds;  // empty: {seed}

  // Throws InputError on an unknown key or malformed value.
  void set(std::string_view key, std::string_view value);

  RunConfig run_config() const;
  WorldSpec world_spec() const;
  GridSearchPlan grid_plan() const;
};

// "male_20s" -> Demographic. Throws InputError.
Demographic parse_demographic(std::string_view text);

// Flat "key = value" lines; blank lines and lines starting with '#' are
// skipped. Throws InputError("<source>:<line>: ...").
std::vector<std::pair<std::string, std::string>> parse_config(
    std::istream& in, std::string_view source);
void load_config(const std::filesystem::path& path, Options& options);

}  // namespace mobsynth
