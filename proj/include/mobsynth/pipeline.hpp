#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "mobsynth/anneal.hpp"
#include "mobsynth/lognormal.hpp"
#include "mobsynth/losses.hpp"
#include "mobsynth/model.hpp"

namespace mobsynth {

// Dwell-travel table the engine runs on: quantile rows fitted, then filled
// over every (cell, hour) of the OD cells, the homes and `extra_cells`.
DTParamTable engine_table(const ReferenceBundle& bundle,
                          const std::set<CellCode>& extra_cells = {});

struct GroupReport {
  Demographic group;
  std::int64_t agents = 0;
  RawLosses raw;
  Normalizers normalizers;  // losses of the group's all-at-home state
  NormalizedLosses normalized;
  double total = 0;
};

struct LossReport {
  Weights weights;
  std::vector<GroupReport> groups;  // groups with at least one trajectory
  // Pooled over the whole population. OD pools the numerators and
  // denominators of every group in the reference, including groups with no
  // synthetic agents.
  double od_eval = 0;
  double sqrt_od_eval = 0;
  double vf = 0;
  double dt = 0;
  double fluctuation_bound = 0;  // 1 / sqrt(20)
};

struct EvalConfig {
  Weights weights;
  int n_max = kDefaultVisitCap;
  double t_min = kMinGapMinutes;
};

// From-scratch losses of `trajs` against `bundle`. Throws InputError if a
// trajectory's group has no reference OD.
LossReport evaluate(std::span<const Trajectory> trajs, const ReferenceBundle& bundle,
                    const EvalConfig& cfg = {});

// Pretty-printed JSON, keys in a fixed order, trailing newline.
std::string report_json(const LossReport& report);

// Human-readable summary lines, including the fluctuation bound.
std::string report_summary(const LossReport& report);

struct GenerateResult {
  MergedRun run;
  LossReport report;
};

// Anneals every demographic of the census. Group seeds derive from
// cfg.seed and the group label.
GenerateResult generate(const ReferenceBundle& bundle, const RunConfig& cfg,
                        int jobs = 1);

// Writes trajectories.csv, loss_report.json and trace_<group>.csv.
void save_generate(const std::filesystem::path& dir, const GenerateResult& result);

struct GridSearchPlan {
  std::vector<double> w_vf = {0, 0.001, 0.01, 0.1};
  std::vector<double> w_dt = {0, 0.02, 0.05, 0.1, 0.2, 0.5, 1, 2};
  std::vector<std::uint64_t> seeds = {1};
  int jobs = 1;

  // Throws InputError on empty lists, negative weights or jobs < 1.
  void validate() const;
};

struct GridRow {
  double w_vf = 0;
  double w_dt = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;  // set when !ok
  double l_od_eval = 0;
  double sqrt_l_od_eval = 0;
  double l_vf = 0;
  double l_dt = 0;
};

struct GridMean {
  double w_vf = 0;
  double w_dt = 0;
  std::int64_t runs = 0;  // successful seeds
  double l_od_eval = 0;
  double sqrt_l_od_eval = 0;
  double l_vf = 0;
  double l_dt = 0;
};

// One generate per (w_vf, w_dt, seed), w_od = 1, rows ordered by w_vf,
// then w_dt, then seed. A failing cell is recorded and the search goes on.
std::vector<GridRow> run_grid_search(const GridSearchPlan& plan,
                                     const ReferenceBundle& bundle,
                                     const RunConfig& base);

// Means over the successful seeds of each weight cell, in row order.
std::vector<GridMean> grid_means(std::span<const GridRow> rows);

// grid.csv, grid_means.csv and grid_failures.csv.
void write_grid(std::ostream& out, std::span<const GridRow> rows);
void write_grid_means(std::ostream& out, std::span<const GridMean> means);
void write_grid_failures(std::ostream& out, std::span<const GridRow> rows);
void save_grid(const std::filesystem::path& dir, std::span<const GridRow> rows);

}  // namespace mobsynth
