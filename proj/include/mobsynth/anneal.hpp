#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "mobsynth/lognormal.hpp"
#include "mobsynth/loss_state.hpp"
#include "mobsynth/losses.hpp"
#include "mobsynth/model.hpp"
#include "mobsynth/rng.hpp"

namespace mobsynth {

// Two-phase geometric cooling: t_max -> t_min over each half of the run,
// reset to t_max at tau_max / 2.
struct Schedule {
  std::int64_t tau_max = 0;  // 0: steps_per_agent * population
  double t_max = 1.0;
  double t_min = 1e-3;

  // Throws InputError unless tau_max is even and >= 2 and
  // 0 < t_min < t_max.
  void validate() const;
};

double temperature(std::int64_t tau, const Schedule& s);

struct RunConfig {
  Weights weights;
  Schedule schedule;
  std::uint64_t seed = 0;
  std::int64_t steps_per_agent = 2000;
  int n_max = kDefaultVisitCap;
  double t_min_dwell = kMinGapMinutes;
  // Chance that a destination is drawn from every OD cell instead of the
  // current cell's observed destinations.
  double pool_fallback = 0.05;
};

// Move-kind mixture: relocate, insert, remove, retime.
inline constexpr double kRelocateShare = 0.40;
inline constexpr double kInsertShare = 0.25;
inline constexpr double kRemoveShare = 0.25;
inline constexpr double kRetimeShare = 0.10;
// Share of inserts and retimes whose arrival hour is drawn from an observed
// reference flow out of the preceding cell.
inline constexpr double kHourMatchedShare = 0.5;

// One trajectory per resident, at home all day; agent ids dense from 0 in
// census order. Throws InputError on an empty census.
std::vector<Trajectory> init_state(const Census& population);

// Draws a valid move, retrying up to 16 times before giving up with a null
// move. Never proposes to move or delete the home stay.
Move propose_move(const LossState& state, Rng& rng, double pool_fallback = 0.05);

// Metropolis rule on an energy difference.
bool accept(double delta, double temp, Rng& rng);

struct TracePoint {
  double tau_frac = 0;
  NormalizedLosses normalized;
  double total = 0;
};

struct RunResult {
  Demographic group;
  Weights weights;
  std::vector<Trajectory> trajectories;
  RawLosses initial;
  RawLosses final_losses;
  Normalizers normalizers;
  std::vector<TracePoint> trace;
  std::int64_t tau_max = 0;
  std::int64_t accepted = 0;
  std::int64_t null_moves = 0;
};

// Anneals one demographic group from the all-at-home state. The annealing
// energy is population * L_tot, so temperatures are per agent. Throws
// InfeasibleError if a normalizer is zero.
RunResult optimize(const OdMatrix& reference, const DTParamTable& table,
                   const Census& population, const RunConfig& cfg);

struct GroupInput {
  OdMatrix od;
  Census census;
};

struct MergedRun {
  std::vector<Trajectory> trajectories;  // ordered by (sex, age, agent id)
  std::vector<RunResult> groups;         // ordered by demographic
};

// Seed of one group's run.
std::uint64_t group_seed(std::uint64_t seed, const Demographic& group);

// Independent optimize per group on up to `jobs` threads; agent ids of the
// merged population are renumbered densely in merge order.
MergedRun run_all_groups(const std::map<Demographic, GroupInput>& inputs,
                         const DTParamTable& table, const RunConfig& cfg,
                         int jobs = 1);

}  // namespace mobsynth
