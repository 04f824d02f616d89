#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "mobsynth/lognormal.hpp"
#include "mobsynth/model.hpp"

namespace mobsynth {

// Parameters of a synthetic ground-truth city on a 2^levels x 2^levels
// quadtree grid. Empty per-cell vectors and laws fall back to the built-in
// defaults, which are functions of the grid size only.
struct WorldSpec {
  int levels = 3;
  std::map<Demographic, std::int64_t> population = {
      {Demographic{Sex::male, AgeGroup::age20s}, 1000},
      {Demographic{Sex::female, AgeGroup::age40s}, 1000}};
  std::vector<double> attraction;  // per cell, index y * side + x
  std::vector<double> residence;   // home weights, same indexing
  DTParamTable dwell_law;          // true law per (cell, hour)
  double visit_mu = 1.0;
  double visit_sigma = 0.5;
  int visit_support = 50;
  // Explicit P(N = k + 1); overrides the log-normal visit law when set.
  std::vector<double> visit_pmf;
  double return_home = 0.6;   // chance a multi-stay day ends at home
  double gravity_scale = 2.0; // distance decay of destination choice, cells
  std::int64_t threshold = 1;
  std::uint64_t seed = 1;

  int side() const noexcept { return 1 << levels; }

  // Throws InputError on a malformed spec.
  void validate() const;
};

// Most stays that fit in a day with every interval >= 15 min.
inline constexpr int kMaxStaysPerDay = kMinutesPerDay / kMinGapMinutes;

std::vector<double> default_attraction(int levels);
std::vector<double> default_residence(int levels);
// Hour- and cell-dependent log-normal dwell-travel law.
DTParamTable default_dwell_law(int levels);

// Samples one full day per resident. Deterministic per seed.
std::vector<Trajectory> generate_world(const WorldSpec& spec);

// Linear interpolation between closest ranks ("type 7"); `sorted` must be
// ascending and non-empty.
double type7_quantile(std::span<const double> sorted, double p);

// Five-quantile summary of dwell-travel observations per (cell, hour);
// rows with fewer than `threshold` samples are suppressed.
QuantileTable aggregate_quantiles(std::span<const Trajectory> trajs,
                                  std::int64_t threshold);

// Suppressed demographic OD matrices, pooled quantiles and home census of a
// world.
ReferenceBundle reference_inputs(std::span<const Trajectory> world,
                                 std::int64_t threshold);
ReferenceBundle reference_inputs(const WorldSpec& spec);

}  // namespace mobsynth
