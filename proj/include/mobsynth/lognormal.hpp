#pragma once

#include <map>
#include <set>

#include "mobsynth/model.hpp"

namespace mobsynth {

// Log-normal dwell-travel law for one (cell, hour): ln T ~ N(mu, sigma^2).
struct DTParams {
  double mu = 0.0;
  double sigma = 1.0;

  friend bool operator==(const DTParams&, const DTParams&) = default;
};

using DTParamTable = std::map<CellHour, DTParams>;

inline constexpr double kMinSigma = 1e-6;

// Standard normal CDF and its upper tail, via erfc.
double normal_cdf(double x) noexcept;
double normal_sf(double x) noexcept;

// Inverse of the standard normal CDF. Rational starting point refined by one
// Halley step, so normal_cdf(probit(z)) reproduces z to ~1e-15. Throws
// InputError outside (0, 1).
double probit(double z);

// Least-squares line ln T = mu + sigma * probit(z) through the 50/70/90%
// quantiles. sigma is clamped to kMinSigma. Throws InputError on a
// non-positive, non-finite or decreasing quantile.
DTParams fit_quantiles(double t50, double t70, double t90);

// Inverse CDF of the log-normal truncated to T >= t_min, evaluated at u in
// [0, 1). u == 0 returns t_min exactly.
double truncated_quantile(const DTParams& p, double t_min, double u);

// Per-row fit_quantiles. Errors carry the (cell, hour) of the bad row.
DTParamTable fit_table(const QuantileTable& table);

// Completes `partial` over `universe`. A missing (cell, hour) takes the mean
// (mu, sigma) of all defined cells of the same hour under its finest ancestor
// that has any; the whole region (empty prefix) is the last resort. Throws
// InfeasibleError("hour h unfillable") if a needed hour has no defined cell.
DTParamTable fill_missing(const DTParamTable& partial,
                          const std::set<CellHour>& universe);

// Every (cell, hour) for the given cells and all 24 hours.
std::set<CellHour> full_day_universe(const std::set<CellCode>& cells);

}  // namespace mobsynth
