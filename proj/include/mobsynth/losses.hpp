#pragma once

#include <span>
#include <vector>

#include "mobsynth/lognormal.hpp"
#include "mobsynth/model.hpp"

namespace mobsynth {

// Penalty on synthetic flow between cell pairs with no observed flow.
inline constexpr double kUnobservedFlowPenalty = 15.0;

inline constexpr int kDefaultVisitCap = 50;
inline constexpr double kVisitLawMu = 1.0;
inline constexpr double kVisitLawSigma = 0.5;

// Probability mass over daily visit counts N = 1..n_max; p[k] is P(N = k+1).
struct VisitPmf {
  std::vector<double> p;

  int n_max() const noexcept { return static_cast<int>(p.size()); }
};

// sum c * (F_s - F_r)^2 / sum F_r^2 over the union of keys, with c = 1 on
// observed entries and 15 on unobserved ones. Throws InfeasibleError
// ("undefined normalization") when F_r is empty.
double loss_od(const OdMatrix& synthetic, const OdMatrix& reference);

// Same with c = 1 everywhere; its square root is the mean relative OD error.
double loss_od_eval(const OdMatrix& synthetic, const OdMatrix& reference);

// Discrete log-normal visit law P(N) ~ exp(-(ln N - mu)^2 / 2 sigma^2) / N,
// renormalized over 1..n_max.
VisitPmf reference_visit_pmf(int n_max, double mu = kVisitLawMu,
                             double sigma = kVisitLawSigma);

// Histogram of visit counts from raw counts[k] = #agents with N = k+1.
VisitPmf visit_pmf_from_counts(std::span<const std::int64_t> counts);

// Visit-count pmf of a population; counts above n_max land in n_max.
VisitPmf visit_pmf_of(std::span<const Trajectory> trajs, int n_max);

// Order-1 Wasserstein distance on the integer support 1..n_max.
double wasserstein_discrete(const VisitPmf& p, const VisitPmf& q);

double loss_vf(std::span<const Trajectory> trajs, int n_max = kDefaultVisitCap);

// Mean absolute gap between the sorted samples and the truncated log-normal
// quantiles at the midpoints (k + 0.5) / n.
double wasserstein_dt(std::vector<double> samples, const DTParams& p,
                      double t_min);

// n-weighted mean of wasserstein_dt over the (cell, hour) groups of all
// dwell-travel observations. Throws InputError on a (cell, hour) missing
// from the table.
double loss_dt(std::span<const Trajectory> trajs, const DTParamTable& table,
               double t_min = kMinGapMinutes);

struct RawLosses {
  double od = 0;
  double od_eval = 0;
  double vf = 0;
  double dt = 0;
};

// Loss values of the initial all-at-home state.
struct Normalizers {
  double od = 1;
  double vf = 1;
  double dt = 1;

  // Throws InfeasibleError if any normalizer is not strictly positive.
  void validate() const;
};

struct NormalizedLosses {
  double od = 0;
  double vf = 0;
  double dt = 0;
};

NormalizedLosses normalize(const RawLosses& raw, const Normalizers& norms);

double loss_total(const RawLosses& raw, const Normalizers& norms,
                  const Weights& w);

// Mean relative error expected from averaging over `days` independent days
// (central limit theorem): 1 / sqrt(days).
double fluctuation_bound(double days);

// OD inputs are averaged over roughly 20 weekdays.
inline constexpr double kOdAggregationDays = 20.0;

}  // namespace mobsynth
