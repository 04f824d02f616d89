#include "mobsynth/lognormal.hpp"

#include <array>
#include <cmath>
#include <string>

#include "mobsynth/error.hpp"

namespace mobsynth {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kSqrt2Pi = 2.50662827463100050242;

// Acklam's rational approximation for p <= 0.5, |rel err| < 1.15e-9.
double lower_probit_initial(double p) {
  static constexpr std::array<double, 6> a = {
      -3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr std::array<double, 5> b = {
      -5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01};
  static constexpr std::array<double, 6> c = {
      -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr std::array<double, 4> d = {
      7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (p < p_low) {
    const double q = std::sqrt(-2 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

// One Halley step on the lower-tail CDF, which erfc evaluates without
// cancellation for x <= 0.
double lower_probit(double p) {
  double x = lower_probit_initial(p);
  const double e = normal_cdf(x) - p;
  const double u = e * kSqrt2Pi * std::exp(x * x / 2);
  x -= u / (1 + x * u / 2);
  return x;
}

}  // namespace

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x * kInvSqrt2); }

double normal_sf(double x) noexcept { return 0.5 * std::erfc(x * kInvSqrt2); }

double probit(double z) {
  if (!(z > 0.0 && z < 1.0)) {
    throw InputError("probit: argument " + std::to_string(z) +
                     " outside (0, 1)");
  }
  if (z == 0.5) return 0.0;
  if (z < 0.5) return lower_probit(z);
  // 1 - z is exact for z in [0.5, 1).
  return -lower_probit(1.0 - z);
}

DTParams fit_quantiles(double t50, double t70, double t90) {
  const std::array<double, 3> t = {t50, t70, t90};
  for (double v : t) {
    if (!std::isfinite(v) || v <= 0) {
      throw InputError("fit_quantiles: quantiles must be positive and finite");
    }
  }
  if (!(t50 <= t70 && t70 <= t90)) {
    throw InputError("fit_quantiles: quantiles must be non-decreasing");
  }
  static const std::array<double, 3> z = {probit(0.5), probit(0.7),
                                          probit(0.9)};
  const double zbar = (z[0] + z[1] + z[2]) / 3;
  std::array<double, 3> y{};
  for (std::size_t i = 0; i < 3; ++i) y[i] = std::log(t[i]);
  const double ybar = (y[0] + y[1] + y[2]) / 3;
  double sxy = 0;
  double sxx = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    sxy += (z[i] - zbar) * (y[i] - ybar);
    sxx += (z[i] - zbar) * (z[i] - zbar);
  }
  const double sigma = sxy / sxx;
  const double mu = ybar - sigma * zbar;
  return DTParams{mu, std::max(sigma, kMinSigma)};
}

double truncated_quantile(const DTParams& p, double t_min, double u) {
  if (!(u >= 0.0 && u < 1.0)) {
    throw InputError("truncated_quantile: u must be in [0, 1)");
  }
  if (!(t_min > 0)) throw InputError("truncated_quantile: t_min must be > 0");
  if (u == 0.0) return t_min;
  const double zmin = (std::log(t_min) - p.mu) / p.sigma;
  // Pick the tail that keeps the target probability away from 1.
  const double lower = normal_cdf(zmin) + normal_sf(zmin) * u;
  const double upper = normal_sf(zmin) * (1 - u);
  double value;
  if (lower < 0.5) {
    value = std::exp(p.mu + p.sigma * probit(lower));
  } else {
    if (!(upper > 0)) return t_min;
    value = std::exp(p.mu - p.sigma * probit(upper));
  }
  return std::max(value, t_min);
}

DTParamTable fit_table(const QuantileTable& table) {
  DTParamTable out;
  for (const auto& [key, row] : table.rows) {
    try {
      out.emplace(key, fit_quantiles(row.q50, row.q70, row.q90));
    } catch (const InputError& e) {
      throw InputError("row (" + key.cell.str() + ", " +
                       std::to_string(key.hour) + "): " + e.what());
    }
  }
  return out;
}

DTParamTable fill_missing(const DTParamTable& partial,
                          const std::set<CellHour>& universe) {
  struct Sum {
    double mu = 0;
    double sigma = 0;
    int count = 0;
  };
  // Per hour: prefix -> running sums over defined cells. The map is ordered,
  // so summation order never depends on hashing.
  std::array<std::map<std::string, Sum>, kHoursPerDay> sums;
  for (const auto& [key, p] : partial) {
    const std::string& code = key.cell.str();
    auto& by_prefix = sums[static_cast<std::size_t>(key.hour)];
    for (std::size_t len = 0; len <= code.size(); ++len) {
      Sum& s = by_prefix[code.substr(0, len)];
      s.mu += p.mu;
      s.sigma += p.sigma;
      ++s.count;
    }
  }

  DTParamTable out = partial;
  for (const CellHour& key : universe) {
    if (partial.count(key) != 0) continue;
    if (key.hour < 0 || key.hour >= kHoursPerDay) {
      throw InputError("fill_missing: hour outside 0..23");
    }
    const auto& by_prefix = sums[static_cast<std::size_t>(key.hour)];
    if (by_prefix.empty()) {
      throw InfeasibleError("hour " + std::to_string(key.hour) + " unfillable");
    }
    const std::string& code = key.cell.str();
    for (std::size_t len = code.size(); len-- > 0;) {
      auto it = by_prefix.find(code.substr(0, len));
      if (it == by_prefix.end()) continue;
      const Sum& s = it->second;
      out.emplace(key, DTParams{s.mu / s.count, s.sigma / s.count});
      break;
    }
  }
  return out;
}

std::set<CellHour> full_day_universe(const std::set<CellCode>& cells) {
  std::set<CellHour> out;
  for (const CellCode& c : cells) {
    for (int h = 0; h < kHoursPerDay; ++h) out.insert(CellHour{c, h});
  }
  return out;
}

}  // namespace mobsynth
