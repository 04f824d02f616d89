#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "mobsynth/error.hpp"
#include "mobsynth/lognormal.hpp"
#include "mobsynth/rng.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace mobsynth;
using mobsynth::test::cell;

namespace {

double lognormal_quantile(double mu, double sigma, double z) {
  return std::exp(mu + sigma * oracle::probit(z));
}

}  // namespace

TEST_CASE("probit examples") {
  CHECK(std::abs(probit(0.5)) < 1e-15);
  CHECK(std::abs(probit(0.9) - 1.2815516) < 1e-7);
  for (double z : {0.01, 0.1, 0.3, 0.7, 0.95}) {
    CHECK(probit(z) == doctest::Approx(-probit(1 - z)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(probit(0.0), InputError);
  CHECK_THROWS_AS(probit(1.0), InputError);
}

TEST_CASE("probit matches a 50-digit oracle at 99 grid points") {
  double worst = 0;
  for (int k = 1; k <= 99; ++k) {
    const double z = k / 100.0;
    worst = std::max(worst, std::abs(probit(z) - oracle::probit(z)));
  }
  CHECK(worst < 1e-7);
}

TEST_CASE("probit deep tails") {
  for (double z : {1e-10, 1e-6, 1e-3, 0.999, 1 - 1e-9}) {
    CHECK(std::abs(probit(z) - oracle::probit(z)) < 1e-7);
  }
}

TEST_CASE("fit_quantiles recovers exact parameters") {
  const DTParams p = fit_quantiles(lognormal_quantile(1, 0.5, 0.5),
                                   lognormal_quantile(1, 0.5, 0.7),
                                   lognormal_quantile(1, 0.5, 0.9));
  CHECK(std::abs(p.mu - 1.0) < 1e-9);
  CHECK(std::abs(p.sigma - 0.5) < 1e-9);

  Rng rng(20240101);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const double mu = 2 + 4 * rng.uniform();
    const double sigma = 0.1 + 1.4 * rng.uniform();
    const DTParams fit = fit_quantiles(lognormal_quantile(mu, sigma, 0.5),
                                       lognormal_quantile(mu, sigma, 0.7),
                                       lognormal_quantile(mu, sigma, 0.9));
    worst = std::max({worst, std::abs(fit.mu - mu), std::abs(fit.sigma - sigma)});
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("fit_quantiles degenerate and invalid rows") {
  const DTParams p = fit_quantiles(30, 30, 30);
  CHECK(p.mu == doctest::Approx(std::log(30.0)).epsilon(1e-15));
  CHECK(p.sigma == kMinSigma);
  CHECK_THROWS_AS(fit_quantiles(0, 30, 40), InputError);
  CHECK_THROWS_AS(fit_quantiles(40, 30, 50), InputError);
  CHECK_THROWS_AS(fit_quantiles(30, 40, std::nan("")), InputError);
}

TEST_CASE("truncated_quantile") {
  const DTParams p{4.0, 0.6};
  CHECK(truncated_quantile(p, 15, 0.0) == 15.0);
  CHECK(truncated_quantile(DTParams{std::log(60.0), 0.5}, 1e-9, 0.5) ==
        doctest::Approx(60.0).epsilon(1e-9));

  SUBCASE("median of rejection-sampled draws") {
    Rng rng(7);
    std::vector<double> draws;
    draws.reserve(1000000);
    while (draws.size() < 1000000) {
      const double t = std::exp(p.mu + p.sigma * rng.normal());
      if (t >= 15) draws.push_back(t);
    }
    auto mid = draws.begin() + static_cast<std::ptrdiff_t>(draws.size() / 2);
    std::nth_element(draws.begin(), mid, draws.end());
    CHECK(std::abs(truncated_quantile(p, 15, 0.5) - *mid) < 0.5);
  }

  SUBCASE("monotone in u and never below t_min") {
    Rng rng(11);
    for (int i = 0; i < 1000; ++i) {
      const DTParams q{1 + 5 * rng.uniform(), 0.05 + 1.5 * rng.uniform()};
      const double a = rng.uniform(), b = rng.uniform();
      const double lo = truncated_quantile(q, 15, std::min(a, b));
      const double hi = truncated_quantile(q, 15, std::max(a, b));
      CHECK(lo >= 15);
      CHECK(lo <= hi);
    }
  }
}

TEST_CASE("fit_table") {
  CHECK(fit_table(QuantileTable{}).empty());
  QuantileTable t;
  t.rows[CellHour{cell("1"), 8}] = QuantileRow{20, 25, 30, 40, 60, 9};
  t.rows[CellHour{cell("2"), 9}] = QuantileRow{20, 25, 35, 45, 70, 9};
  const DTParamTable fit = fit_table(t);
  CHECK(fit.size() == 2);
  CHECK(fit.at(CellHour{cell("1"), 8}) == fit_quantiles(30, 40, 60));
}

TEST_CASE("fill_missing") {
  DTParamTable partial;
  partial[CellHour{cell("10"), 8}] = DTParams{3.0, 0.4};
  partial[CellHour{cell("11"), 8}] = DTParams{5.0, 0.6};
  partial[CellHour{cell("20"), 9}] = DTParams{9.0, 0.9};

  SUBCASE("mean of defined siblings") {
    const DTParamTable full = fill_missing(partial, {CellHour{cell("12"), 8}});
    CHECK(full.at(CellHour{cell("12"), 8}).mu == doctest::Approx(4.0));
    CHECK(full.at(CellHour{cell("12"), 8}).sigma == doctest::Approx(0.5));
    // Hour 9 values never leak into hour 8.
    CHECK(full.size() == 4);
  }
  SUBCASE("single sibling copied") {
    const DTParamTable full = fill_missing(partial, {CellHour{cell("21"), 9}});
    CHECK(full.at(CellHour{cell("21"), 9}) == DTParams{9.0, 0.9});
  }
  SUBCASE("falls back to the whole region") {
    const DTParamTable full = fill_missing(partial, {CellHour{cell("30"), 8}});
    CHECK(full.at(CellHour{cell("30"), 8}).mu == doctest::Approx(4.0));
  }
  SUBCASE("unfillable hour") {
    CHECK_THROWS_AS(fill_missing(partial, {CellHour{cell("12"), 3}}), InfeasibleError);
  }
  SUBCASE("complete table unchanged, idempotent") {
    const std::set<CellHour> universe = {CellHour{cell("10"), 8}, CellHour{cell("11"), 8}};
    CHECK(fill_missing(partial, universe) == partial);
    const auto u2 = full_day_universe({cell("10"), cell("12"), cell("20")});
    DTParamTable day = partial;
    for (int h = 0; h < 24; ++h) day[CellHour{cell("13"), h}] = DTParams{2.0 + h, 0.3};
    const DTParamTable once = fill_missing(day, u2);
    CHECK(fill_missing(once, u2) == once);
  }
}

TEST_CASE("full_day_universe") {
  const auto u = full_day_universe({cell("1"), cell("2")});
  CHECK(u.size() == 48);
  CHECK(u.contains(CellHour{cell("2"), 23}));
}
