#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "mobsynth/error.hpp"
#include "mobsynth/losses.hpp"
#include "mobsynth/rng.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace mobsynth;
using namespace mobsynth::test;

namespace {

OdMatrix od(std::initializer_list<std::pair<OdKey, std::int64_t>> entries) {
  OdMatrix m(kMale20s);
  for (const auto& [k, v] : entries) m.add(k, v);
  return m;
}

const OdKey kAB8{CellCode("1"), CellCode("2"), 8};
const OdKey kBA9{CellCode("2"), CellCode("1"), 9};

std::vector<double> random_pmf(Rng& rng, int n) {
  std::vector<double> p(static_cast<std::size_t>(n));
  for (double& x : p) x = rng.bernoulli(0.2) ? 0.0 : rng.uniform();
  p[static_cast<std::size_t>(rng.between(0, n - 1))] += 0.1;
  const double s = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& x : p) x /= s;
  return p;
}

}  // namespace

TEST_CASE("loss_od examples") {
  const OdMatrix ref = od({{kAB8, 10}});
  CHECK(loss_od(ref, ref) == 0.0);
  CHECK(loss_od(od({{kAB8, 8}}), ref) == doctest::Approx(0.04));
  const OdMatrix extra = od({{kAB8, 10}, {kBA9, 1}});
  CHECK(loss_od(extra, ref) == doctest::Approx(0.15));
  CHECK(loss_od_eval(extra, ref) == doctest::Approx(0.01));
  CHECK(loss_od_eval(ref, ref) == 0.0);
  CHECK(loss_od(OdMatrix(kMale20s), ref) == 1.0);
  CHECK_THROWS_AS(loss_od(ref, OdMatrix(kMale20s)), InfeasibleError);
}

TEST_CASE("loss_od dominates loss_od_eval") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    OdMatrix s(kMale20s), r(kMale20s);
    for (int k = 0; k < 10; ++k) {
      const OdKey key{synth_code(static_cast<std::uint32_t>(rng.between(0, 1)), 0, 1),
                      synth_code(static_cast<std::uint32_t>(rng.between(0, 1)), 1, 1),
                      static_cast<int>(rng.between(0, 23))};
      if (rng.bernoulli(0.5)) s.add(key, rng.between(1, 5));
      r.add(key, rng.between(1, 5));
    }
    CHECK(loss_od_eval(s, r) <= loss_od(s, r));
  }
}

TEST_CASE("reference visit pmf") {
  const VisitPmf p = reference_visit_pmf(50);
  REQUIRE(p.n_max() == 50);
  auto f = [](int n) {
    const double l = std::log(n) - 1.0;
    return std::exp(-l * l / 0.5) / n;
  };
  CHECK(f(1) == doctest::Approx(std::exp(-2.0)));
  CHECK(f(2) == doctest::Approx(0.4141).epsilon(1e-4));
  CHECK(f(3) == doctest::Approx(0.3269).epsilon(1e-3));
  CHECK(p.p[0] / p.p[1] == doctest::Approx(f(1) / f(2)));
  CHECK(std::max_element(p.p.begin(), p.p.end()) - p.p.begin() == 1);
  for (int n_max : {2, 5, 50, 96}) {
    const VisitPmf q = reference_visit_pmf(n_max);
    CHECK(std::abs(std::accumulate(q.p.begin(), q.p.end(), 0.0) - 1.0) < 1e-12);
  }
}

TEST_CASE("wasserstein_discrete examples") {
  VisitPmf a{{1, 0, 0}}, b{{0, 0, 1}};
  CHECK(wasserstein_discrete(a, b) == 2.0);
  CHECK(wasserstein_discrete(a, a) == 0.0);
}

TEST_CASE("wasserstein_discrete matches a min-cost transport oracle") {
  Rng rng(42);
  double worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = static_cast<int>(rng.between(1, 10));
    const auto p = random_pmf(rng, n), q = random_pmf(rng, n);
    worst = std::max(worst, std::abs(wasserstein_discrete(VisitPmf{p}, VisitPmf{q}) -
                                     oracle::transport(p, q)));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("loss_vf") {
  const VisitPmf ref = reference_visit_pmf(50);
  double mean = 0;
  for (int k = 0; k < 50; ++k) mean += (k + 1) * ref.p[static_cast<std::size_t>(k)];
  const std::vector<Trajectory> homes = {traj(0, kMale20s, {{"1", 0}}),
                                         traj(1, kMale20s, {{"2", 0}})};
  CHECK(loss_vf(homes) == doctest::Approx(mean - 1).epsilon(1e-12));

  SUBCASE("sampled population") {
    Rng rng(5);
    std::vector<std::int64_t> counts(50, 0);
    for (int i = 0; i < 10000; ++i) ++counts[rng.weighted(ref.p)];
    CHECK(wasserstein_discrete(visit_pmf_from_counts(counts), ref) <= 0.05);
  }
  SUBCASE("order invariant") {
    std::vector<Trajectory> ts = {traj(0, kMale20s, {{"1", 0}, {"2", 60}}),
                                  traj(1, kMale20s, {{"2", 0}}),
                                  traj(2, kMale20s, {{"3", 0}, {"1", 60}, {"2", 120}})};
    const double before = loss_vf(ts);
    std::reverse(ts.begin(), ts.end());
    CHECK(loss_vf(ts) == before);
  }
}

TEST_CASE("wasserstein_dt") {
  const DTParams p{4.0, 0.6};
  CHECK(wasserstein_dt({truncated_quantile(p, 15, 0.5)}, p, 15) == doctest::Approx(0.0));
  const DTParams point{std::log(60.0), 1e-6};
  CHECK(wasserstein_dt({50, 70}, point, 15) == doctest::Approx(10.0).epsilon(1e-4));
  CHECK(wasserstein_dt({70, 50}, point, 15) == doctest::Approx(10.0).epsilon(1e-4));

  Rng rng(9);
  std::vector<double> draws;
  while (draws.size() < 100000) {
    const double t = std::exp(p.mu + p.sigma * rng.normal());
    if (t >= 15) draws.push_back(t);
  }
  CHECK(wasserstein_dt(draws, p, 15) <= 1.0);
}

TEST_CASE("loss_dt weighted mean over groups") {
  DTParamTable table;
  table[CellHour{cell("1"), 0}] = DTParams{std::log(1432.0), 1e-9};
  table[CellHour{cell("2"), 0}] = DTParams{std::log(1436.0), 1e-9};
  const std::vector<Trajectory> ts = {
      traj(0, kMale20s, {{"1", 0}}), traj(1, kMale20s, {{"2", 0}}),
      traj(2, kMale20s, {{"2", 0}}), traj(3, kMale20s, {{"2", 0}})};
  CHECK(loss_dt(ts, table) == doctest::Approx(5.0).epsilon(1e-6));

  const std::vector<Trajectory> one = {traj(0, kMale20s, {{"1", 0}})};
  CHECK(loss_dt(one, table) ==
        doctest::Approx(wasserstein_dt({1440}, table.at(CellHour{cell("1"), 0}), 15)));

  const std::vector<Trajectory> missing = {traj(0, kMale20s, {{"3", 0}})};
  CHECK_THROWS_AS(loss_dt(missing, table), InputError);
}

TEST_CASE("loss_total and normalization") {
  const RawLosses raw{0.5, 0.1, 0.2, 30};
  const Normalizers norms{0.5, 0.2, 30};
  const Weights w{1, 0.1, 0.2};
  CHECK(loss_total(raw, norms, w) == doctest::Approx(1.3));
  CHECK(loss_total(RawLosses{0.25, 0, 0.2, 30}, norms, Weights{}) == doctest::Approx(0.5));
  CHECK(loss_total(RawLosses{0.5, 0, 0.4, 30}, norms, w) ==
        doctest::Approx(1 + 2 * 0.1 + 0.2));
  const NormalizedLosses n = normalize(RawLosses{0.25, 0, 0.1, 15}, norms);
  CHECK(n.od == doctest::Approx(0.5));
  CHECK(n.vf == doctest::Approx(0.5));
  CHECK(n.dt == doctest::Approx(0.5));
  CHECK_THROWS_AS((Normalizers{1, 0, 1}.validate()), InfeasibleError);
}

TEST_CASE("fluctuation bound") {
  CHECK(fluctuation_bound(kOdAggregationDays) == doctest::Approx(0.2236068).epsilon(1e-7));
  CHECK(fluctuation_bound(1) == 1.0);
  CHECK_THROWS_AS(fluctuation_bound(0), InputError);
}
