#include <cmath>

#include "doctest.h"
#include "mobsynth/error.hpp"
#include "mobsynth/model.hpp"
#include "support.hpp"

using namespace mobsynth;
using namespace mobsynth::test;

TEST_CASE("demographic labels and indices") {
  const auto all = Demographic::all();
  CHECK(all.size() == 10);
  for (int i = 0; i < kDemographicCount; ++i) {
    CHECK(all[static_cast<std::size_t>(i)].index() == i);
    CHECK(Demographic::from_index(i) == all[static_cast<std::size_t>(i)]);
  }
  CHECK(label(kMale20s) == "male_20s");
  CHECK(label(kFemale40s) == "female_40s");
  CHECK(label(Demographic{Sex::female, AgeGroup::age60plus}) == "female_60plus");
  CHECK(parse_sex("female") == Sex::female);
  CHECK(parse_age_group("50s") == AgeGroup::age50s);
  CHECK_THROWS_AS(parse_sex("other"), InputError);
  CHECK_THROWS_AS(parse_age_group("10s"), InputError);
  CHECK_THROWS_AS(Demographic::from_index(10), InputError);
}

TEST_CASE("trajectory validation") {
  CHECK_NOTHROW(validate(traj(0, kMale20s, {{"1", 0}, {"2", 480}, {"1", 1020}})));
  CHECK_NOTHROW(validate(traj(0, kMale20s, {{"1", 0}, {"2", 1425}})));

  SUBCASE("home must be first at minute 0") {
    Trajectory t = traj(0, kMale20s, {{"1", 0}, {"2", 60}});
    t.home = cell("3");
    CHECK_THROWS_AS(validate(t), InputError);
    CHECK_THROWS_AS(validate(traj(0, kMale20s, {{"1", 5}})), InputError);
  }
  SUBCASE("gaps of at least 15 minutes") {
    CHECK_THROWS_AS(validate(traj(0, kMale20s, {{"1", 0}, {"2", 14}})), InputError);
    CHECK_NOTHROW(validate(traj(0, kMale20s, {{"1", 0}, {"2", 15}})));
  }
  SUBCASE("last stay leaves room before midnight") {
    CHECK_THROWS_AS(validate(traj(0, kMale20s, {{"1", 0}, {"2", 1426}})), InputError);
  }
  SUBCASE("consecutive cells differ") {
    CHECK_THROWS_AS(validate(traj(0, kMale20s, {{"1", 0}, {"1", 60}})), InputError);
  }
  SUBCASE("at least one stay") {
    Trajectory t{0, kMale20s, cell("1"), {}};
    CHECK_THROWS_AS(validate(t), InputError);
  }
}

TEST_CASE("dwell_travel_observations") {
  const auto home = dwell_travel_observations(traj(0, kMale20s, {{"9", 0}}));
  REQUIRE(home.size() == 1);
  CHECK(home[0] == Observation{cell("9"), 0, 1440});

  const auto obs = dwell_travel_observations(
      traj(0, kMale20s, {{"1", 0}, {"2", 480}, {"3", 1020}}));
  REQUIRE(obs.size() == 3);
  CHECK(obs[0] == Observation{cell("1"), 0, 480});
  CHECK(obs[1] == Observation{cell("2"), 8, 540});
  CHECK(obs[2] == Observation{cell("3"), 17, 420});
  for (const auto& o : obs) CHECK(o.minutes >= kMinGapMinutes);
}

TEST_CASE("od_matrix_of") {
  const std::vector<Trajectory> homes = {traj(0, kMale20s, {{"1", 0}}),
                                         traj(1, kMale20s, {{"2", 0}})};
  CHECK(od_matrix_of(homes, kMale20s).empty());

  const std::vector<Trajectory> one = {traj(0, kMale20s, {{"1", 0}, {"2", 480}})};
  const OdMatrix od = od_matrix_of(one, kMale20s);
  REQUIRE(od.size() == 1);
  CHECK(od.count(OdKey{cell("1"), cell("2"), 8}) == 1);

  const std::vector<Trajectory> many = {
      traj(0, kMale20s, {{"1", 0}, {"2", 480}, {"1", 1020}}),
      traj(1, kMale20s, {{"1", 0}, {"2", 500}}),
      traj(2, kMale20s, {{"3", 0}})};
  const OdMatrix m = od_matrix_of(many, kMale20s);
  CHECK(m.total() == 3);
  CHECK(m.count(OdKey{cell("1"), cell("2"), 8}) == 2);
  CHECK(m.count(OdKey{cell("2"), cell("1"), 17}) == 1);

  CHECK_THROWS_AS(od_matrix_of(many, kFemale40s), InputError);
}

TEST_CASE("OdMatrix keeps a sparse canonical form") {
  OdMatrix m(kMale20s);
  const OdKey k{cell("1"), cell("2"), 3};
  m.add(k, 2);
  m.add(k, -2);
  CHECK(m.empty());
  CHECK(m.count(k) == 0);
  CHECK_THROWS_AS(m.add(OdKey{cell("1"), cell("1"), 3}, 1), InputError);
  CHECK_THROWS_AS(m.add(OdKey{cell("1"), cell("2"), 24}, 1), InputError);
  CHECK_THROWS_AS(m.add(k, -1), InputError);

  m.add(k, 3);
  m.add(OdKey{cell("2"), cell("1"), 3}, 5);
  m.suppress(4);
  CHECK(m.size() == 1);
  CHECK(m.count(k) == 0);
}

TEST_CASE("quantile table validation") {
  QuantileTable t;
  t.rows[CellHour{cell("1"), 8}] = QuantileRow{20, 30, 40, 50, 60, 5};
  CHECK_NOTHROW(t.validate(5));
  CHECK_THROWS_AS(t.validate(6), InputError);
  t.rows[CellHour{cell("1"), 8}] = QuantileRow{20, 30, 50, 40, 60, 5};
  CHECK_THROWS_AS(t.validate(1), InputError);
  t.rows[CellHour{cell("1"), 8}] = QuantileRow{10, 30, 40, 50, 60, 5};
  CHECK_THROWS_AS(t.validate(1), InputError);
}

TEST_CASE("weights validation") {
  CHECK_NOTHROW(Weights{1, 0.1, 0.2}.validate());
  CHECK_THROWS_AS((Weights{0, 0, 0}.validate()), InputError);
  CHECK_THROWS_AS((Weights{1, -0.1, 0}.validate()), InputError);
  CHECK_THROWS_AS((Weights{1, 0, std::nan("")}.validate()), InputError);
}

TEST_CASE("census helpers") {
  Census c;
  c[CensusKey{cell("1"), kMale20s}] = 3;
  c[CensusKey{cell("2"), kFemale40s}] = 4;
  c[CensusKey{cell("2"), kMale20s}] = 1;
  CHECK(census_total(c) == 8);
  const Census m = census_of(c, kMale20s);
  CHECK(m.size() == 2);
  CHECK(census_total(m) == 4);
}
