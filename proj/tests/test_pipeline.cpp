#include <cmath>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "mobsynth/error.hpp"
#include "mobsynth/pipeline.hpp"
#include "support.hpp"

using namespace mobsynth;
using namespace mobsynth::test;

namespace {

WorldSpec small_spec() {
  WorldSpec spec;
  spec.levels = 2;
  spec.population = {{kMale20s, 60}, {kFemale40s, 40}};
  spec.seed = 21;
  return spec;
}

RunConfig quick(std::uint64_t seed) {
  RunConfig cfg;
  cfg.seed = seed;
  cfg.steps_per_agent = 100;
  return cfg;
}

}  // namespace

TEST_CASE("engine_table covers OD cells, homes and extras for all hours") {
  const ReferenceBundle b = reference_inputs(small_spec());
  const DTParamTable t = engine_table(b, {cell("33")});
  for (const auto& [key, count] : b.census) {
    for (int h = 0; h < 24; ++h) CHECK(t.contains(CellHour{key.home, h}));
  }
  CHECK(t.contains(CellHour{cell("33"), 5}));
}

TEST_CASE("evaluate the world against its own bundle") {
  const auto world = generate_world(small_spec());
  const ReferenceBundle b = reference_inputs(world, 1);
  const LossReport r = evaluate(world, b);
  CHECK(r.od_eval == 0.0);
  CHECK(r.sqrt_od_eval == 0.0);
  REQUIRE(r.groups.size() == 2);
  for (const GroupReport& g : r.groups) CHECK(g.raw.od == 0.0);
  CHECK(r.fluctuation_bound == doctest::Approx(0.2236068).epsilon(1e-7));
  CHECK(report_json(evaluate(world, b)) == report_json(r));
}

TEST_CASE("evaluate the all-at-home state") {
  const ReferenceBundle b = reference_inputs(small_spec());
  const auto home = init_state(b.census);
  const LossReport r = evaluate(home, b, EvalConfig{Weights{1, 0.1, 0.2}});
  CHECK(r.od_eval == 1.0);
  for (const GroupReport& g : r.groups) {
    CHECK(g.normalized.od == 1.0);
    CHECK(g.normalized.vf == 1.0);
    CHECK(g.normalized.dt == 1.0);
    CHECK(g.total == doctest::Approx(1.3));
  }
}

TEST_CASE("pooled OD counts missing groups as unmatched") {
  const auto world = generate_world(small_spec());
  const ReferenceBundle b = reference_inputs(world, 1);
  std::vector<Trajectory> males;
  for (const Trajectory& t : world) {
    if (t.demographic == kMale20s) males.push_back(t);
  }
  const LossReport r = evaluate(males, b);
  CHECK(r.groups.size() == 1);
  CHECK(r.od_eval > 0.0);
  CHECK(r.od_eval < 1.0);
}

TEST_CASE("evaluate errors") {
  const ReferenceBundle b = reference_inputs(small_spec());
  const std::vector<Trajectory> stranger = {
      traj(0, Demographic{Sex::male, AgeGroup::age50s}, {{"00", 0}})};
  CHECK_THROWS_AS(evaluate(stranger, b), InputError);
  CHECK_THROWS_AS(evaluate(std::vector<Trajectory>{}, b), InputError);
}

TEST_CASE("report formats") {
  const ReferenceBundle b = reference_inputs(small_spec());
  const LossReport r = evaluate(init_state(b.census), b);
  const auto j = nlohmann::json::parse(report_json(r));
  CHECK(j.contains("weights"));
  CHECK(j["pooled"]["l_od_eval"] == 1.0);
  CHECK(j["groups"].size() == 2);
  CHECK(j["groups"][0]["group"] == "male_20s");
  const std::string s = report_summary(r);
  CHECK(s.find("fluctuation bound (20-day average, 1/sqrt(20)): 0.2236") != std::string::npos);
  CHECK(s.find("female_40s: agents 40") != std::string::npos);
}

TEST_CASE("generate") {
  const ReferenceBundle b = reference_inputs(small_spec());
  const GenerateResult a = generate(b, quick(3), 1);
  const GenerateResult c = generate(b, quick(3), 2);
  CHECK(a.run.trajectories == c.run.trajectories);
  CHECK(a.run.trajectories.size() == 100);
  CHECK(a.report.od_eval < 1.0);
  CHECK(report_json(a.report) == report_json(c.report));
  CHECK(generate(b, quick(4), 1).run.trajectories != a.run.trajectories);

  const auto dir = std::filesystem::temp_directory_path() / "mobsynth_tests" / "generate";
  std::filesystem::remove_all(dir);
  save_generate(dir, a);
  for (const char* f : {"trajectories.csv", "loss_report.json", "trace_male_20s.csv",
                        "trace_female_40s.csv"}) {
    CHECK(std::filesystem::exists(dir / f));
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("grid search") {
  const ReferenceBundle b = reference_inputs(small_spec());
  GridSearchPlan plan;
  plan.w_vf = {0, 0.1};
  plan.w_dt = {0, 2};
  plan.seeds = {1, 2};
  plan.jobs = 2;
  const auto rows = run_grid_search(plan, b, quick(0));
  REQUIRE(rows.size() == 8);
  CHECK(rows[0].w_vf == 0);
  CHECK(rows[0].w_dt == 0);
  CHECK(rows[1].seed == 2);
  CHECK(rows[2].w_dt == 2);
  CHECK(rows[4].w_vf == 0.1);
  for (const GridRow& r : rows) {
    CHECK(r.ok);
    CHECK(r.sqrt_l_od_eval == doctest::Approx(std::sqrt(r.l_od_eval)));
  }
  const auto means = grid_means(rows);
  REQUIRE(means.size() == 4);
  CHECK(means[0].runs == 2);
  CHECK(means[0].l_vf == doctest::Approx((rows[0].l_vf + rows[1].l_vf) / 2));

  // The baseline cell is an ordinary (1, 0, 0) generate.
  RunConfig base = quick(1);
  CHECK(generate(b, base, 1).report.vf == rows[0].l_vf);

  plan.jobs = 1;
  std::ostringstream a, c;
  write_grid(a, rows);
  write_grid(c, run_grid_search(plan, b, quick(0)));
  CHECK(a.str() == c.str());
  CHECK(a.str().rfind("w_vf,w_dt,seed,l_od_eval,sqrt_l_od_eval,l_vf,l_dt\n", 0) == 0);
}

TEST_CASE("grid search records failing cells and continues") {
  ReferenceBundle b = reference_inputs(small_spec());
  b.census[CensusKey{cell("00"), Demographic{Sex::male, AgeGroup::age50s}}] = 3;
  GridSearchPlan plan;
  plan.w_vf = {0};
  plan.w_dt = {0, 1};
  const auto rows = run_grid_search(plan, b, quick(0));
  REQUIRE(rows.size() == 2);
  for (const GridRow& r : rows) {
    CHECK_FALSE(r.ok);
    CHECK(r.error.find("male_50s") != std::string::npos);
  }
  std::ostringstream grid, means, failures;
  write_grid(grid, rows);
  write_grid_means(means, grid_means(rows));
  write_grid_failures(failures, rows);
  CHECK(grid.str().find("0,0,1,nan,nan,nan,nan\n") != std::string::npos);
  CHECK(means.str().find("0,1,0,nan,nan,nan,nan\n") != std::string::npos);
  CHECK(failures.str().rfind("w_vf,w_dt,seed,error\n0,0,1,", 0) == 0);
}
