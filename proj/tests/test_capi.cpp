// Exercises the shared library through its C header only.
#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "mobsynth/mobsynth.h"

namespace {

std::filesystem::path temp_dir(const char* name) {
  auto dir = std::filesystem::temp_directory_path() / "mobsynth_tests" / name;
  std::filesystem::remove_all(dir);
  return dir;
}

ms_options* small_options() {
  ms_options* o = nullptr;
  REQUIRE(ms_options_create(&o) == MS_OK);
  REQUIRE(ms_options_set(o, "levels", "2") == MS_OK);
  REQUIRE(ms_options_set(o, "population", "male_20s:400,female_40s:300") == MS_OK);
  REQUIRE(ms_options_set(o, "steps-per-agent", "20") == MS_OK);
  REQUIRE(ms_options_set(o, "seed", "5") == MS_OK);
  return o;
}

}  // namespace

TEST_CASE("version and bound") {
  CHECK(std::string(ms_version()) == "1.0.0");
  CHECK(std::abs(ms_fluctuation_bound(20) - 0.22360679775) < 1e-10);
  CHECK(ms_fluctuation_bound(0) == 0.0);
  CHECK(std::string(ms_last_error()).find("days") != std::string::npos);
}

TEST_CASE("status codes and messages") {
  ms_options* o = nullptr;
  REQUIRE(ms_options_create(&o) == MS_OK);
  CHECK(ms_options_set(o, "tau-max", "x") == MS_ERR_INPUT);
  CHECK(std::string(ms_last_error()).find("tau-max") != std::string::npos);
  CHECK(ms_options_set(o, "nope", "1") == MS_ERR_INPUT);
  CHECK(ms_options_set(nullptr, "seed", "1") == MS_ERR_INPUT);
  CHECK(ms_options_load(o, "/nonexistent.cfg") == MS_ERR_INPUT);
  ms_bundle* b = nullptr;
  CHECK(ms_bundle_load("/nonexistent/bundle", &b) == MS_ERR_INPUT);
  CHECK(b == nullptr);
  ms_options_destroy(o);
  ms_options_destroy(nullptr);
}

TEST_CASE("end to end") {
  const auto dir = temp_dir("capi");
  ms_options* o = small_options();
  ms_trajectories* world = nullptr;
  ms_bundle* bundle = nullptr;
  REQUIRE(ms_make_world(o, &world, &bundle) == MS_OK);
  size_t n = 0;
  REQUIRE(ms_trajectories_count(world, &n) == MS_OK);
  CHECK(n == 700);

  REQUIRE(ms_bundle_save(bundle, dir.c_str()) == MS_OK);
  ms_bundle* loaded = nullptr;
  REQUIRE(ms_bundle_load(dir.c_str(), &loaded) == MS_OK);
  REQUIRE(ms_fit_params(loaded, (dir / "params.csv").c_str()) == MS_OK);
  CHECK(std::filesystem::exists(dir / "params.csv"));

  ms_report* self = nullptr;
  REQUIRE(ms_evaluate(world, loaded, o, &self) == MS_OK);
  double v = -1;
  REQUIRE(ms_report_get(self, "l_od_eval", &v) == MS_OK);
  CHECK(v == 0.0);
  REQUIRE(ms_report_get(self, "fluctuation_bound", &v) == MS_OK);
  CHECK(std::abs(v - 0.2236068) < 1e-7);
  CHECK(ms_report_get(self, "l_speed", &v) == MS_ERR_INPUT);
  CHECK(std::strstr(ms_report_summary(self), "pooled:") != nullptr);

  ms_run* run = nullptr;
  REQUIRE(ms_generate(loaded, o, &run) == MS_OK);
  REQUIRE(ms_run_save(run, (dir / "out").c_str()) == MS_OK);
  CHECK(std::filesystem::exists(dir / "out" / "trajectories.csv"));
  ms_trajectories* synth = nullptr;
  REQUIRE(ms_run_trajectories(run, &synth) == MS_OK);
  REQUIRE(ms_trajectories_count(synth, &n) == MS_OK);
  CHECK(n == 700);
  ms_report* rep = nullptr;
  REQUIRE(ms_run_report(run, &rep) == MS_OK);
  REQUIRE(ms_report_get(rep, "l_od_eval", &v) == MS_OK);
  CHECK(v < 1.0);

  // Evaluating the saved file reproduces the run's report.
  ms_trajectories* reread = nullptr;
  REQUIRE(ms_trajectories_load((dir / "out" / "trajectories.csv").c_str(), &reread) == MS_OK);
  ms_report* again = nullptr;
  REQUIRE(ms_evaluate(reread, loaded, o, &again) == MS_OK);
  CHECK(std::string(ms_report_summary(again)) == ms_report_summary(rep));
  REQUIRE(ms_report_save(again, (dir / "report.json").c_str()) == MS_OK);

  REQUIRE(ms_options_set(o, "grid-w-vf", "0") == MS_OK);
  REQUIRE(ms_options_set(o, "grid-w-dt", "0,1") == MS_OK);
  REQUIRE(ms_grid_search(loaded, o, (dir / "grid").c_str()) == MS_OK);
  CHECK(std::filesystem::exists(dir / "grid" / "grid_means.csv"));

  ms_report_destroy(again);
  ms_trajectories_destroy(reread);
  ms_report_destroy(rep);
  ms_trajectories_destroy(synth);
  ms_run_destroy(run);
  ms_report_destroy(self);
  ms_bundle_destroy(loaded);
  ms_bundle_destroy(bundle);
  ms_trajectories_destroy(world);
  ms_options_destroy(o);
  std::filesystem::remove_all(dir);
}

TEST_CASE("infeasible input maps to status 2") {
  const auto dir = temp_dir("capi_infeasible");
  std::filesystem::create_directories(dir);
  {
    std::FILE* f = std::fopen((dir / "od.csv").c_str(), "w");
    std::fputs("sex,age_group,origin,dest,hour,count\n", f);
    std::fclose(f);
    f = std::fopen((dir / "quantiles.csv").c_str(), "w");
    std::fputs("cell,hour,q10,q30,q50,q70,q90,n\n", f);
    std::fclose(f);
    f = std::fopen((dir / "census.csv").c_str(), "w");
    std::fputs("cell,sex,age_group,count\n1,male,20s,3\n", f);
    std::fclose(f);
  }
  ms_bundle* b = nullptr;
  REQUIRE(ms_bundle_load(dir.c_str(), &b) == MS_OK);
  ms_options* o = nullptr;
  REQUIRE(ms_options_create(&o) == MS_OK);
  ms_run* run = nullptr;
  CHECK(ms_generate(b, o, &run) == MS_ERR_INFEASIBLE);
  CHECK(run == nullptr);
  ms_options_destroy(o);
  ms_bundle_destroy(b);
  std::filesystem::remove_all(dir);
}
