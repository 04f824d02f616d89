#include "mobsynth/mobsynth.h"

#include <exception>
#include <memory>
#include <new>
#include <string>

#include "mobsynth/error.hpp"
#include "mobsynth/io.hpp"
#include "mobsynth/options.hpp"
#include "mobsynth/pipeline.hpp"
#include "mobsynth/worldgen.hpp"

struct ms_options {
  mobsynth::Options value;
};
struct ms_bundle {
  mobsynth::ReferenceBundle value;
};
struct ms_trajectories {
  std::vector<mobsynth::Trajectory> value;
};
struct ms_report {
  mobsynth::LossReport value;
  std::string summary;
};
struct ms_run {
  mobsynth::GenerateResult value;
};

namespace {

thread_local std::string last_error;

ms_status fail(ms_status status, const std::string& message) {
  last_error = message;
  return status;
}

template <typename Fn>
ms_status guard(Fn&& fn) {
  try {
    fn();
    return MS_OK;
  } catch (const mobsynth::Error& e) {
    return fail(static_cast<ms_status>(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(MS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MS_ERR_INTERNAL, std::string("unexpected error: ") + e.what());
  } catch (...) {
    return fail(MS_ERR_INTERNAL, "unexpected error");
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw mobsynth::InputError(std::string(what) + " is null");
}

}  // namespace

extern "C" {

const char* ms_version(void) { return "1.0.0"; }

const char* ms_last_error(void) { return last_error.c_str(); }

ms_status ms_options_create(ms_options** out) {
  return guard([&] {
    require(out, "out");
    *out = new ms_options{};
  });
}

void ms_options_destroy(ms_options* options) { delete options; }

ms_status ms_options_set(ms_options* options, const char* key, const char* value) {
  return guard([&] {
    require(options, "options");
    require(key, "key");
    require(value, "value");
    options->value.set(key, value);
  });
}

ms_status ms_options_load(ms_options* options, const char* path) {
  return guard([&] {
    require(options, "options");
    require(path, "path");
    mobsynth::load_config(path, options->value);
  });
}

ms_status ms_bundle_load(const char* dir, ms_bundle** out) {
  return guard([&] {
    require(dir, "dir");
    require(out, "out");
    auto b = std::make_unique<ms_bundle>();
    b->value = mobsynth::load_bundle(dir);
    *out = b.release();
  });
}

ms_status ms_bundle_save(const ms_bundle* bundle, const char* dir) {
  return guard([&] {
    require(bundle, "bundle");
    require(dir, "dir");
    mobsynth::save_bundle(dir, bundle->value);
  });
}

void ms_bundle_destroy(ms_bundle* bundle) { delete bundle; }

ms_status ms_trajectories_load(const char* path, ms_trajectories** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    auto t = std::make_unique<ms_trajectories>();
    t->value = mobsynth::load_trajectories(path);
    *out = t.release();
  });
}

ms_status ms_trajectories_save(const ms_trajectories* trajs, const char* path) {
  return guard([&] {
    require(trajs, "trajectories");
    require(path, "path");
    mobsynth::save_trajectories(path, trajs->value);
  });
}

ms_status ms_trajectories_count(const ms_trajectories* trajs, size_t* out) {
  return guard([&] {
    require(trajs, "trajectories");
    require(out, "out");
    *out = trajs->value.size();
  });
}

void ms_trajectories_destroy(ms_trajectories* trajs) { delete trajs; }

ms_status ms_make_world(const ms_options* options, ms_trajectories** world,
                        ms_bundle** bundle) {
  return guard([&] {
    require(options, "options");
    require(world, "world");
    require(bundle, "bundle");
    const mobsynth::WorldSpec spec = options->value.world_spec();
    auto w = std::make_unique<ms_trajectories>();
    w->value = mobsynth::generate_world(spec);
    auto b = std::make_unique<ms_bundle>();
    b->value = mobsynth::reference_inputs(w->value, spec.threshold);
    *world = w.release();
    *bundle = b.release();
  });
}

ms_status ms_fit_params(const ms_bundle* bundle, const char* path) {
  return guard([&] {
    require(bundle, "bundle");
    require(path, "path");
    mobsynth::save_params(path, mobsynth::engine_table(bundle->value));
  });
}

ms_status ms_generate(const ms_bundle* bundle, const ms_options* options,
                      ms_run** out) {
  return guard([&] {
    require(bundle, "bundle");
    require(options, "options");
    require(out, "out");
    auto r = std::make_unique<ms_run>();
    r->value = mobsynth::generate(bundle->value, options->value.run_config(),
                                  options->value.jobs);
    *out = r.release();
  });
}

ms_status ms_run_save(const ms_run* run, const char* dir) {
  return guard([&] {
    require(run, "run");
    require(dir, "dir");
    mobsynth::save_generate(dir, run->value);
  });
}

ms_status ms_run_trajectories(const ms_run* run, ms_trajectories** out) {
  return guard([&] {
    require(run, "run");
    require(out, "out");
    *out = new ms_trajectories{run->value.run.trajectories};
  });
}

ms_status ms_run_report(const ms_run* run, ms_report** out) {
  return guard([&] {
    require(run, "run");
    require(out, "out");
    *out = new ms_report{run->value.report,
                         mobsynth::report_summary(run->value.report)};
  });
}

void ms_run_destroy(ms_run* run) { delete run; }

ms_status ms_evaluate(const ms_trajectories* trajs, const ms_bundle* bundle,
                      const ms_options* options, ms_report** out) {
  return guard([&] {
    require(trajs, "trajectories");
    require(bundle, "bundle");
    require(options, "options");
    require(out, "out");
    const mobsynth::Options& o = options->value;
    mobsynth::LossReport report = mobsynth::evaluate(
        trajs->value, bundle->value, mobsynth::EvalConfig{o.weights, o.n_max});
    std::string summary = mobsynth::report_summary(report);
    *out = new ms_report{std::move(report), std::move(summary)};
  });
}

ms_status ms_report_get(const ms_report* report, const char* metric, double* out) {
  return guard([&] {
    require(report, "report");
    require(metric, "metric");
    require(out, "out");
    const std::string m = metric;
    const mobsynth::LossReport& r = report->value;
    if (m == "l_od_eval") {
      *out = r.od_eval;
    } else if (m == "sqrt_l_od_eval") {
      *out = r.sqrt_od_eval;
    } else if (m == "l_vf") {
      *out = r.vf;
    } else if (m == "l_dt") {
      *out = r.dt;
    } else if (m == "fluctuation_bound") {
      *out = r.fluctuation_bound;
    } else {
      throw mobsynth::InputError("unknown metric '" + m + "'");
    }
  });
}

ms_status ms_report_save(const ms_report* report, const char* path) {
  return guard([&] {
    require(report, "report");
    require(path, "path");
    mobsynth::save_text(path, mobsynth::report_json(report->value));
  });
}

const char* ms_report_summary(const ms_report* report) {
  return report == nullptr ? "" : report->summary.c_str();
}

void ms_report_destroy(ms_report* report) { delete report; }

ms_status ms_grid_search(const ms_bundle* bundle, const ms_options* options,
                         const char* dir) {
  return guard([&] {
    require(bundle, "bundle");
    require(options, "options");
    require(dir, "dir");
    const auto rows = mobsynth::run_grid_search(
        options->value.grid_plan(), bundle->value, options->value.run_config());
    mobsynth::save_grid(dir, rows);
  });
}

double ms_fluctuation_bound(double days) {
  try {
    return mobsynth::fluctuation_bound(days);
  } catch (const mobsynth::Error& e) {
    last_error = e.what();
    return 0.0;
  }
}

}  // extern "C"
