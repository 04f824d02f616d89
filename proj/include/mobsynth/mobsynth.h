/* C interface to the mobsynth trajectory synthesizer.
 *
 * All objects are opaque handles created by ms_*_create/load/run calls and
 * released with the matching ms_*_destroy. Functions return an ms_status;
 * on failure the message is available from ms_last_error() on the same
 * thread until the next failing call. Handles may be used from any thread
 * but not concurrently. */
#ifndef MOBSYNTH_H
#define MOBSYNTH_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MS_API __declspec(dllexport)
#else
#define MS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ms_status {
  MS_OK = 0,
  MS_ERR_INPUT = 1,      /* bad arguments, malformed files */
  MS_ERR_INFEASIBLE = 2, /* well-formed data that cannot be processed */
  MS_ERR_INTERNAL = 3    /* invariant breach */
} ms_status;

typedef struct ms_options ms_options;
typedef struct ms_bundle ms_bundle;
typedef struct ms_trajectories ms_trajectories;
typedef struct ms_report ms_report;
typedef struct ms_run ms_run;

MS_API const char* ms_version(void);
/* Message of the last failure on this thread; "" if none. */
MS_API const char* ms_last_error(void);

/* Options: every pipeline parameter, set by key (see README). */
MS_API ms_status ms_options_create(ms_options** out);
MS_API void ms_options_destroy(ms_options* options);
MS_API ms_status ms_options_set(ms_options* options, const char* key,
                                const char* value);
/* Applies a flat "key = value" file. */
MS_API ms_status ms_options_load(ms_options* options, const char* path);

/* Reference bundle: od.csv, quantiles.csv and census.csv in one directory. */
MS_API ms_status ms_bundle_load(const char* dir, ms_bundle** out);
MS_API ms_status ms_bundle_save(const ms_bundle* bundle, const char* dir);
MS_API void ms_bundle_destroy(ms_bundle* bundle);

MS_API ms_status ms_trajectories_load(const char* path, ms_trajectories** out);
MS_API ms_status ms_trajectories_save(const ms_trajectories* trajs,
                                      const char* path);
MS_API ms_status ms_trajectories_count(const ms_trajectories* trajs,
                                       size_t* out);
MS_API void ms_trajectories_destroy(ms_trajectories* trajs);

/* Samples a ground-truth world and derives its reference bundle. Uses the
 * options seed, levels, population and threshold. */
MS_API ms_status ms_make_world(const ms_options* options,
                               ms_trajectories** world, ms_bundle** bundle);

/* Writes the fitted and filled dwell-travel table as params.csv. */
MS_API ms_status ms_fit_params(const ms_bundle* bundle, const char* path);

/* Anneals every census group. */
MS_API ms_status ms_generate(const ms_bundle* bundle, const ms_options* options,
                             ms_run** out);
/* trajectories.csv, loss_report.json and one trace_<group>.csv per group. */
MS_API ms_status ms_run_save(const ms_run* run, const char* dir);
MS_API ms_status ms_run_trajectories(const ms_run* run, ms_trajectories** out);
MS_API ms_status ms_run_report(const ms_run* run, ms_report** out);
MS_API void ms_run_destroy(ms_run* run);

/* From-scratch losses; weights, n-max taken from the options. */
MS_API ms_status ms_evaluate(const ms_trajectories* trajs, const ms_bundle* bundle,
                             const ms_options* options, ms_report** out);
/* Pooled metrics: "l_od_eval", "sqrt_l_od_eval", "l_vf", "l_dt",
 * "fluctuation_bound". */
MS_API ms_status ms_report_get(const ms_report* report, const char* metric,
                               double* out);
MS_API ms_status ms_report_save(const ms_report* report, const char* path);
/* Human-readable summary; the pointer lives as long as the report. */
MS_API const char* ms_report_summary(const ms_report* report);
MS_API void ms_report_destroy(ms_report* report);

/* Runs the weight grid and writes grid.csv, grid_means.csv and
 * grid_failures.csv into dir. Failed cells do not fail the call. */
MS_API ms_status ms_grid_search(const ms_bundle* bundle, const ms_options* options,
                                const char* dir);

/* 1 / sqrt(days): relative fluctuation of a `days`-day average. */
MS_API double ms_fluctuation_bound(double days);

#ifdef __cplusplus
}
#endif

#endif /* MOBSYNTH_H */
