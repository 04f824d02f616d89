#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mobsynth/anneal.hpp"
#include "mobsynth/lognormal.hpp"
#include "mobsynth/model.hpp"

namespace mobsynth {

// CSV files are comma separated with a mandatory header line and LF line
// endings. Readers throw InputError("<source>:<line>: <problem>").

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

void write_trajectories(std::ostream& out, std::span<const Trajectory> trajs);
// Rows of one agent must be contiguous with stay_index 0, 1, ...; each
// trajectory is validated.
std::vector<Trajectory> read_trajectories(std::istream& in,
                                          std::string_view source);

void write_od(std::ostream& out, const std::map<Demographic, OdMatrix>& od);
std::map<Demographic, OdMatrix> read_od(std::istream& in, std::string_view source);

void write_quantiles(std::ostream& out, const QuantileTable& table);
QuantileTable read_quantiles(std::istream& in, std::string_view source);

void write_census(std::ostream& out, const Census& census);
Census read_census(std::istream& in, std::string_view source);

void write_params(std::ostream& out, const DTParamTable& table);
DTParamTable read_params(std::istream& in, std::string_view source);

void write_trace(std::ostream& out, std::span<const TracePoint> trace);

// File wrappers. Writers create parent directories.
std::vector<Trajectory> load_trajectories(const std::filesystem::path& path);
void save_trajectories(const std::filesystem::path& path,
                       std::span<const Trajectory> trajs);

// A bundle directory holds od.csv, quantiles.csv and census.csv.
ReferenceBundle load_bundle(const std::filesystem::path& dir);
void save_bundle(const std::filesystem::path& dir, const ReferenceBundle& bundle);

DTParamTable load_params(const std::filesystem::path& path);
void save_params(const std::filesystem::path& path, const DTParamTable& table);

void save_trace(const std::filesystem::path& path, std::span<const TracePoint> trace);

// Writes `text` to `path` in one go.
void save_text(const std::filesystem::path& path, std::string_view text);

}  // namespace mobsynth
