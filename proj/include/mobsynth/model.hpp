#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mobsynth/meshgrid.hpp"

namespace mobsynth {

inline constexpr int kMinutesPerDay = 1440;
inline constexpr int kHoursPerDay = 24;
// Shortest admissible dwell-travel interval; shorter ones are dropped by the
// upstream GPS preprocessing.
inline constexpr int kMinGapMinutes = 15;

constexpr int hour_of(int minute) noexcept { return minute / 60; }

enum class Sex : std::uint8_t { male, female };
enum class AgeGroup : std::uint8_t { age20s, age30s, age40s, age50s, age60plus };

inline constexpr int kSexCount = 2;
inline constexpr int kAgeGroupCount = 5;
inline constexpr int kDemographicCount = kSexCount * kAgeGroupCount;

std::string_view to_string(Sex sex) noexcept;
std::string_view to_string(AgeGroup age) noexcept;
Sex parse_sex(std::string_view text);
AgeGroup parse_age_group(std::string_view text);

struct Demographic {
  Sex sex = Sex::male;
  AgeGroup age_group = AgeGroup::age20s;

  // Dense index in 0..9, ordered by (sex, age_group).
  constexpr int index() const noexcept {
    return static_cast<int>(sex) * kAgeGroupCount + static_cast<int>(age_group);
  }
  static Demographic from_index(int index);
  static std::array<Demographic, kDemographicCount> all() noexcept;

  friend auto operator<=>(const Demographic&, const Demographic&) = default;
};

// "male_20s" style label used in file names and reports.
std::string label(const Demographic& d);

struct Stay {
  CellCode cell;
  int arrival = 0;  // minute of day, [0, 1440)

  friend bool operator==(const Stay&, const Stay&) = default;
};

struct Trajectory {
  std::int64_t agent_id = 0;
  Demographic demographic;
  CellCode home;
  std::vector<Stay> stays;

  std::size_t visit_count() const noexcept { return stays.size(); }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

// Throws InputError describing the first violated trajectory invariant:
// day starts at home at minute 0, arrivals increase with gaps >= 15 min, the
// last arrival leaves >= 15 min before midnight, consecutive cells differ.
void validate(const Trajectory& traj);

struct CellHour {
  CellCode cell;
  int hour = 0;

  friend auto operator<=>(const CellHour&, const CellHour&) = default;
};

struct Observation {
  CellCode cell;
  int hour = 0;
  int minutes = 0;

  friend bool operator==(const Observation&, const Observation&) = default;
};

// One dwell-travel interval per stay. The last stay is censored at midnight:
// its interval runs to minute 1440.
std::vector<Observation> dwell_travel_observations(const Trajectory& traj);

struct OdKey {
  CellCode origin;
  CellCode dest;
  int hour = 0;

  friend auto operator<=>(const OdKey&, const OdKey&) = default;
};

// Sparse hourly origin-destination counts for one demographic group. Zero
// counts are never stored.
class OdMatrix {
 public:
  OdMatrix() = default;
  explicit OdMatrix(Demographic group) : group_(group) {}

  const Demographic& group() const noexcept { return group_; }
  const std::map<OdKey, std::int64_t>& entries() const noexcept {
    return entries_;
  }

  // Adds `delta` to the entry, erasing it if it drops to zero. Throws
  // InputError on origin == dest, hour outside 0..23 or a negative result.
  void add(const OdKey& key, std::int64_t delta);
  std::int64_t count(const OdKey& key) const;

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  std::int64_t total() const noexcept;

  // Drops every entry whose count is below `threshold`.
  void suppress(std::int64_t threshold);

  friend bool operator==(const OdMatrix&, const OdMatrix&) = default;

 private:
  Demographic group_;
  std::map<OdKey, std::int64_t> entries_;
};

// Counts every stay transition at the hour of arrival at the destination.
// Throws InputError if a trajectory is not in `group`.
OdMatrix od_matrix_of(std::span<const Trajectory> trajs, Demographic group);

struct QuantileRow {
  double q10 = 0, q30 = 0, q50 = 0, q70 = 0, q90 = 0;
  std::int64_t n = 0;

  friend bool operator==(const QuantileRow&, const QuantileRow&) = default;
};

struct QuantileTable {
  std::map<CellHour, QuantileRow> rows;

  // Throws InputError on unordered quantiles, quantiles below 15 min or
  // rows with n < threshold.
  void validate(std::int64_t threshold) const;

  friend bool operator==(const QuantileTable&, const QuantileTable&) = default;
};

struct Weights {
  double od = 1.0;
  double vf = 0.0;
  double dt = 0.0;

  // Throws InputError unless od > 0 and vf, dt >= 0 (all finite).
  void validate() const;
};

struct CensusKey {
  CellCode home;
  Demographic group;

  friend auto operator<=>(const CensusKey&, const CensusKey&) = default;
};

// Resident counts per (home cell, demographic).
using Census = std::map<CensusKey, std::int64_t>;

std::int64_t census_total(const Census& census) noexcept;

// Sub-census of one demographic group.
Census census_of(const Census& census, Demographic group);

// The aggregated inputs the engine consumes: demographic OD matrices,
// demographic-pooled dwell-travel quantiles and the home census.
struct ReferenceBundle {
  std::map<Demographic, OdMatrix> od;
  QuantileTable quantiles;
  Census census;
};

}  // namespace mobsynth
