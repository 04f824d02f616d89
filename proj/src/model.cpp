#include "mobsynth/model.hpp"

#include <cmath>
#include <numeric>

#include "mobsynth/error.hpp"

namespace mobsynth {

namespace {

constexpr std::array<std::string_view, kSexCount> kSexNames = {"male",
                                                                "female"};
constexpr std::array<std::string_view, kAgeGroupCount> kAgeNames = {
    "20s", "30s", "40s", "50s", "60plus"};

std::string describe(const Trajectory& t) {
  return "agent " + std::to_string(t.agent_id);
}

}  // namespace

std::string_view to_string(Sex sex) noexcept {
  return kSexNames[static_cast<std::size_t>(sex)];
}

std::string_view to_string(AgeGroup age) noexcept {
  return kAgeNames[static_cast<std::size_t>(age)];
}

Sex parse_sex(std::string_view text) {
  for (std::size_t i = 0; i < kSexNames.size(); ++i) {
    if (kSexNames[i] == text) return static_cast<Sex>(i);
  }
  throw InputError("unknown sex '" + std::string(text) +
                   "' (expected male or female)");
}

AgeGroup parse_age_group(std::string_view text) {
  for (std::size_t i = 0; i < kAgeNames.size(); ++i) {
    if (kAgeNames[i] == text) return static_cast<AgeGroup>(i);
  }
  throw InputError("unknown age group '" + std::string(text) +
                   "' (expected 20s, 30s, 40s, 50s or 60plus)");
}

Demographic Demographic::from_index(int index) {
  if (index < 0 || index >= kDemographicCount) {
    throw InputError("demographic index out of range");
  }
  return Demographic{static_cast<Sex>(index / kAgeGroupCount),
                     static_cast<AgeGroup>(index % kAgeGroupCount)};
}

std::array<Demographic, kDemographicCount> Demographic::all() noexcept {
  std::array<Demographic, kDemographicCount> out{};
  for (int i = 0; i < kDemographicCount; ++i) {
    out[static_cast<std::size_t>(i)] =
        Demographic{static_cast<Sex>(i / kAgeGroupCount),
                    static_cast<AgeGroup>(i % kAgeGroupCount)};
  }
  return out;
}

std::string label(const Demographic& d) {
  return std::string(to_string(d.sex)) + "_" + std::string(to_string(d.age_group));
}

void validate(const Trajectory& t) {
  if (t.stays.empty()) throw InputError(describe(t) + ": no stays");
  if (t.stays.front().cell != t.home) {
    throw InputError(describe(t) + ": first stay is not at home");
  }
  if (t.stays.front().arrival != 0) {
    throw InputError(describe(t) + ": first stay does not start at minute 0");
  }
  for (std::size_t m = 1; m < t.stays.size(); ++m) {
    const Stay& prev = t.stays[m - 1];
    const Stay& cur = t.stays[m];
    if (cur.arrival - prev.arrival < kMinGapMinutes) {
      throw InputError(describe(t) + ": stay " + std::to_string(m) +
                       " arrives less than 15 min after the previous one");
    }
    if (cur.cell == prev.cell) {
      throw InputError(describe(t) + ": stay " + std::to_string(m) +
                       " repeats the previous cell");
    }
  }
  if (kMinutesPerDay - t.stays.back().arrival < kMinGapMinutes) {
    throw InputError(describe(t) + ": last arrival leaves less than 15 min");
  }
}

std::vector<Observation> dwell_travel_observations(const Trajectory& t) {
  std::vector<Observation> out;
  out.reserve(t.stays.size());
  for (std::size_t m = 0; m < t.stays.size(); ++m) {
    const Stay& s = t.stays[m];
    const int next =
        m + 1 < t.stays.size() ? t.stays[m + 1].arrival : kMinutesPerDay;
    out.push_back(Observation{s.cell, hour_of(s.arrival), next - s.arrival});
  }
  return out;
}

void OdMatrix::add(const OdKey& key, std::int64_t delta) {
  if (key.origin == key.dest) {
    throw InputError("OD entry with origin == dest (" + key.origin.str() + ")");
  }
  if (key.hour < 0 || key.hour >= kHoursPerDay) {
    throw InputError("OD hour " + std::to_string(key.hour) + " outside 0..23");
  }
  if (delta == 0) return;
  auto it = entries_.find(key);
  const std::int64_t current = it == entries_.end() ? 0 : it->second;
  const std::int64_t next = current + delta;
  if (next < 0) throw InputError("OD count would become negative");
  if (next == 0) {
    entries_.erase(it);
  } else if (it == entries_.end()) {
    entries_.emplace(key, next);
  } else {
    it->second = next;
  }
}

std::int64_t OdMatrix::count(const OdKey& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? 0 : it->second;
}

std::int64_t OdMatrix::total() const noexcept {
  std::int64_t sum = 0;
  for (const auto& [key, n] : entries_) sum += n;
  return sum;
}

void OdMatrix::suppress(std::int64_t threshold) {
  std::erase_if(entries_, [threshold](const auto& kv) {
    return kv.second < threshold;
  });
}

OdMatrix od_matrix_of(std::span<const Trajectory> trajs, Demographic group) {
  OdMatrix od(group);
  for (const Trajectory& t : trajs) {
    if (t.demographic != group) {
      throw InputError(describe(t) + " is " + label(t.demographic) +
                       ", expected " + label(group));
    }
    for (std::size_t m = 1; m < t.stays.size(); ++m) {
      od.add(OdKey{t.stays[m - 1].cell, t.stays[m].cell,
                   hour_of(t.stays[m].arrival)},
             1);
    }
  }
  return od;
}

void QuantileTable::validate(std::int64_t threshold) const {
  for (const auto& [key, r] : rows) {
    const std::string where =
        "quantile row (" + key.cell.str() + ", " + std::to_string(key.hour) + ")";
    if (key.hour < 0 || key.hour >= kHoursPerDay) {
      throw InputError(where + ": hour outside 0..23");
    }
    const double qs[] = {r.q10, r.q30, r.q50, r.q70, r.q90};
    for (double q : qs) {
      if (!std::isfinite(q) || q < kMinGapMinutes) {
        throw InputError(where + ": quantile below 15 min or not finite");
      }
    }
    if (!(r.q10 <= r.q30 && r.q30 <= r.q50 && r.q50 <= r.q70 && r.q70 <= r.q90)) {
      throw InputError(where + ": quantiles not non-decreasing");
    }
    if (r.n < threshold || r.n <= 0) {
      throw InputError(where + ": sample count below suppression threshold");
    }
  }
}

void Weights::validate() const {
  if (!std::isfinite(od) || !std::isfinite(vf) || !std::isfinite(dt)) {
    throw InputError("weights must be finite");
  }
  if (od <= 0) throw InputError("w_od must be positive");
  if (vf < 0 || dt < 0) throw InputError("w_vf and w_dt must be non-negative");
}

std::int64_t census_total(const Census& census) noexcept {
  return std::accumulate(
      census.begin(), census.end(), std::int64_t{0},
      [](std::int64_t acc, const auto& kv) { return acc + kv.second; });
}

Census census_of(const Census& census, Demographic group) {
  Census out;
  for (const auto& [key, n] : census) {
    if (key.group == group) out.emplace(key, n);
  }
  return out;
}

}  // namespace mobsynth
