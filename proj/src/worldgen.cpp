#include "mobsynth/worldgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>
#include <string>


#include "mobsynth/error.hpp"
#include "mobsynth/losses.hpp"
#include "mobsynth/rng.hpp"

namespace mobsynth {

namespace {

// Latest arrival that still leaves a full interval before midnight.
constexpr int kLastArrival = kMinutesPerDay - kMinGapMinutes;

std::vector<CellCode> grid_cells(int levels) {
  const int side = 1 << levels;
  std::vector<CellCode> cells;
  cells.reserve(static_cast<std::size_t>(side * side));
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      cells.push_back(synth_code(static_cast<std::uint32_t>(x),
                                 static_cast<std::uint32_t>(y), levels));
    }
  }
  return cells;
}

double grid_distance(int a, int b, int side) {
  const double dx = a % side - b % side;
  const double dy = a / side - b / side;
  return std::sqrt(dx * dx + dy * dy);
}

// Median dwell-travel minutes by arrival hour.
double hourly_median(int hour) {
  if (hour < 4) return 420;
  if (hour < 7) return 360;
  if (hour < 10) return 300;
  if (hour < 14) return 150;
  if (hour < 18) return 120;
  if (hour < 21) return 150;
  return 240;
}

// Shrinks gaps toward the 15 min floor until the last arrival fits.
void fit_into_day(std::vector<int>& gaps) {
  const int floor_total = kMinGapMinutes * static_cast<int>(gaps.size());
  int total = 0;
  for (int g : gaps) total += g;
  if (total <= kLastArrival) return;
  const double scale = static_cast<double>(kLastArrival - floor_total) /
                       static_cast<double>(total - floor_total);
  for (int& g : gaps) {
    g = kMinGapMinutes +
        static_cast<int>(std::floor((g - kMinGapMinutes) * scale));
  }
}

}  // namespace

void WorldSpec::validate() const {
  if (levels < 1 || levels > 11) throw InputError("levels must be in 1..11");
  const auto cells = static_cast<std::size_t>(side() * side());
  if (!attraction.empty() && attraction.size() != cells) {
    throw InputError("attraction needs one weight per cell");
  }
  if (!residence.empty() && residence.size() != cells) {
    throw InputError("residence needs one weight per cell");
  }
  auto non_negative = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(),
                       [](double x) { return std::isfinite(x) && x >= 0; });
  };
  if (!non_negative(attraction) || !non_negative(residence) ||
      !non_negative(visit_pmf)) {
    throw InputError("world weights must be finite and non-negative");
  }
  for (const auto& [group, count] : population) {
    if (count < 0) throw InputError("negative population for " + label(group));
  }
  if (threshold < 0) throw InputError("threshold must be >= 0");
  if (!(visit_sigma > 0) || visit_support < 2) {
    throw InputError("visit law needs sigma > 0 and support >= 2");
  }
  if (return_home < 0 || return_home > 1) {
    throw InputError("return_home must be a probability");
  }
  if (!(gravity_scale > 0)) throw InputError("gravity_scale must be > 0");
}

namespace {

// Weight of grid cell (x, y) from point sources at fractional positions.
double spots(int x, int y, int side,
             std::initializer_list<std::array<double, 3>> sources) {
  double w = 0;
  for (const auto& [fx, fy, weight] : sources) {
    const int sx = std::min(side - 1, static_cast<int>(fx * side));
    const int sy = std::min(side - 1, static_cast<int>(fy * side));
    if (x == sx && y == sy) w += weight;
  }
  return w;
}

}  // namespace

// A central business district plus two secondary centers.
std::vector<double> default_attraction(int levels) {
  const int side = 1 << levels;
  std::vector<double> out;
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      out.push_back(0.05 + spots(x, y, side,
                                 {{0.5, 0.5, 10.0}, {0.2, 0.7, 4.0}, {0.7, 0.2, 4.0}}));
    }
  }
  return out;
}

// Four residential districts.
std::vector<double> default_residence(int levels) {
  const int side = 1 << levels;
  std::vector<double> out;
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      out.push_back(0.01 + spots(x, y, side,
                                 {{0.1, 0.1, 1.0}, {0.9, 0.9, 1.0},
                                   {0.1, 0.9, 0.7}, {0.9, 0.1, 0.7}}));
    }
  }
  return out;
}

DTParamTable default_dwell_law(int levels) {
  const int side = 1 << levels;
  DTParamTable law;
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      const CellCode cell = synth_code(static_cast<std::uint32_t>(x),
                                       static_cast<std::uint32_t>(y), levels);
      const double wobble = 0.25 * std::sin(1.7 * x + 2.3 * y);
      for (int h = 0; h < kHoursPerDay; ++h) {
        const double sigma = h < 4 ? 0.5 : 0.3 + 0.05 * std::cos(0.9 * x + h);
        law.emplace(CellHour{cell, h},
                    DTParams{std::log(hourly_median(h)) + wobble, sigma});
      }
    }
  }
  return law;
}

std::vector<Trajectory> generate_world(const WorldSpec& spec) {
  spec.validate();
  const int side = spec.side();
  const std::vector<CellCode> cells = grid_cells(spec.levels);
  const std::vector<double> attraction =
      spec.attraction.empty() ? default_attraction(spec.levels) : spec.attraction;
  const std::vector<double> residence =
      spec.residence.empty() ? default_residence(spec.levels) : spec.residence;
  const DTParamTable law =
      spec.dwell_law.empty() ? default_dwell_law(spec.levels) : spec.dwell_law;
  const std::vector<double> visit_law =
      spec.visit_pmf.empty()
          ? reference_visit_pmf(spec.visit_support, spec.visit_mu, spec.visit_sigma).p
          : spec.visit_pmf;

  std::vector<std::vector<double>> gravity(cells.size());
  for (std::size_t from = 0; from < cells.size(); ++from) {
    gravity[from].resize(cells.size());
    for (std::size_t to = 0; to < cells.size(); ++to) {
      gravity[from][to] =
          from == to ? 0.0
                     : attraction[to] * std::exp(-grid_distance(
                                                     static_cast<int>(from),
                                                     static_cast<int>(to), side) /
                                                 spec.gravity_scale);
    }
  }
  auto law_of = [&](int cell, int hour) -> const DTParams& {
    auto it = law.find(CellHour{cells[static_cast<std::size_t>(cell)], hour});
    if (it == law.end()) {
      throw InputError("dwell law has no entry for (" +
                       cells[static_cast<std::size_t>(cell)].str() + ", " +
                       std::to_string(hour) + ")");
    }
    return it->second;
  };

  std::vector<Trajectory> world;
  for (const auto& [group, count] : spec.population) {
    for (std::int64_t i = 0; i < count; ++i) {
      Rng rng(mix64(spec.seed ^ mix64((static_cast<std::uint64_t>(group.index()) << 40) |
                                      static_cast<std::uint64_t>(i))));
      const int home = static_cast<int>(rng.weighted(residence));

      int n = 0;
      for (int attempt = 0; attempt < 100; ++attempt) {
        n = static_cast<int>(rng.weighted(visit_law)) + 1;
        if (n <= kMaxStaysPerDay) break;
      }
      n = std::min(n, kMaxStaysPerDay);

      std::vector<int> route = {home};
      for (int m = 1; m < n; ++m) {
        const int prev = route.back();
        if (m == n - 1 && prev != home && rng.bernoulli(spec.return_home)) {
          route.push_back(home);
        } else {
          route.push_back(static_cast<int>(rng.weighted(gravity[static_cast<std::size_t>(prev)])));
        }
      }

      std::vector<int> gaps;
      int clock = 0;
      for (int m = 0; m + 1 < n; ++m) {
        const DTParams& p = law_of(route[static_cast<std::size_t>(m)],
                                   std::min(hour_of(clock), kHoursPerDay - 1));
        const double t = truncated_quantile(p, kMinGapMinutes, rng.uniform());
        const int minutes = std::max(kMinGapMinutes, static_cast<int>(std::lround(t)));
        gaps.push_back(minutes);
        clock += minutes;
      }
      fit_into_day(gaps);

      Trajectory t{static_cast<std::int64_t>(world.size()), group, cells[static_cast<std::size_t>(home)], {}};
      int arrival = 0;
      for (int m = 0; m < n; ++m) {
        if (m > 0) arrival += gaps[static_cast<std::size_t>(m - 1)];
        t.stays.push_back(Stay{cells[static_cast<std::size_t>(route[static_cast<std::size_t>(m)])], arrival});
      }
      validate(t);
      world.push_back(std::move(t));
    }
  }
  return world;
}

double type7_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InputError("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

QuantileTable aggregate_quantiles(std::span<const Trajectory> trajs,
                                  std::int64_t threshold) {
  std::map<CellHour, std::vector<double>> groups;
  for (const Trajectory& t : trajs) {
    for (const Observation& o : dwell_travel_observations(t)) {
      groups[CellHour{o.cell, o.hour}].push_back(o.minutes);
    }
  }
  QuantileTable table;
  for (auto& [key, samples] : groups) {
    const auto n = static_cast<std::int64_t>(samples.size());
    if (n < threshold) continue;
    std::sort(samples.begin(), samples.end());
    table.rows.emplace(key, QuantileRow{type7_quantile(samples, 0.1),
                                        type7_quantile(samples, 0.3),
                                        type7_quantile(samples, 0.5),
                                        type7_quantile(samples, 0.7),
                                        type7_quantile(samples, 0.9), n});
  }
  return table;
}

ReferenceBundle reference_inputs(std::span<const Trajectory> world,
                                 std::int64_t threshold) {
  ReferenceBundle bundle;
  std::map<Demographic, std::vector<Trajectory>> by_group;
  for (const Trajectory& t : world) {
    by_group[t.demographic].push_back(t);
    ++bundle.census[CensusKey{t.home, t.demographic}];
  }
  for (const auto& [group, trajs] : by_group) {
    OdMatrix od = od_matrix_of(trajs, group);
    od.suppress(threshold);
    bundle.od.emplace(group, std::move(od));
  }
  bundle.quantiles = aggregate_quantiles(world, threshold);
  return bundle;
}

ReferenceBundle reference_inputs(const WorldSpec& spec) {
  return reference_inputs(generate_world(spec), spec.threshold);
}

}  // namespace mobsynth
