#include "mobsynth/options.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <type_traits>

#include "mobsynth/error.hpp"

namespace mobsynth {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  while (true) {
    const auto p = s.find(sep);
    out.push_back(trim(s.substr(0, p)));
    if (p == std::string_view::npos) break;
    s.remove_prefix(p + 1);
  }
  return out;
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw InputError("option " + std::string(key) + ": cannot parse '" +
                     std::string(text) + "'");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) {
      throw InputError("option " + std::string(key) + " must be finite");
    }
  }
  return v;
}

template <typename T>
T parse_min(std::string_view key, std::string_view text, T min) {
  const T v = parse_number<T>(key, text);
  if (v < min) {
    throw InputError("option " + std::string(key) + " must be >= " +
                     std::to_string(min));
  }
  return v;
}

template <typename T>
std::vector<T> parse_list(std::string_view key, std::string_view text) {
  std::vector<T> out;
  for (std::string_view item : split(text, ',')) {
    out.push_back(parse_number<T>(key, item));
  }
  return out;
}

}  // namespace

Demographic parse_demographic(std::string_view text) {
  const auto p = text.find('_');
  if (p == std::string_view::npos) {
    throw InputError("demographic '" + std::string(text) +
                     "' must look like male_20s");
  }
  return Demographic{parse_sex(text.substr(0, p)),
                     parse_age_group(text.substr(p + 1))};
}

void Options::set(std::string_view raw_key, std::string_view raw_value) {
  std::string key(trim(raw_key));
  for (char& c : key) {
    if (c == '_') c = '-';
  }
  const std::string_view value = trim(raw_value);
  if (key == "seed") {
    seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "jobs") {
    jobs = parse_min<int>(key, value, 1);
  } else if (key == "tau-max") {
    tau_max = parse_min<std::int64_t>(key, value, 0);
  } else if (key == "t-max") {
    t_max = parse_number<double>(key, value);
  } else if (key == "t-min") {
    t_min = parse_number<double>(key, value);
  } else if (key == "n-max") {
    n_max = parse_min<int>(key, value, 1);
  } else if (key == "threshold") {
    threshold = parse_min<std::int64_t>(key, value, 0);
  } else if (key == "steps-per-agent") {
    steps_per_agent = parse_min<std::int64_t>(key, value, 1);
  } else if (key == "w-od") {
    weights.od = parse_number<double>(key, value);
  } else if (key == "w-vf") {
    weights.vf = parse_number<double>(key, value);
  } else if (key == "w-dt") {
    weights.dt = parse_number<double>(key, value);
  } else if (key == "levels") {
    levels = parse_min<int>(key, value, 1);
  } else if (key == "population") {
    std::map<Demographic, std::int64_t> pop;
    for (std::string_view item : split(value, ',')) {
      const auto colon = item.find(':');
      if (colon == std::string_view::npos) {
        throw InputError("option population: expected group:count, got '" +
                         std::string(item) + "'");
      }
      const Demographic d = parse_demographic(trim(item.substr(0, colon)));
      pop[d] = parse_min<std::int64_t>(key, trim(item.substr(colon + 1)), 0);
    }
    population = std::move(pop);
  } else if (key == "grid-w-vf") {
    grid_w_vf = parse_list<double>(key, value);
  } else if (key == "grid-w-dt") {
    grid_w_dt = parse_list<double>(key, value);
  } else if (key == "grid-seeds") {
    grid_seeds = parse_list<std::uint64_t>(key, value);
  } else {
    throw InputError("unknown option '" + std::string(raw_key) + "'");
  }
}

RunConfig Options::run_config() const {
  RunConfig cfg;
  cfg.weights = weights;
  cfg.schedule = Schedule{tau_max, t_max, t_min};
  cfg.seed = seed;
  cfg.steps_per_agent = steps_per_agent;
  cfg.n_max = n_max;
  return cfg;
}

WorldSpec Options::world_spec() const {
  WorldSpec spec;
  spec.levels = levels;
  spec.population = population;
  spec.threshold = threshold;
  spec.seed = seed;
  return spec;
}

GridSearchPlan Options::grid_plan() const {
  GridSearchPlan plan;
  plan.w_vf = grid_w_vf;
  plan.w_dt = grid_w_dt;
  plan.seeds = grid_seeds.empty() ? std::vector<std::uint64_t>{seed} : grid_seeds;
  plan.jobs = jobs;
  return plan;
}

std::vector<std::pair<std::string, std::string>> parse_config(
    std::istream& in, std::string_view source) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string_view t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos || trim(t.substr(0, eq)).empty()) {
      throw InputError(std::string(source) + ":" + std::to_string(number) +
                       ": expected key = value");
    }
    out.emplace_back(std::string(trim(t.substr(0, eq))),
                     std::string(trim(t.substr(eq + 1))));
  }
  return out;
}

void load_config(const std::filesystem::path& path, Options& options) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path.string());
  const auto entries = parse_config(in, path.string());
  for (const auto& [key, value] : entries) {
    try {
      options.set(key, value);
    } catch (const InputError& e) {
      throw InputError(path.string() + ": " + e.what());
    }
  }
}

}  // namespace mobsynth
