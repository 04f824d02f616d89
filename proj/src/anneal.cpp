#include "mobsynth/anneal.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "mobsynth/error.hpp"
#include "mobsynth/parallel.hpp"

namespace mobsynth {

namespace {

constexpr int kProposalAttempts = 16;
constexpr std::int64_t kTracePoints = 200;

template <typename T>
const T& pick(std::span<const T> pool, Rng& rng) {
  return pool[static_cast<std::size_t>(
      rng.between(0, static_cast<std::int64_t>(pool.size()) - 1))];
}

// Destination for a stay entered from `origin` during `hour`: a cell the
// reference reaches from `origin` in that hour, else in any hour, else any
// OD cell.
int draw_cell(const CompiledReference& ref, int origin, int hour, Rng& rng,
              double pool_fallback) {
  if (rng.bernoulli(pool_fallback)) {
    return ref.od_cells().empty() ? -1 : pick(ref.od_cells(), rng);
  }
  std::span<const int> pool = ref.destinations(origin, hour);
  if (pool.empty()) pool = ref.destinations(origin);
  if (pool.empty()) pool = ref.od_cells();
  if (pool.empty()) return -1;
  return pick(pool, rng);
}

// Arrival in [lo, hi] restricted to `hour`, or -1 when they do not overlap.
int draw_in_hour(int lo, int hi, int hour, Rng& rng) {
  const int a = std::max(lo, hour * 60);
  const int b = std::min(hi, hour * 60 + 59);
  if (a > b) return -1;
  return static_cast<int>(rng.between(a, b));
}

}  // namespace

void Schedule::validate() const {
  if (tau_max < 2 || tau_max % 2 != 0) {
    throw InputError("tau_max must be an even number >= 2");
  }
  if (!(t_max > 0) || !std::isfinite(t_max)) {
    throw InputError("t_max must be positive");
  }
  if (!(t_min > 0) || !(t_min < t_max)) {
    throw InputError("t_min must be in (0, t_max)");
  }
}

double temperature(std::int64_t tau, const Schedule& s) {
  if (tau < 0 || tau >= s.tau_max) {
    throw InputError("temperature: tau " + std::to_string(tau) +
                     " outside [0, tau_max)");
  }
  const std::int64_t half = s.tau_max / 2;
  const double frac =
      static_cast<double>(tau % half) / static_cast<double>(half);
  return s.t_max * std::pow(s.t_min / s.t_max, frac);
}

std::vector<Trajectory> init_state(const Census& population) {
  std::vector<Trajectory> out;
  for (const auto& [key, count] : population) {
    if (count < 0) throw InputError("negative census count");
    for (std::int64_t i = 0; i < count; ++i) {
      out.push_back(Trajectory{static_cast<std::int64_t>(out.size()), key.group,
                               key.home, {Stay{key.home, 0}}});
    }
  }
  if (out.empty()) throw InputError("init_state: population is empty");
  return out;
}

Move propose_move(const LossState& state, Rng& rng, double pool_fallback) {
  thread_local std::vector<AgentStay> scratch;
  const CompiledReference& ref = state.reference();
  const auto agents = static_cast<std::int64_t>(state.agent_count());
  for (int attempt = 0; attempt < kProposalAttempts; ++attempt) {
    Move mv;
    mv.agent = static_cast<std::size_t>(rng.between(0, agents - 1));
    const auto& stays = state.agent(mv.agent).stays;
    const auto n = static_cast<std::int64_t>(stays.size());
    const double r = rng.uniform();
    if (r < kRelocateShare) {
      mv.kind = MoveKind::relocate;
    } else if (r < kRelocateShare + kInsertShare) {
      mv.kind = MoveKind::insert;
    } else if (r < kRelocateShare + kInsertShare + kRemoveShare) {
      mv.kind = MoveKind::remove;
    } else {
      mv.kind = MoveKind::retime;
    }
    if (mv.kind != MoveKind::insert && n < 2) continue;

    switch (mv.kind) {
      case MoveKind::relocate: {
        mv.stay_index = static_cast<std::size_t>(rng.between(1, n - 1));
        mv.cell = draw_cell(ref, stays[mv.stay_index - 1].cell,
                            hour_of(stays[mv.stay_index].arrival), rng,
                            pool_fallback);
        break;
      }
      case MoveKind::insert: {
        mv.stay_index = static_cast<std::size_t>(rng.between(1, n));
        const int origin = stays[mv.stay_index - 1].cell;
        const int lo = stays[mv.stay_index - 1].arrival + kMinGapMinutes;
        const int hi = (static_cast<std::int64_t>(mv.stay_index) < n
                            ? stays[mv.stay_index].arrival
                            : kMinutesPerDay) -
                       kMinGapMinutes;
        if (lo > hi) continue;
        const auto row = ref.row(origin);
        if (!row.empty() && rng.bernoulli(kHourMatchedShare)) {
          const auto [dest, hour] = pick(row, rng);
          mv.arrival = draw_in_hour(lo, hi, hour, rng);
          mv.cell = dest;
          if (mv.arrival < 0) continue;
        } else {
          mv.arrival = static_cast<int>(rng.between(lo, hi));
          mv.cell = draw_cell(ref, origin, hour_of(mv.arrival), rng, pool_fallback);
        }
        break;
      }
      case MoveKind::remove:
        mv.stay_index = static_cast<std::size_t>(rng.between(1, n - 1));
        break;
      case MoveKind::retime: {
        mv.stay_index = static_cast<std::size_t>(rng.between(1, n - 1));
        const int lo = stays[mv.stay_index - 1].arrival + kMinGapMinutes;
        const int hi = (static_cast<std::int64_t>(mv.stay_index) + 1 < n
                            ? stays[mv.stay_index + 1].arrival
                            : kMinutesPerDay) -
                       kMinGapMinutes;
        if (lo > hi) continue;
        const auto hours =
            ref.hours(stays[mv.stay_index - 1].cell, stays[mv.stay_index].cell);
        if (!hours.empty() && rng.bernoulli(kHourMatchedShare)) {
          mv.arrival = draw_in_hour(lo, hi, pick(hours, rng), rng);
          if (mv.arrival < 0) continue;
        } else {
          mv.arrival = static_cast<int>(rng.between(lo, hi));
        }
        break;
      }
      case MoveKind::none:
        break;
    }
    if (moved_stays(stays, mv, ref.cell_count(), scratch)) return mv;
  }
  return Move{};
}

bool accept(double delta, double temp, Rng& rng) {
  if (!(temp > 0)) throw InputError("accept: temperature must be positive");
  if (delta <= 0) return true;
  return rng.uniform() < std::exp(-delta / temp);
}

RunResult optimize(const OdMatrix& reference, const DTParamTable& table,
                   const Census& population, const RunConfig& cfg) {
  cfg.weights.validate();
  for (const auto& [key, count] : population) {
    if (key.group != reference.group()) {
      throw InputError("census entry for " + label(key.group) +
                       " in a run for " + label(reference.group()));
    }
  }
  std::vector<Trajectory> initial = init_state(population);
  std::set<CellCode> homes;
  for (const auto& [key, count] : population) homes.insert(key.home);

  auto ref = std::make_shared<const CompiledReference>(
      reference, table, homes, cfg.n_max, cfg.t_min_dwell);
  LossState state(ref, initial);

  Schedule schedule = cfg.schedule;
  const auto agents = static_cast<std::int64_t>(initial.size());
  if (schedule.tau_max == 0) {
    schedule.tau_max = cfg.steps_per_agent * agents;
    schedule.tau_max += schedule.tau_max % 2;
  }
  schedule.validate();

  RunResult result;
  result.group = reference.group();
  result.weights = cfg.weights;
  result.initial = state.raw();
  result.normalizers = state.normalizers();
  result.tau_max = schedule.tau_max;

  const Weights& w = cfg.weights;
  const double scale = static_cast<double>(agents);
  const std::int64_t trace_every =
      std::max<std::int64_t>(1, schedule.tau_max / kTracePoints);
  auto record = [&](double tau_frac) {
    result.trace.push_back(TracePoint{
        tau_frac, normalize(state.raw(), state.normalizers()), state.total(w)});
  };

  Rng rng(cfg.seed);
  double current = state.total(w);
  for (std::int64_t tau = 0; tau < schedule.tau_max; ++tau) {
    if (tau % trace_every == 0) {
      record(static_cast<double>(tau) / static_cast<double>(schedule.tau_max));
    }
    const double temp = temperature(tau, schedule);
    const Move mv = propose_move(state, rng, cfg.pool_fallback);
    if (mv.kind == MoveKind::none) {
      ++result.null_moves;
      continue;
    }
    state.apply(mv);
    const double next = state.total(w);
    if (accept(scale * (next - current), temp, rng)) {
      current = next;
      ++result.accepted;
    } else {
      state.revert();
    }
  }
  record(1.0);

  result.final_losses = state.raw();
  result.trajectories = state.trajectories();
  return result;
}

std::uint64_t group_seed(std::uint64_t seed, const Demographic& group) {
  return derive_seed(seed, label(group));
}

MergedRun run_all_groups(const std::map<Demographic, GroupInput>& inputs,
                         const DTParamTable& table, const RunConfig& cfg,
                         int jobs) {
  if (inputs.empty()) throw InputError("no demographic groups to run");
  std::vector<const std::pair<const Demographic, GroupInput>*> order;
  for (const auto& kv : inputs) order.push_back(&kv);

  MergedRun merged;
  merged.groups.resize(order.size());
  parallel_for(order.size(), jobs, [&](std::size_t i) {
    const auto& [group, input] = *order[i];
    RunConfig group_cfg = cfg;
    group_cfg.seed = group_seed(cfg.seed, group);
    try {
      merged.groups[i] = optimize(input.od, table, input.census, group_cfg);
    } catch (const Error& e) {
      throw with_context(e, "group " + label(group));
    }
  });

  std::int64_t next_id = 0;
  for (const RunResult& r : merged.groups) {
    for (Trajectory t : r.trajectories) {
      t.agent_id = next_id++;
      merged.trajectories.push_back(std::move(t));
    }
  }
  return merged;
}

}  // namespace mobsynth
