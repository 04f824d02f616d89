#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <unordered_map>
#include <vector>

#include "mobsynth/lognormal.hpp"
#include "mobsynth/losses.hpp"
#include "mobsynth/model.hpp"

namespace mobsynth {

// Reference data for one demographic run, re-keyed by dense cell indices.
// Immutable once built; safe to share across threads.
class CompiledReference {
 public:
  // The cell universe is every cell of `od` plus `extra_cells` (homes).
  // Throws InfeasibleError on an empty `od` and InputError if `table` lacks
  // a (cell, hour) of the universe.
  CompiledReference(OdMatrix od, const DTParamTable& table,
                    const std::set<CellCode>& extra_cells,
                    int n_max = kDefaultVisitCap,
                    double t_min = kMinGapMinutes);

  int cell_count() const noexcept { return static_cast<int>(cells_.size()); }
  const CellCode& cell(int index) const { return cells_.at(static_cast<std::size_t>(index)); }
  // -1 when the cell is outside the universe.
  int index_of(const CellCode& cell) const;

  std::uint64_t od_key(int origin, int dest, int hour) const noexcept {
    return (static_cast<std::uint64_t>(origin) * cells_.size() +
            static_cast<std::uint64_t>(dest)) *
               kHoursPerDay +
           static_cast<std::uint64_t>(hour);
  }
  std::int64_t od_target(std::uint64_t key) const noexcept;
  std::int64_t od_denominator() const noexcept { return od_denominator_; }

  // Dwell-travel group index of (cell, hour).
  static int group(int cell, int hour) noexcept { return cell * kHoursPerDay + hour; }
  int group_count() const noexcept { return cell_count() * kHoursPerDay; }
  const DTParams& dt_params(int group) const {
    return dt_params_[static_cast<std::size_t>(group)];
  }

  // Cells reached from `origin` in any hour of the reference OD.
  std::span<const int> destinations(int origin) const {
    return destinations_[static_cast<std::size_t>(origin)];
  }
  // Cells reached from `origin` with arrival in `hour`.
  std::span<const int> destinations(int origin, int hour) const {
    return hourly_destinations_[static_cast<std::size_t>(group(origin, hour))];
  }
  // Observed (dest, hour) pairs leaving `origin`.
  std::span<const std::pair<int, int>> row(int origin) const {
    return rows_[static_cast<std::size_t>(origin)];
  }
  // Observed arrival hours of the pair origin -> dest.
  std::span<const int> hours(int origin, int dest) const;
  // Every cell that appears in the reference OD.
  std::span<const int> od_cells() const { return od_cells_; }

  const VisitPmf& visit_reference() const noexcept { return visit_reference_; }
  int n_max() const noexcept { return n_max_; }
  double t_min() const noexcept { return t_min_; }

  const OdMatrix& od() const noexcept { return od_; }
  const DTParamTable& table() const noexcept { return table_; }

 private:
  OdMatrix od_;
  DTParamTable table_;
  std::vector<CellCode> cells_;
  std::unordered_map<std::uint64_t, std::int64_t> od_target_;
  std::int64_t od_denominator_ = 0;
  std::vector<DTParams> dt_params_;
  std::vector<std::vector<int>> destinations_;
  std::vector<std::vector<int>> hourly_destinations_;
  std::vector<std::vector<std::pair<int, int>>> rows_;
  std::unordered_map<std::uint64_t, std::vector<int>> pair_hours_;
  std::vector<int> od_cells_;
  VisitPmf visit_reference_;
  int n_max_;
  double t_min_;
};

struct AgentStay {
  int cell = 0;
  int arrival = 0;

  friend bool operator==(const AgentStay&, const AgentStay&) = default;
};

struct Agent {
  std::int64_t id = 0;
  Demographic demographic;
  std::vector<AgentStay> stays;  // stays[0] is home at minute 0
};

enum class MoveKind : std::uint8_t { none, relocate, insert, remove, retime };

// One elementary trajectory edit. `stay_index` is the stay changed
// (relocate, remove, retime) or the position the new stay takes (insert).
struct Move {
  MoveKind kind = MoveKind::none;
  std::size_t agent = 0;
  std::size_t stay_index = 0;
  int cell = -1;     // relocate, insert
  int arrival = -1;  // insert, retime

  friend bool operator==(const Move&, const Move&) = default;
};

// Writes the stays that result from `move` into `out`. Returns false when the
// move is malformed or would break a trajectory invariant.
bool moved_stays(std::span<const AgentStay> stays, const Move& move,
                 int cell_count, std::vector<AgentStay>& out);

struct MoveDelta {
  RawLosses after;
  RawLosses delta;  // after - before, per term
};

// Population under optimization plus incrementally maintained loss
// accumulators: synthetic OD counts, visit-count histogram and per
// (cell, hour) sorted dwell-travel samples. Single writer.
class LossState {
 public:
  // Normalizers default to the losses of `trajs` (the initial state).
  // Throws InputError on invalid trajectories or cells outside the
  // universe, InfeasibleError on a zero normalizer.
  LossState(std::shared_ptr<const CompiledReference> reference,
            std::span<const Trajectory> trajs,
            std::optional<Normalizers> normalizers = std::nullopt);

  const CompiledReference& reference() const noexcept { return *reference_; }
  const RawLosses& raw() const noexcept { return raw_; }
  const Normalizers& normalizers() const noexcept { return normalizers_; }
  double total(const Weights& w) const { return loss_total(raw_, normalizers_, w); }

  std::size_t agent_count() const noexcept { return agents_.size(); }
  const Agent& agent(std::size_t i) const { return agents_.at(i); }

  // Applies `move` and updates the cached losses. An invalid move throws
  // InputError and leaves the state untouched.
  MoveDelta apply(const Move& move);

  // Undoes the most recent apply(). Accumulators and cached losses are
  // restored bit for bit. Throws InvariantError if there is nothing to undo.
  void revert();

  // Losses recomputed from scratch through the public loss functions.
  RawLosses recompute() const;

  std::vector<Trajectory> trajectories() const;

  // Accumulator views, for consistency checks.
  const std::unordered_map<std::uint64_t, std::int64_t>& od_counts() const noexcept {
    return od_counts_;
  }
  const std::vector<std::int64_t>& visit_counts() const noexcept {
    return visit_counts_;
  }
  const std::vector<int>& group_samples(int group) const {
    return samples_.at(static_cast<std::size_t>(group));
  }

 private:
  using Obs = std::pair<int, int>;  // (group, minutes)

  struct Undo {
    bool armed = false;
    std::size_t agent = 0;
    std::vector<AgentStay> stays;
    std::vector<Obs> removed_obs, added_obs;
    std::vector<std::uint64_t> removed_od, added_od;
    int old_visit = 0, new_visit = 0;
    std::vector<std::pair<int, double>> group_sums;
    RawLosses raw;
    long double dt_sum = 0;
    std::int64_t od_num = 0, od_eval_num = 0;
  };

  void observations(std::span<const AgentStay> stays, std::vector<Obs>& out) const;
  void transitions(std::span<const AgentStay> stays,
                   std::vector<std::uint64_t>& out) const;
  void change_od(std::uint64_t key, std::int64_t delta);
  void insert_sample(int group, int minutes);
  void erase_sample(int group, int minutes);
  double group_sum(int group);
  const std::vector<double>& quantiles(int group, std::size_t n);
  int visit_slot(std::size_t n) const;
  void refresh_vf();
  void refresh_od();
  void refresh_dt();

  std::shared_ptr<const CompiledReference> reference_;
  std::vector<Agent> agents_;
  std::unordered_map<std::uint64_t, std::int64_t> od_counts_;
  std::int64_t od_num_ = 0;       // sum c * (F_s - F_r)^2, exact
  std::int64_t od_eval_num_ = 0;  // same with c = 1
  std::vector<std::int64_t> visit_counts_;
  std::vector<std::vector<int>> samples_;
  std::vector<double> group_sums_;  // sum_k |T_(k) - q_k| per group
  long double dt_sum_ = 0;
  std::int64_t obs_total_ = 0;
  std::vector<std::unordered_map<std::size_t, std::vector<double>>> quantile_cache_;
  RawLosses raw_;
  Normalizers normalizers_;
  Undo undo_;
  std::vector<AgentStay> scratch_stays_;
  std::vector<Obs> scratch_old_obs_, scratch_new_obs_;
  std::vector<std::uint64_t> scratch_old_od_, scratch_new_od_;
  std::vector<int> scratch_groups_;
};

}  // namespace mobsynth
