#include "mobsynth/loss_state.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <string>

#include "mobsynth/error.hpp"

namespace mobsynth {

CompiledReference::CompiledReference(OdMatrix od, const DTParamTable& table,
                                     const std::set<CellCode>& extra_cells,
                                     int n_max, double t_min)
    : od_(std::move(od)), n_max_(n_max), t_min_(t_min) {
  if (od_.empty()) {
    throw InfeasibleError("undefined normalization: reference OD for " +
                          label(od_.group()) + " has no entries");
  }
  if (!(t_min_ > 0)) throw InputError("t_min must be positive");
  visit_reference_ = reference_visit_pmf(n_max_);

  std::set<CellCode> universe = extra_cells;
  for (const auto& [key, count] : od_.entries()) {
    universe.insert(key.origin);
    universe.insert(key.dest);
  }
  cells_.assign(universe.begin(), universe.end());

  dt_params_.resize(static_cast<std::size_t>(group_count()));
  for (int c = 0; c < cell_count(); ++c) {
    for (int h = 0; h < kHoursPerDay; ++h) {
      const CellHour key{cells_[static_cast<std::size_t>(c)], h};
      auto it = table.find(key);
      if (it == table.end()) {
        throw InputError("dwell-travel table has no entry for (" +
                         key.cell.str() + ", " + std::to_string(h) +
                         "); run fill_missing over the cell universe first");
      }
      dt_params_[static_cast<std::size_t>(group(c, h))] = it->second;
      table_.emplace(key, it->second);
    }
  }

  destinations_.resize(cells_.size());
  hourly_destinations_.resize(static_cast<std::size_t>(group_count()));
  rows_.resize(cells_.size());
  std::vector<bool> in_od(cells_.size(), false);
  for (const auto& [key, count] : od_.entries()) {
    const int o = index_of(key.origin);
    const int d = index_of(key.dest);
    od_target_.emplace(od_key(o, d, key.hour), count);
    od_denominator_ += count * count;
    destinations_[static_cast<std::size_t>(o)].push_back(d);
    hourly_destinations_[static_cast<std::size_t>(group(o, key.hour))].push_back(d);
    rows_[static_cast<std::size_t>(o)].emplace_back(d, key.hour);
    pair_hours_[static_cast<std::uint64_t>(o) * cells_.size() +
                static_cast<std::uint64_t>(d)]
        .push_back(key.hour);
    in_od[static_cast<std::size_t>(o)] = true;
    in_od[static_cast<std::size_t>(d)] = true;
  }
  for (auto& dests : destinations_) {
    std::sort(dests.begin(), dests.end());
    dests.erase(std::unique(dests.begin(), dests.end()), dests.end());
  }
  for (int c = 0; c < cell_count(); ++c) {
    if (in_od[static_cast<std::size_t>(c)]) od_cells_.push_back(c);
  }
}

std::span<const int> CompiledReference::hours(int origin, int dest) const {
  auto it = pair_hours_.find(static_cast<std::uint64_t>(origin) * cells_.size() +
                             static_cast<std::uint64_t>(dest));
  if (it == pair_hours_.end()) return {};
  return it->second;
}

int CompiledReference::index_of(const CellCode& cell) const {
  auto it = std::lower_bound(cells_.begin(), cells_.end(), cell);
  if (it == cells_.end() || *it != cell) return -1;
  return static_cast<int>(it - cells_.begin());
}

std::int64_t CompiledReference::od_target(std::uint64_t key) const noexcept {
  auto it = od_target_.find(key);
  return it == od_target_.end() ? 0 : it->second;
}

bool moved_stays(std::span<const AgentStay> stays, const Move& move,
                 int cell_count, std::vector<AgentStay>& out) {
  out.assign(stays.begin(), stays.end());
  const std::size_t n = stays.size();
  const std::size_t m = move.stay_index;
  const bool cell_ok = move.cell >= 0 && move.cell < cell_count;
  switch (move.kind) {
    case MoveKind::none:
      return true;
    case MoveKind::relocate:
      if (m < 1 || m >= n || !cell_ok || stays[m].cell == move.cell) return false;
      out[m].cell = move.cell;
      break;
    case MoveKind::insert:
      if (m < 1 || m > n || !cell_ok) return false;
      out.insert(out.begin() + static_cast<std::ptrdiff_t>(m),
                 AgentStay{move.cell, move.arrival});
      break;
    case MoveKind::remove:
      if (m < 1 || m >= n) return false;
      out.erase(out.begin() + static_cast<std::ptrdiff_t>(m));
      break;
    case MoveKind::retime:
      if (m < 1 || m >= n || stays[m].arrival == move.arrival) return false;
      out[m].arrival = move.arrival;
      break;
  }
  for (std::size_t k = 1; k < out.size(); ++k) {
    if (out[k].arrival - out[k - 1].arrival < kMinGapMinutes) return false;
    if (out[k].cell == out[k - 1].cell) return false;
  }
  return kMinutesPerDay - out.back().arrival >= kMinGapMinutes;
}

LossState::LossState(std::shared_ptr<const CompiledReference> reference,
                     std::span<const Trajectory> trajs,
                     std::optional<Normalizers> normalizers)
    : reference_(std::move(reference)) {
  if (trajs.empty()) throw InputError("loss state over an empty population");
  const CompiledReference& ref = *reference_;
  visit_counts_.assign(static_cast<std::size_t>(ref.n_max()), 0);
  samples_.resize(static_cast<std::size_t>(ref.group_count()));
  group_sums_.assign(samples_.size(), 0.0);
  quantile_cache_.resize(samples_.size());
  // With no synthetic flow every reference entry is missed in full.
  od_num_ = ref.od_denominator();
  od_eval_num_ = ref.od_denominator();

  agents_.reserve(trajs.size());
  for (const Trajectory& t : trajs) {
    validate(t);
    Agent a;
    a.id = t.agent_id;
    a.demographic = t.demographic;
    for (const Stay& s : t.stays) {
      const int c = ref.index_of(s.cell);
      if (c < 0) {
        throw InputError("agent " + std::to_string(t.agent_id) + ": cell " +
                         s.cell.str() + " is outside the reference universe");
      }
      a.stays.push_back(AgentStay{c, s.arrival});
    }
    transitions(a.stays, scratch_new_od_);
    for (std::uint64_t key : scratch_new_od_) change_od(key, +1);
    ++visit_counts_[static_cast<std::size_t>(visit_slot(a.stays.size()))];
    observations(a.stays, scratch_new_obs_);
    for (const auto& [g, minutes] : scratch_new_obs_) {
      samples_[static_cast<std::size_t>(g)].push_back(minutes);
    }
    obs_total_ += static_cast<std::int64_t>(scratch_new_obs_.size());
    agents_.push_back(std::move(a));
  }
  for (std::size_t g = 0; g < samples_.size(); ++g) {
    std::sort(samples_[g].begin(), samples_[g].end());
    group_sums_[g] = group_sum(static_cast<int>(g));
    dt_sum_ += group_sums_[g];
  }
  refresh_od();
  refresh_vf();
  refresh_dt();

  if (normalizers) {
    normalizers_ = *normalizers;
  } else {
    normalizers_ = Normalizers{raw_.od, raw_.vf, raw_.dt};
  }
  normalizers_.validate();
}

void LossState::observations(std::span<const AgentStay> stays,
                             std::vector<Obs>& out) const {
  out.clear();
  for (std::size_t m = 0; m < stays.size(); ++m) {
    const int next =
        m + 1 < stays.size() ? stays[m + 1].arrival : kMinutesPerDay;
    out.emplace_back(
        CompiledReference::group(stays[m].cell, hour_of(stays[m].arrival)),
        next - stays[m].arrival);
  }
}

void LossState::transitions(std::span<const AgentStay> stays,
                            std::vector<std::uint64_t>& out) const {
  out.clear();
  for (std::size_t m = 1; m < stays.size(); ++m) {
    out.push_back(reference_->od_key(stays[m - 1].cell, stays[m].cell,
                                     hour_of(stays[m].arrival)));
  }
}

void LossState::change_od(std::uint64_t key, std::int64_t delta) {
  auto it = od_counts_.find(key);
  const std::int64_t fs = it == od_counts_.end() ? 0 : it->second;
  const std::int64_t next = fs + delta;
  if (next < 0) throw InvariantError("synthetic OD count went negative");
  const std::int64_t fr = reference_->od_target(key);
  const std::int64_t weight =
      fr > 0 ? 1 : static_cast<std::int64_t>(kUnobservedFlowPenalty);
  const std::int64_t change = (next - fr) * (next - fr) - (fs - fr) * (fs - fr);
  od_num_ += weight * change;
  od_eval_num_ += change;
  if (next == 0) {
    od_counts_.erase(it);
  } else if (it == od_counts_.end()) {
    od_counts_.emplace(key, next);
  } else {
    it->second = next;
  }
}

void LossState::insert_sample(int group, int minutes) {
  auto& s = samples_[static_cast<std::size_t>(group)];
  s.insert(std::upper_bound(s.begin(), s.end(), minutes), minutes);
}

void LossState::erase_sample(int group, int minutes) {
  auto& s = samples_[static_cast<std::size_t>(group)];
  auto it = std::lower_bound(s.begin(), s.end(), minutes);
  if (it == s.end() || *it != minutes) {
    throw InvariantError("dwell-travel sample missing from its group");
  }
  s.erase(it);
}

const std::vector<double>& LossState::quantiles(int group, std::size_t n) {
  auto& cache = quantile_cache_[static_cast<std::size_t>(group)];
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  const DTParams& p = reference_->dt_params(group);
  std::vector<double> q(n);
  const double dn = static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    q[k] = truncated_quantile(p, reference_->t_min(),
                              (static_cast<double>(k) + 0.5) / dn);
  }
  return cache.emplace(n, std::move(q)).first->second;
}

double LossState::group_sum(int group) {
  const auto& s = samples_[static_cast<std::size_t>(group)];
  if (s.empty()) return 0.0;
  const auto& q = quantiles(group, s.size());
  double sum = 0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    sum += std::abs(static_cast<double>(s[k]) - q[k]);
  }
  return sum;
}

int LossState::visit_slot(std::size_t n) const {
  return static_cast<int>(std::min<std::size_t>(
             n, static_cast<std::size_t>(reference_->n_max()))) -
         1;
}

void LossState::refresh_vf() {
  raw_.vf = wasserstein_discrete(visit_pmf_from_counts(visit_counts_),
                                 reference_->visit_reference());
}

void LossState::refresh_od() {
  const double den = static_cast<double>(reference_->od_denominator());
  raw_.od = static_cast<double>(od_num_) / den;
  raw_.od_eval = static_cast<double>(od_eval_num_) / den;
}

void LossState::refresh_dt() {
  raw_.dt = static_cast<double>(dt_sum_ / static_cast<long double>(obs_total_));
}

MoveDelta LossState::apply(const Move& move) {
  if (move.agent >= agents_.size()) {
    throw InputError("move targets unknown agent " + std::to_string(move.agent));
  }
  Agent& a = agents_[move.agent];
  if (!moved_stays(a.stays, move, reference_->cell_count(), scratch_stays_)) {
    throw InputError("invalid move for agent " + std::to_string(move.agent));
  }

  undo_.armed = true;
  undo_.agent = move.agent;
  undo_.stays = a.stays;
  undo_.raw = raw_;
  undo_.dt_sum = dt_sum_;
  undo_.od_num = od_num_;
  undo_.od_eval_num = od_eval_num_;

  auto multiset_diff = [](auto& before, auto& after, auto& removed, auto& added) {
    std::sort(before.begin(), before.end());
    std::sort(after.begin(), after.end());
    removed.clear();
    added.clear();
    std::set_difference(before.begin(), before.end(), after.begin(), after.end(),
                        std::back_inserter(removed));
    std::set_difference(after.begin(), after.end(), before.begin(), before.end(),
                        std::back_inserter(added));
  };

  transitions(a.stays, scratch_old_od_);
  transitions(scratch_stays_, scratch_new_od_);
  multiset_diff(scratch_old_od_, scratch_new_od_, undo_.removed_od,
                undo_.added_od);
  for (std::uint64_t key : undo_.removed_od) change_od(key, -1);
  for (std::uint64_t key : undo_.added_od) change_od(key, +1);

  undo_.old_visit = visit_slot(a.stays.size());
  undo_.new_visit = visit_slot(scratch_stays_.size());
  if (undo_.old_visit != undo_.new_visit) {
    --visit_counts_[static_cast<std::size_t>(undo_.old_visit)];
    ++visit_counts_[static_cast<std::size_t>(undo_.new_visit)];
    refresh_vf();
  }

  observations(a.stays, scratch_old_obs_);
  observations(scratch_stays_, scratch_new_obs_);
  multiset_diff(scratch_old_obs_, scratch_new_obs_, undo_.removed_obs,
                undo_.added_obs);
  scratch_groups_.clear();
  for (const auto& [g, minutes] : undo_.removed_obs) {
    erase_sample(g, minutes);
    scratch_groups_.push_back(g);
  }
  for (const auto& [g, minutes] : undo_.added_obs) {
    insert_sample(g, minutes);
    scratch_groups_.push_back(g);
  }
  obs_total_ += static_cast<std::int64_t>(undo_.added_obs.size()) -
                static_cast<std::int64_t>(undo_.removed_obs.size());
  std::sort(scratch_groups_.begin(), scratch_groups_.end());
  scratch_groups_.erase(
      std::unique(scratch_groups_.begin(), scratch_groups_.end()),
      scratch_groups_.end());
  undo_.group_sums.clear();
  for (int g : scratch_groups_) {
    const double before = group_sums_[static_cast<std::size_t>(g)];
    const double after = group_sum(g);
    undo_.group_sums.emplace_back(g, before);
    group_sums_[static_cast<std::size_t>(g)] = after;
    dt_sum_ += static_cast<long double>(after) - static_cast<long double>(before);
  }

  refresh_od();
  refresh_dt();
  a.stays.swap(scratch_stays_);

  const RawLosses& b = undo_.raw;
  return MoveDelta{raw_, RawLosses{raw_.od - b.od, raw_.od_eval - b.od_eval,
                                   raw_.vf - b.vf, raw_.dt - b.dt}};
}

void LossState::revert() {
  if (!undo_.armed) throw InvariantError("revert without a preceding apply");
  undo_.armed = false;
  agents_[undo_.agent].stays = undo_.stays;

  for (std::uint64_t key : undo_.added_od) change_od(key, -1);
  for (std::uint64_t key : undo_.removed_od) change_od(key, +1);
  if (undo_.old_visit != undo_.new_visit) {
    --visit_counts_[static_cast<std::size_t>(undo_.new_visit)];
    ++visit_counts_[static_cast<std::size_t>(undo_.old_visit)];
  }
  for (const auto& [g, minutes] : undo_.added_obs) erase_sample(g, minutes);
  for (const auto& [g, minutes] : undo_.removed_obs) insert_sample(g, minutes);
  obs_total_ += static_cast<std::int64_t>(undo_.removed_obs.size()) -
                static_cast<std::int64_t>(undo_.added_obs.size());
  for (const auto& [g, sum] : undo_.group_sums) {
    group_sums_[static_cast<std::size_t>(g)] = sum;
  }
  dt_sum_ = undo_.dt_sum;
  od_num_ = undo_.od_num;
  od_eval_num_ = undo_.od_eval_num;
  raw_ = undo_.raw;
}

RawLosses LossState::recompute() const {
  const std::vector<Trajectory> trajs = trajectories();
  const CompiledReference& ref = *reference_;
  OdMatrix synthetic(ref.od().group());
  for (const Trajectory& t : trajs) {
    for (std::size_t m = 1; m < t.stays.size(); ++m) {
      synthetic.add(OdKey{t.stays[m - 1].cell, t.stays[m].cell,
                          hour_of(t.stays[m].arrival)},
                    1);
    }
  }
  RawLosses out;
  out.od = loss_od(synthetic, ref.od());
  out.od_eval = loss_od_eval(synthetic, ref.od());
  out.vf = loss_vf(trajs, ref.n_max());
  out.dt = loss_dt(trajs, ref.table(), ref.t_min());
  return out;
}

std::vector<Trajectory> LossState::trajectories() const {
  std::vector<Trajectory> out;
  out.reserve(agents_.size());
  for (const Agent& a : agents_) {
    Trajectory t{a.id, a.demographic,
                 reference_->cell(a.stays.front().cell), {}};
    t.stays.reserve(a.stays.size());
    for (const AgentStay& s : a.stays) {
      t.stays.push_back(Stay{reference_->cell(s.cell), s.arrival});
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace mobsynth
