#include "mobsynth/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <map>

#include "json.hpp"
#include "mobsynth/error.hpp"
#include "mobsynth/io.hpp"

namespace mobsynth {

namespace {

double sum_sq(const OdMatrix& m) {
  double s = 0;
  for (const auto& [key, count] : m.entries()) {
    s += static_cast<double>(count) * static_cast<double>(count);
  }
  return s;
}

nlohmann::ordered_json raw_json(const RawLosses& r) {
  nlohmann::ordered_json j;
  j["l_od"] = r.od;
  j["l_od_eval"] = r.od_eval;
  j["l_vf"] = r.vf;
  j["l_dt"] = r.dt;
  return j;
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

DTParamTable engine_table(const ReferenceBundle& bundle,
                          const std::set<CellCode>& extra_cells) {
  std::set<CellCode> cells = extra_cells;
  for (const auto& [group, od] : bundle.od) {
    for (const auto& [key, count] : od.entries()) {
      cells.insert(key.origin);
      cells.insert(key.dest);
    }
  }
  for (const auto& [key, count] : bundle.census) cells.insert(key.home);
  return fill_missing(fit_table(bundle.quantiles), full_day_universe(cells));
}

LossReport evaluate(std::span<const Trajectory> trajs, const ReferenceBundle& bundle,
                    const EvalConfig& cfg) {
  cfg.weights.validate();
  if (trajs.empty()) throw InputError("evaluate: no trajectories");
  std::map<Demographic, std::vector<Trajectory>> by_group;
  std::set<CellCode> visited;
  for (const Trajectory& t : trajs) {
    if (!bundle.od.contains(t.demographic)) {
      throw InputError("no reference OD for " + label(t.demographic));
    }
    for (const Stay& s : t.stays) visited.insert(s.cell);
    by_group[t.demographic].push_back(t);
  }
  const DTParamTable table = engine_table(bundle, visited);

  LossReport report;
  report.weights = cfg.weights;
  std::map<Demographic, double> od_eval;
  for (const auto& [group, members] : by_group) {
    const OdMatrix& ref = bundle.od.at(group);
    GroupReport g;
    g.group = group;
    g.agents = static_cast<std::int64_t>(members.size());
    const OdMatrix synthetic = od_matrix_of(members, group);
    g.raw.od = loss_od(synthetic, ref);
    g.raw.od_eval = loss_od_eval(synthetic, ref);
    g.raw.vf = loss_vf(members, cfg.n_max);
    g.raw.dt = loss_dt(members, table, cfg.t_min);

    Census census = census_of(bundle.census, group);
    if (census_total(census) == 0) {
      for (const Trajectory& t : members) ++census[CensusKey{t.home, group}];
    }
    const std::vector<Trajectory> home = init_state(census);
    g.normalizers.od = loss_od(OdMatrix(group), ref);
    g.normalizers.vf = loss_vf(home, cfg.n_max);
    g.normalizers.dt = loss_dt(home, table, cfg.t_min);
    try {
      g.normalizers.validate();
    } catch (const Error& e) {
      throw with_context(e, label(group));
    }
    g.normalized = normalize(g.raw, g.normalizers);
    g.total = loss_total(g.raw, g.normalizers, cfg.weights);
    od_eval[group] = g.raw.od_eval;
    report.groups.push_back(g);
  }

  double num = 0;
  double den = 0;
  for (const auto& [group, ref] : bundle.od) {
    const double d = sum_sq(ref);
    if (d == 0) continue;
    auto it = od_eval.find(group);
    num += (it == od_eval.end() ? 1.0 : it->second) * d;
    den += d;
  }
  if (den == 0) throw InfeasibleError("evaluate: reference OD is empty");
  report.od_eval = num / den;
  report.sqrt_od_eval = std::sqrt(report.od_eval);
  report.vf = loss_vf(trajs, cfg.n_max);
  report.dt = loss_dt(trajs, table, cfg.t_min);
  report.fluctuation_bound = fluctuation_bound(kOdAggregationDays);
  return report;
}

std::string report_json(const LossReport& report) {
  nlohmann::ordered_json j;
  j["weights"] = {{"w_od", report.weights.od},
                  {"w_vf", report.weights.vf},
                  {"w_dt", report.weights.dt}};
  j["pooled"] = {{"l_od_eval", report.od_eval},
                 {"sqrt_od_eval", report.sqrt_od_eval},
                 {"l_vf", report.vf},
                 {"l_dt", report.dt}};
  j["fluctuation_bound"] = report.fluctuation_bound;
  auto groups = nlohmann::ordered_json::array();
  for (const GroupReport& g : report.groups) {
    nlohmann::ordered_json e;
    e["group"] = label(g.group);
    e["agents"] = g.agents;
    e["raw"] = raw_json(g.raw);
    e["sqrt_od_eval"] = std::sqrt(g.raw.od_eval);
    e["normalizers"] = {{"l_od", g.normalizers.od},
                        {"l_vf", g.normalizers.vf},
                        {"l_dt", g.normalizers.dt}};
    e["normalized"] = {{"l_od", g.normalized.od},
                       {"l_vf", g.normalized.vf},
                       {"l_dt", g.normalized.dt}};
    e["l_tot"] = g.total;
    groups.push_back(std::move(e));
  }
  j["groups"] = std::move(groups);
  return j.dump(2) + "\n";
}

std::string report_summary(const LossReport& report) {
  std::string out;
  for (const GroupReport& g : report.groups) {
    out += label(g.group) + ": agents " + std::to_string(g.agents) +
           "  sqrt_l_od_eval " + fixed(std::sqrt(g.raw.od_eval)) + "  l_vf " +
           fixed(g.raw.vf) + "  l_dt " + fixed(g.raw.dt, 2) + " min  l_tot " +
           fixed(g.total) + "\n";
  }
  out += "pooled: l_od_eval " + fixed(report.od_eval, 6) + "  sqrt_l_od_eval " +
         fixed(report.sqrt_od_eval) + "  l_vf " + fixed(report.vf) + "  l_dt " +
         fixed(report.dt, 2) + " min\n";
  out += "fluctuation bound (20-day average, 1/sqrt(20)): " +
         fixed(report.fluctuation_bound) + "\n";
  return out;
}

GenerateResult generate(const ReferenceBundle& bundle, const RunConfig& cfg,
                        int jobs) {
  const DTParamTable table = engine_table(bundle);
  std::map<Demographic, GroupInput> inputs;
  for (const auto& [key, count] : bundle.census) {
    if (count == 0 || inputs.contains(key.group)) continue;
    auto it = bundle.od.find(key.group);
    inputs.emplace(key.group,
                   GroupInput{it == bundle.od.end() ? OdMatrix(key.group) : it->second,
                              census_of(bundle.census, key.group)});
  }
  if (inputs.empty()) throw InputError("generate: census is empty");
  GenerateResult result;
  result.run = run_all_groups(inputs, table, cfg, jobs);
  result.report = evaluate(result.run.trajectories, bundle,
                           EvalConfig{cfg.weights, cfg.n_max, cfg.t_min_dwell});
  return result;
}

void save_generate(const std::filesystem::path& dir, const GenerateResult& result) {
  save_trajectories(dir / "trajectories.csv", result.run.trajectories);
  save_text(dir / "loss_report.json", report_json(result.report));
  for (const RunResult& r : result.run.groups) {
    save_trace(dir / ("trace_" + label(r.group) + ".csv"), r.trace);
  }
}

}  // namespace mobsynth
