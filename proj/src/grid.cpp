#include <cmath>
#include <ostream>
#include <sstream>

#include "mobsynth/error.hpp"
#include "mobsynth/io.hpp"
#include "mobsynth/parallel.hpp"
#include "mobsynth/pipeline.hpp"

namespace mobsynth {

void GridSearchPlan::validate() const {
  if (w_vf.empty() || w_dt.empty() || seeds.empty()) {
    throw InputError("grid search needs non-empty w_vf, w_dt and seed lists");
  }
  for (double w : w_vf) {
    if (!(w >= 0) || !std::isfinite(w)) throw InputError("w_vf values must be >= 0");
  }
  for (double w : w_dt) {
    if (!(w >= 0) || !std::isfinite(w)) throw InputError("w_dt values must be >= 0");
  }
  if (jobs < 1) throw InputError("jobs must be >= 1");
}

std::vector<GridRow> run_grid_search(const GridSearchPlan& plan,
                                     const ReferenceBundle& bundle,
                                     const RunConfig& base) {
  plan.validate();
  std::vector<GridRow> rows;
  for (double vf : plan.w_vf) {
    for (double dt : plan.w_dt) {
      for (std::uint64_t seed : plan.seeds) {
        GridRow row;
        row.w_vf = vf;
        row.w_dt = dt;
        row.seed = seed;
        rows.push_back(row);
      }
    }
  }
  parallel_for(rows.size(), plan.jobs, [&](std::size_t i) {
    GridRow& row = rows[i];
    RunConfig cfg = base;
    cfg.weights = Weights{1.0, row.w_vf, row.w_dt};
    cfg.seed = row.seed;
    try {
      const GenerateResult r = generate(bundle, cfg, 1);
      row.l_od_eval = r.report.od_eval;
      row.sqrt_l_od_eval = r.report.sqrt_od_eval;
      row.l_vf = r.report.vf;
      row.l_dt = r.report.dt;
      row.ok = true;
    } catch (const Error& e) {
      row.error = e.what();
    }
  });
  return rows;
}

std::vector<GridMean> grid_means(std::span<const GridRow> rows) {
  std::vector<GridMean> out;
  for (const GridRow& row : rows) {
    if (out.empty() || out.back().w_vf != row.w_vf || out.back().w_dt != row.w_dt) {
      out.push_back(GridMean{row.w_vf, row.w_dt});
    }
    if (!row.ok) continue;
    GridMean& m = out.back();
    ++m.runs;
    m.l_od_eval += row.l_od_eval;
    m.sqrt_l_od_eval += row.sqrt_l_od_eval;
    m.l_vf += row.l_vf;
    m.l_dt += row.l_dt;
  }
  for (GridMean& m : out) {
    if (m.runs == 0) {
      m.l_od_eval = m.sqrt_l_od_eval = m.l_vf = m.l_dt = std::nan("");
      continue;
    }
    const auto n = static_cast<double>(m.runs);
    m.l_od_eval /= n;
    m.sqrt_l_od_eval /= n;
    m.l_vf /= n;
    m.l_dt /= n;
  }
  return out;
}

void write_grid(std::ostream& out, std::span<const GridRow> rows) {
  out << "w_vf,w_dt,seed,l_od_eval,sqrt_l_od_eval,l_vf,l_dt\n";
  for (const GridRow& r : rows) {
    out << format_double(r.w_vf) << ',' << format_double(r.w_dt) << ',' << r.seed;
    if (r.ok) {
      out << ',' << format_double(r.l_od_eval) << ',' << format_double(r.sqrt_l_od_eval)
          << ',' << format_double(r.l_vf) << ',' << format_double(r.l_dt) << '\n';
    } else {
      out << ",nan,nan,nan,nan\n";
    }
  }
}

void write_grid_means(std::ostream& out, std::span<const GridMean> means) {
  out << "w_vf,w_dt,runs,l_od_eval,sqrt_l_od_eval,l_vf,l_dt\n";
  for (const GridMean& m : means) {
    out << format_double(m.w_vf) << ',' << format_double(m.w_dt) << ',' << m.runs
        << ',' << format_double(m.l_od_eval) << ',' << format_double(m.sqrt_l_od_eval)
        << ',' << format_double(m.l_vf) << ',' << format_double(m.l_dt) << '\n';
  }
}

void write_grid_failures(std::ostream& out, std::span<const GridRow> rows) {
  out << "w_vf,w_dt,seed,error\n";
  for (const GridRow& r : rows) {
    if (r.ok) continue;
    std::string msg = r.error;
    for (char& c : msg) {
      if (c == ',' || c == '\n') c = ';';
    }
    out << format_double(r.w_vf) << ',' << format_double(r.w_dt) << ',' << r.seed
        << ',' << msg << '\n';
  }
}

void save_grid(const std::filesystem::path& dir, std::span<const GridRow> rows) {
  std::ostringstream grid, means, failures;
  write_grid(grid, rows);
  write_grid_means(means, grid_means(rows));
  write_grid_failures(failures, rows);
  save_text(dir / "grid.csv", grid.str());
  save_text(dir / "grid_means.csv", means.str());
  save_text(dir / "grid_failures.csv", failures.str());
}

}  // namespace mobsynth
