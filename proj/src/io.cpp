#include "mobsynth/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <ostream>
#include <sstream>
#include <system_error>

#include "mobsynth/error.hpp"

namespace mobsynth {

namespace {

class CsvReader {
 public:
  CsvReader(std::istream& in, std::string_view source,
            std::vector<std::string_view> header)
      : in_(in), source_(source), width_(header.size()) {
    std::string line;
    ++line_;
    if (!std::getline(in_, line)) fail("missing header");
    strip_cr(line);
    std::string expected;
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) expected += ',';
      expected += header[i];
    }
    if (line != expected) fail("header must be '" + expected + "'");
  }

  // Reads the next non-empty row into fields(); false at end of input.
  bool next() {
    while (std::getline(in_, current_)) {
      ++line_;
      strip_cr(current_);
      if (current_.empty()) continue;
      fields_.clear();
      std::size_t start = 0;
      while (true) {
        const std::size_t comma = current_.find(',', start);
        fields_.emplace_back(std::string_view(current_).substr(
            start, comma == std::string::npos ? std::string::npos : comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      if (fields_.size() != width_) {
        fail("expected " + std::to_string(width_) + " fields, got " +
             std::to_string(fields_.size()));
      }
      return true;
    }
    if (in_.bad()) fail("read error");
    return false;
  }

  std::string_view field(std::size_t i) const { return fields_[i]; }

  std::int64_t integer(std::size_t i) const {
    std::int64_t v = 0;
    const auto f = fields_[i];
    auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc{} || ptr != f.data() + f.size()) {
      fail("field " + std::to_string(i + 1) + " is not an integer: '" +
           std::string(f) + "'");
    }
    return v;
  }

  double real(std::size_t i) const {
    double v = 0;
    const auto f = fields_[i];
    auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc{} || ptr != f.data() + f.size() || !std::isfinite(v)) {
      fail("field " + std::to_string(i + 1) + " is not a finite number: '" +
           std::string(f) + "'");
    }
    return v;
  }

  CellCode cell(std::size_t i) const {
    return guarded([&] { return CellCode(std::string(fields_[i])); });
  }

  Demographic demographic(std::size_t sex, std::size_t age) const {
    return guarded([&] {
      return Demographic{parse_sex(fields_[sex]), parse_age_group(fields_[age])};
    });
  }

  int hour(std::size_t i) const {
    const auto h = integer(i);
    if (h < 0 || h >= kHoursPerDay) fail("hour must be in 0..23");
    return static_cast<int>(h);
  }

  // Runs `fn`, re-raising InputError with the current location.
  template <typename Fn>
  auto guarded(Fn&& fn) const -> decltype(fn()) {
    try {
      return fn();
    } catch (const InputError& e) {
      fail(e.what());
    }
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw InputError(source_ + ":" + std::to_string(line_) + ": " + what);
  }

 private:
  static void strip_cr(std::string& s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
  }

  std::istream& in_;
  std::string source_;
  std::size_t width_;
  std::size_t line_ = 0;
  std::string current_;
  std::vector<std::string_view> fields_;
};

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

template <typename Fn>
void write_file(const std::filesystem::path& path, Fn&& fn) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw InputError("cannot create " + path.parent_path().string());
  }
  std::ostringstream buf;
  fn(buf);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  const std::string text = buf.str();
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw InputError("write failed: " + path.string());
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw InvariantError("format_double failed");
  return std::string(buf, ptr);
}

void write_trajectories(std::ostream& out, std::span<const Trajectory> trajs) {
  out << "agent_id,sex,age_group,stay_index,cell,arrival_minute\n";
  for (const Trajectory& t : trajs) {
    for (std::size_t k = 0; k < t.stays.size(); ++k) {
      out << t.agent_id << ',' << to_string(t.demographic.sex) << ','
          << to_string(t.demographic.age_group) << ',' << k << ','
          << t.stays[k].cell.str() << ',' << t.stays[k].arrival << '\n';
    }
  }
}

std::vector<Trajectory> read_trajectories(std::istream& in,
                                          std::string_view source) {
  CsvReader r(in, source,
              {"agent_id", "sex", "age_group", "stay_index", "cell", "arrival_minute"});
  std::vector<Trajectory> out;
  std::set<std::int64_t> seen;
  auto finish = [&] {
    if (!out.empty()) r.guarded([&] { validate(out.back()); });
  };
  while (r.next()) {
    const std::int64_t id = r.integer(0);
    const Demographic d = r.demographic(1, 2);
    const std::int64_t index = r.integer(3);
    const CellCode cell = r.cell(4);
    const std::int64_t arrival = r.integer(5);
    if (arrival < 0 || arrival >= kMinutesPerDay) {
      r.fail("arrival_minute must be in 0..1439");
    }
    if (out.empty() || out.back().agent_id != id) {
      finish();
      if (!seen.insert(id).second) r.fail("rows of agent " + std::to_string(id) + " are not contiguous");
      if (index != 0) r.fail("agent " + std::to_string(id) + " must start at stay_index 0");
      out.push_back(Trajectory{id, d, cell, {}});
    } else {
      Trajectory& t = out.back();
      if (t.demographic != d) r.fail("agent " + std::to_string(id) + " changes demographic");
      if (index != static_cast<std::int64_t>(t.stays.size())) {
        r.fail("agent " + std::to_string(id) + " expected stay_index " +
               std::to_string(t.stays.size()));
      }
    }
    out.back().stays.push_back(Stay{cell, static_cast<int>(arrival)});
  }
  finish();
  return out;
}

void write_od(std::ostream& out, const std::map<Demographic, OdMatrix>& od) {
  out << "sex,age_group,origin,dest,hour,count\n";
  for (const auto& [group, matrix] : od) {
    for (const auto& [key, count] : matrix.entries()) {
      out << to_string(group.sex) << ',' << to_string(group.age_group) << ','
          << key.origin.str() << ',' << key.dest.str() << ',' << key.hour << ','
          << count << '\n';
    }
  }
}

std::map<Demographic, OdMatrix> read_od(std::istream& in, std::string_view source) {
  CsvReader r(in, source, {"sex", "age_group", "origin", "dest", "hour", "count"});
  std::map<Demographic, OdMatrix> out;
  while (r.next()) {
    const Demographic d = r.demographic(0, 1);
    const OdKey key{r.cell(2), r.cell(3), r.hour(4)};
    const std::int64_t count = r.integer(5);
    if (count <= 0) r.fail("count must be positive");
    OdMatrix& m = out.try_emplace(d, d).first->second;
    if (m.count(key) != 0) r.fail("duplicate OD entry");
    r.guarded([&] { m.add(key, count); });
  }
  return out;
}

void write_quantiles(std::ostream& out, const QuantileTable& table) {
  out << "cell,hour,q10,q30,q50,q70,q90,n\n";
  for (const auto& [key, row] : table.rows) {
    out << key.cell.str() << ',' << key.hour << ',' << format_double(row.q10)
        << ',' << format_double(row.q30) << ',' << format_double(row.q50) << ','
        << format_double(row.q70) << ',' << format_double(row.q90) << ','
        << row.n << '\n';
  }
}

QuantileTable read_quantiles(std::istream& in, std::string_view source) {
  CsvReader r(in, source, {"cell", "hour", "q10", "q30", "q50", "q70", "q90", "n"});
  QuantileTable out;
  while (r.next()) {
    const CellHour key{r.cell(0), r.hour(1)};
    const QuantileRow row{r.real(2), r.real(3), r.real(4), r.real(5), r.real(6),
                          r.integer(7)};
    QuantileTable single;
    single.rows.emplace(key, row);
    r.guarded([&] { single.validate(0); });
    if (!out.rows.emplace(key, row).second) r.fail("duplicate (cell, hour) row");
  }
  return out;
}

void write_census(std::ostream& out, const Census& census) {
  out << "cell,sex,age_group,count\n";
  for (const auto& [key, count] : census) {
    out << key.home.str() << ',' << to_string(key.group.sex) << ','
        << to_string(key.group.age_group) << ',' << count << '\n';
  }
}

Census read_census(std::istream& in, std::string_view source) {
  CsvReader r(in, source, {"cell", "sex", "age_group", "count"});
  Census out;
  while (r.next()) {
    const CensusKey key{r.cell(0), r.demographic(1, 2)};
    const std::int64_t count = r.integer(3);
    if (count < 0) r.fail("count must be >= 0");
    if (!out.emplace(key, count).second) r.fail("duplicate census entry");
  }
  return out;
}

void write_params(std::ostream& out, const DTParamTable& table) {
  out << "cell,hour,mu,sigma\n";
  for (const auto& [key, p] : table) {
    out << key.cell.str() << ',' << key.hour << ',' << format_double(p.mu) << ','
        << format_double(p.sigma) << '\n';
  }
}

DTParamTable read_params(std::istream& in, std::string_view source) {
  CsvReader r(in, source, {"cell", "hour", "mu", "sigma"});
  DTParamTable out;
  while (r.next()) {
    const CellHour key{r.cell(0), r.hour(1)};
    const DTParams p{r.real(2), r.real(3)};
    if (!(p.sigma > 0)) r.fail("sigma must be positive");
    if (!out.emplace(key, p).second) r.fail("duplicate (cell, hour) row");
  }
  return out;
}

void write_trace(std::ostream& out, std::span<const TracePoint> trace) {
  out << "tau_frac,l_od_norm,l_vf_norm,l_dt_norm,l_tot\n";
  for (const TracePoint& p : trace) {
    out << format_double(p.tau_frac) << ',' << format_double(p.normalized.od)
        << ',' << format_double(p.normalized.vf) << ','
        << format_double(p.normalized.dt) << ',' << format_double(p.total) << '\n';
  }
}

std::vector<Trajectory> load_trajectories(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_trajectories(in, path.string());
}

void save_trajectories(const std::filesystem::path& path,
                       std::span<const Trajectory> trajs) {
  write_file(path, [&](std::ostream& out) { write_trajectories(out, trajs); });
}

ReferenceBundle load_bundle(const std::filesystem::path& dir) {
  ReferenceBundle b;
  {
    auto in = open_in(dir / "od.csv");
    b.od = read_od(in, (dir / "od.csv").string());
  }
  {
    auto in = open_in(dir / "quantiles.csv");
    b.quantiles = read_quantiles(in, (dir / "quantiles.csv").string());
  }
  {
    auto in = open_in(dir / "census.csv");
    b.census = read_census(in, (dir / "census.csv").string());
  }
  return b;
}

void save_bundle(const std::filesystem::path& dir, const ReferenceBundle& bundle) {
  write_file(dir / "od.csv", [&](std::ostream& out) { write_od(out, bundle.od); });
  write_file(dir / "quantiles.csv",
             [&](std::ostream& out) { write_quantiles(out, bundle.quantiles); });
  write_file(dir / "census.csv",
             [&](std::ostream& out) { write_census(out, bundle.census); });
}

DTParamTable load_params(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_params(in, path.string());
}

void save_params(const std::filesystem::path& path, const DTParamTable& table) {
  write_file(path, [&](std::ostream& out) { write_params(out, table); });
}

void save_trace(const std::filesystem::path& path, std::span<const TracePoint> trace) {
  write_file(path, [&](std::ostream& out) { write_trace(out, trace); });
}

void save_text(const std::filesystem::path& path, std::string_view text) {
  write_file(path, [&](std::ostream& out) { out << text; });
}

}  // namespace mobsynth
