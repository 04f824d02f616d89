#pragma once

#include <string>
#include <vector>

#include "mobsynth/model.hpp"

namespace mobsynth::test {

inline const Demographic kMale20s{Sex::male, AgeGroup::age20s};
inline const Demographic kFemale40s{Sex::female, AgeGroup::age40s};

inline CellCode cell(const char* digits) { return CellCode(digits); }

// Trajectory from (cell, arrival) pairs; the first cell is home.
inline Trajectory traj(std::int64_t id, Demographic group,
                       std::vector<std::pair<const char*, int>> stays) {
  Trajectory t{id, group, CellCode(stays.front().first), {}};
  for (const auto& [c, arrival] : stays) t.stays.push_back(Stay{CellCode(c), arrival});
  return t;
}

}  // namespace mobsynth::test

#include <memory>
#include <set>

#include "mobsynth/loss_state.hpp"
#include "mobsynth/pipeline.hpp"
#include "mobsynth/worldgen.hpp"

namespace mobsynth::test {

// Small sampled world of one group, its reference and a compiled reference
// whose universe covers every world cell. The dwell table is fitted from a
// 2000-agent world of the same spec: a few dozen agents leave night hours
// without any quantile row.
struct SmallWorld {
  std::vector<Trajectory> world;
  ReferenceBundle bundle;
  DTParamTable table;
  std::shared_ptr<const CompiledReference> ref;
};

inline SmallWorld small_world(std::int64_t agents, std::uint64_t seed, int levels = 2) {
  WorldSpec spec;
  spec.levels = levels;
  spec.population = {{kMale20s, agents}};
  spec.seed = seed;
  SmallWorld w;
  w.world = generate_world(spec);
  w.bundle = reference_inputs(w.world, 1);
  std::set<CellCode> cells;
  for (const Trajectory& t : w.world) {
    for (const Stay& s : t.stays) cells.insert(s.cell);
  }
  WorldSpec big = spec;
  big.population = {{kMale20s, 2000}};
  ReferenceBundle dense = w.bundle;
  dense.quantiles = reference_inputs(big).quantiles;
  w.table = engine_table(dense, cells);
  w.ref = std::make_shared<const CompiledReference>(w.bundle.od.at(kMale20s), w.table, cells);
  return w;
}

}  // namespace mobsynth::test
