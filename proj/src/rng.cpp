#include "mobsynth/rng.hpp"

#include "mobsynth/error.hpp"
#include "mobsynth/lognormal.hpp"

namespace mobsynth {

std::int64_t Rng::between(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw InvariantError("Rng::between: empty range");
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(engine_());
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t draw;
  do {
    draw = engine_();
  } while (draw >= limit);
  return lo + static_cast<std::int64_t>(draw % span);
}

std::size_t Rng::weighted(std::span<const double> weights) {
  double total = 0;
  for (double w : weights) total += w;
  if (!(total > 0)) throw InvariantError("Rng::weighted: all weights zero");
  const double target = uniform() * total;
  double acc = 0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0) continue;
    acc += weights[i];
    last_positive = i;
    if (target < acc) return i;
  }
  return last_positive;
}

double Rng::normal() { return probit(open_uniform()); }

}  // namespace mobsynth
