#include "mobsynth/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mobsynth/error.hpp"

namespace mobsynth {

namespace {

double od_loss(const OdMatrix& synthetic, const OdMatrix& reference,
               double unobserved_weight) {
  if (reference.empty()) {
    throw InfeasibleError("OD loss: undefined normalization (reference for " +
                          label(reference.group()) + " is all zero)");
  }
  double numerator = 0;
  double denominator = 0;
  for (const auto& [key, fr] : reference.entries()) {
    const double diff = static_cast<double>(synthetic.count(key) - fr);
    numerator += diff * diff;
    denominator += static_cast<double>(fr) * static_cast<double>(fr);
  }
  for (const auto& [key, fs] : synthetic.entries()) {
    if (reference.count(key) != 0) continue;
    numerator += unobserved_weight * static_cast<double>(fs) *
                 static_cast<double>(fs);
  }
  return numerator / denominator;
}

}  // namespace

double loss_od(const OdMatrix& synthetic, const OdMatrix& reference) {
  return od_loss(synthetic, reference, kUnobservedFlowPenalty);
}

double loss_od_eval(const OdMatrix& synthetic, const OdMatrix& reference) {
  return od_loss(synthetic, reference, 1.0);
}

VisitPmf reference_visit_pmf(int n_max, double mu, double sigma) {
  if (n_max < 2) throw InputError("reference_visit_pmf: n_max must be >= 2");
  if (!(sigma > 0)) throw InputError("reference_visit_pmf: sigma must be > 0");
  VisitPmf pmf;
  pmf.p.resize(static_cast<std::size_t>(n_max));
  double total = 0;
  for (int n = 1; n <= n_max; ++n) {
    const double z = (std::log(static_cast<double>(n)) - mu) / sigma;
    const double mass = std::exp(-0.5 * z * z) / n;
    pmf.p[static_cast<std::size_t>(n - 1)] = mass;
    total += mass;
  }
  for (double& v : pmf.p) v /= total;
  return pmf;
}

VisitPmf visit_pmf_from_counts(std::span<const std::int64_t> counts) {
  std::int64_t total = 0;
  for (std::int64_t c : counts) total += c;
  if (total <= 0) throw InputError("visit histogram is empty");
  VisitPmf pmf;
  pmf.p.reserve(counts.size());
  for (std::int64_t c : counts) {
    pmf.p.push_back(static_cast<double>(c) / static_cast<double>(total));
  }
  return pmf;
}

VisitPmf visit_pmf_of(std::span<const Trajectory> trajs, int n_max) {
  if (trajs.empty()) throw InputError("visit pmf of an empty population");
  if (n_max < 2) throw InputError("n_max must be >= 2");
  std::vector<std::int64_t> counts(static_cast<std::size_t>(n_max), 0);
  for (const Trajectory& t : trajs) {
    const auto n = std::min<std::size_t>(t.visit_count(),
                                         static_cast<std::size_t>(n_max));
    ++counts[n - 1];
  }
  return visit_pmf_from_counts(counts);
}

double wasserstein_discrete(const VisitPmf& p, const VisitPmf& q) {
  if (p.p.size() != q.p.size()) {
    throw InputError("wasserstein_discrete: supports differ (" +
                     std::to_string(p.n_max()) + " vs " +
                     std::to_string(q.n_max()) + ")");
  }
  double cdf_p = 0;
  double cdf_q = 0;
  double distance = 0;
  for (std::size_t k = 0; k + 1 < p.p.size(); ++k) {
    cdf_p += p.p[k];
    cdf_q += q.p[k];
    distance += std::abs(cdf_p - cdf_q);
  }
  return distance;
}

double loss_vf(std::span<const Trajectory> trajs, int n_max) {
  return wasserstein_discrete(visit_pmf_of(trajs, n_max),
                              reference_visit_pmf(n_max));
}

double wasserstein_dt(std::vector<double> samples, const DTParams& p,
                      double t_min) {
  if (samples.empty()) throw InputError("wasserstein_dt: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double sum = 0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double u = (static_cast<double>(k) + 0.5) / n;
    sum += std::abs(samples[k] - truncated_quantile(p, t_min, u));
  }
  return sum / n;
}

double loss_dt(std::span<const Trajectory> trajs, const DTParamTable& table,
               double t_min) {
  std::map<CellHour, std::vector<double>> groups;
  for (const Trajectory& t : trajs) {
    for (const Observation& o : dwell_travel_observations(t)) {
      groups[CellHour{o.cell, o.hour}].push_back(o.minutes);
    }
  }
  if (groups.empty()) throw InputError("loss_dt: no observations");
  double weighted = 0;
  double total = 0;
  for (auto& [key, samples] : groups) {
    auto it = table.find(key);
    if (it == table.end()) {
      throw InputError("loss_dt: no dwell-travel parameters for (" +
                       key.cell.str() + ", " + std::to_string(key.hour) +
                       "); run fill_missing first");
    }
    const double n = static_cast<double>(samples.size());
    weighted += n * wasserstein_dt(std::move(samples), it->second, t_min);
    total += n;
  }
  return weighted / total;
}

void Normalizers::validate() const {
  if (!(od > 0) || !(vf > 0) || !(dt > 0) || !std::isfinite(od) ||
      !std::isfinite(vf) || !std::isfinite(dt)) {
    throw InfeasibleError("zero or non-finite loss normalizer (od=" +
                          std::to_string(od) + ", vf=" + std::to_string(vf) +
                          ", dt=" + std::to_string(dt) + ")");
  }
}

NormalizedLosses normalize(const RawLosses& raw, const Normalizers& norms) {
  return NormalizedLosses{raw.od / norms.od, raw.vf / norms.vf,
                          raw.dt / norms.dt};
}

double loss_total(const RawLosses& raw, const Normalizers& norms,
                  const Weights& w) {
  return w.od * (raw.od / norms.od) + w.vf * (raw.vf / norms.vf) +
         w.dt * (raw.dt / norms.dt);
}

double fluctuation_bound(double days) {
  if (!(days > 0)) throw InputError("fluctuation_bound: days must be > 0");
  return 1.0 / std::sqrt(days);
}

}  // namespace mobsynth
