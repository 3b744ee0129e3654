#include "curemst/km.hpp"

#include <algorithm>

#include "curemst/errors.hpp"

namespace curemst {

KmFit fit_km_sorted(std::span<const TimeStatus> obs) {
  const std::size_t n = obs.size();
  KmFit fit;
  fit.n = n;
  double s = 1.0;
  double v = 0.0;
  std::size_t i = 0;
  while (i < n) {
    const double t = obs[i].time;
    const std::size_t at_risk = n - i;
    std::size_t d = 0;
    std::size_t j = i;
    while (j < n && obs[j].time == t) {
      d += static_cast<std::size_t>(obs[j].status == 1);
      ++j;
    }
    if (d > 0) {
      const double r = static_cast<double>(at_risk);
      const double dd = static_cast<double>(d);
      s *= 1.0 - dd / r;
      if (d < at_risk) v += static_cast<double>(n) * dd / (r * (r - dd));
      fit.event_times.push_back(t);
      fit.survival.push_back(s);
      fit.at_risk.push_back(at_risk);
      fit.events.push_back(d);
      fit.v_hat.push_back(v);
    }
    i = j;
  }
  if (fit.event_times.empty()) {
    throw EstimationError("no events: Kaplan-Meier plateau and MST undefined");
  }
  fit.cure_fraction = fit.survival.back();
  fit.last_event_time = fit.event_times.back();
  return fit;
}

KmFit fit_km(std::span<const SurvivalRecord> records) {
  std::vector<TimeStatus> obs;
  obs.reserve(records.size());
  for (const auto& r : records) obs.push_back({r.time, r.status});
  std::sort(obs.begin(), obs.end(), [](const TimeStatus& a, const TimeStatus& b) { return a.time < b.time; });
  return fit_km_sorted(obs);
}

KmFit fit_km(const SurvivalSample& sample) { return fit_km(sample.records()); }

KmFit fit_pooled(const TwoSampleDataset& ds) {
  const auto pooled = ds.pooled();
  return fit_km(std::span<const SurvivalRecord>(pooled));
}

namespace {

// Number of event times <= t.
std::size_t steps_at(const KmFit& fit, double t) {
  return static_cast<std::size_t>(
      std::upper_bound(fit.event_times.begin(), fit.event_times.end(), t) - fit.event_times.begin());
}

}  // namespace

double eval_survival(const KmFit& fit, double t) {
  const std::size_t k = steps_at(fit, t);
  return k == 0 ? 1.0 : fit.survival[k - 1];
}

double eval_v_hat(const KmFit& fit, double t) {
  const std::size_t k = steps_at(fit, t);
  return k == 0 ? 0.0 : fit.v_hat[k - 1];
}

}  // namespace curemst
