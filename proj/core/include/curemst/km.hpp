#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "curemst/data.hpp"

namespace curemst {

/// Kaplan-Meier fit of an improper survival function.
///
/// All vectors are indexed by distinct event time. `survival[k]` is the value
/// on [event_times[k], event_times[k+1]); the estimate is 1 before the first
/// event and stays at `cure_fraction` after the last one. `v_hat[k]` is the
/// Greenwood-type variance process n * sum dN / (R (R - dN)) up to and
/// including event_times[k]; the increment at a final event that empties the
/// risk set is skipped, so v_hat stays finite.
struct KmFit {
  std::vector<double> event_times;
  std::vector<double> survival;
  std::vector<std::size_t> at_risk;
  std::vector<std::size_t> events;
  std::vector<double> v_hat;
  double cure_fraction = 1.0;
  double last_event_time = 0.0;
  std::size_t n = 0;

  std::size_t steps() const noexcept { return event_times.size(); }
};

/// Minimal observation view used by the fast paths.
struct TimeStatus {
  double time;
  int status;
};

KmFit fit_km(const SurvivalSample& sample);
KmFit fit_km(std::span<const SurvivalRecord> records);
/// `obs` must be sorted by time (ties in any order).
KmFit fit_km_sorted(std::span<const TimeStatus> obs);
/// Kaplan-Meier of the concatenation of both samples.
KmFit fit_pooled(const TwoSampleDataset& ds);

/// Right-continuous step evaluation of the survival estimate.
double eval_survival(const KmFit& fit, double t);
/// Right-continuous step evaluation of v_hat (0 before the first event).
double eval_v_hat(const KmFit& fit, double t);

}  // namespace curemst
