#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "curemst/cure_em.hpp"
#include "curemst/settings.hpp"

namespace curemst {

struct MonteCarloConfig {
  std::size_t n1 = 200;
  std::size_t n2 = 200;
  std::size_t reps = 1000;
  double alpha = 0.05;
  std::size_t B_perm = 500;  // 0 skips the permutation method
  std::size_t B_boot = 100;  // Part II only
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  bool asymptotic = true;
  bool permutation = true;
  /// Part II evaluation points; empty means the setting's grid.
  std::vector<std::vector<double>> z;
  EmConfig em;
  double max_failure_rate = 0.01;
};

struct CellSummary {
  std::string method;  // "M1" asymptotic, "M2" permutation
  std::string cell;    // "m" or "z=(..)"
  std::vector<double> z;
  double true_value = 0.0;
  std::size_t tallied = 0;
  std::size_t failed = 0;
  double coverage_pct = 0.0;
  double mean_length = 0.0;
  double reject_greater_pct = 0.0;    // H0: m <= 0
  double reject_two_sided_pct = 0.0;  // H0: m = 0
};

struct SimulationReport {
  std::string setting;
  MonteCarloConfig config;
  std::vector<CellSummary> cells;
  std::size_t failed_replicates = 0;
  std::vector<std::string> failure_reasons;  // first few distinct reasons
};

/// Replication r draws its data from substream (seed, r) and its
/// resampling streams from seeds derived from (seed, r); results are
/// identical for any worker count. Throws InferenceError when more than
/// max_failure_rate of the replications fail.
SimulationReport monte_carlo_table(const SettingSpec& spec, const MonteCarloConfig& cfg);

}  // namespace curemst
