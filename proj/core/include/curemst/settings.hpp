#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "curemst/data.hpp"
#include "curemst/distributions.hpp"
#include "curemst/resampling.hpp"

namespace curemst {

struct CovariateLaw {
  enum class Kind { normal, bernoulli, uniform };
  Kind kind = Kind::normal;
  double a = 0.0;  // normal: mean; bernoulli: p; uniform: lower
  double b = 1.0;  // normal: sd; uniform: upper

  static CovariateLaw normal(double mean, double sd) { return {Kind::normal, mean, sd}; }
  static CovariateLaw bernoulli(double p) { return {Kind::bernoulli, p, 0.0}; }
  static CovariateLaw uniform(double lo, double hi) { return {Kind::uniform, lo, hi}; }

  double draw(Rng& rng) const;
};

/// Generator of one group. Without `gamma` the cure rate is constant;
/// with it P(uncured | x) = logistic(gamma' (1, x)). Covariates are drawn
/// once per subject and used as both x and z.
struct GroupSpec {
  LatencyLaw baseline;
  double cure_rate = 0.0;
  std::vector<double> gamma;
  std::vector<double> beta;
  std::vector<CovariateLaw> covariates;
  double censoring_rate = 0.1;
  double quantile = kTruncationQuantile;
  Truncation truncation = Truncation::cap;
  double followup_gap = 2.0;  // censoring capped at tau0 + gap

  double tau0() const { return truncation_point(baseline, quantile); }
  double true_mst(const std::vector<double>& z = {}) const;
};

struct ZPoint {
  std::vector<double> z;
  double stated_m = 0.0;  // value printed in the source tables
};

struct SettingSpec {
  std::string id;
  std::string description;
  GroupSpec group1;
  GroupSpec group2;
  std::optional<double> stated_m;  // Part I value printed in the source text
  std::vector<ZPoint> z_grid;      // Part II evaluation points

  bool semiparametric() const { return !group1.gamma.empty(); }
  /// Difference of true MST_u, by quadrature.
  double true_m() const;
  double true_m_z(const std::vector<double>& z) const;
};

const std::vector<std::string>& setting_ids();
/// Throws ValidationError for an unknown id.
SettingSpec setting_by_id(const std::string& id);

SurvivalSample sample_group(const GroupSpec& g, std::size_t n, Rng& rng, int label);
/// Group 1 uses substream (seed, 1), group 2 substream (seed, 2).
TwoSampleDataset sample_setting(const SettingSpec& spec, std::size_t n1, std::size_t n2,
                                std::uint64_t seed);

/// Realized cure and censoring fractions of one generated group.
struct GroupCalibration {
  double cured_fraction = 0.0;
  double censoring_rate = 0.0;
};
GroupCalibration calibrate_group(const GroupSpec& g, std::size_t n, std::uint64_t seed);

}  // namespace curemst
