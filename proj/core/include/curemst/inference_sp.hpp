#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "curemst/cure_em.hpp"
#include "curemst/data.hpp"
#include "curemst/inference.hpp"

namespace curemst {

struct ConditionalMstResult {
  std::vector<double> z;
  double mst1 = 0.0;
  double mst2 = 0.0;
  double m_z_hat = 0.0;
  double sigma_z_hat = 0.0;  // bootstrap sd of a_n * m_z_hat
  double a_n = 0.0;
  double t_stat = 0.0;
  std::size_t bootstrap_B = 0;
  std::size_t fit_failures = 0;
};

struct TwoSampleCureFit {
  LogisticCoxFit fit1;
  LogisticCoxFit fit2;
};

/// Fits both groups; throws EmError if either fit fails or does not converge.
TwoSampleCureFit fit_two_sample_cure(const TwoSampleDataset& ds, const EmConfig& cfg = {});

double conditional_mst_difference(const TwoSampleCureFit& fits, const std::vector<double>& z);

struct BootstrapSigma {
  std::vector<double> sigma;  // one per z
  // Bootstrap standard errors of (gamma, beta) per group.
  Eigen::VectorXd coef_se1;
  Eigen::VectorXd coef_se2;
  std::size_t used = 0;
  std::size_t failures = 0;
};

/// Stratified bootstrap of the sd of a_n m_z for every z at once (each
/// replicate refits both groups once). Replicate i uses substream
/// (seed, i) under the bootstrap tag. Failed or non-converged replicate
/// fits are discarded and counted; more than `max_failure_rate` of them
/// throws EmError.
BootstrapSigma bootstrap_sigma_z(const TwoSampleDataset& ds, const std::vector<std::vector<double>>& zs,
                                 std::size_t B, std::uint64_t seed, const EmConfig& cfg = {},
                                 std::size_t workers = 0, double max_failure_rate = 0.2);

struct SpOptions {
  double alpha = 0.05;
  std::size_t B_boot = 100;
  std::size_t B_perm = 500;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  double m0 = 0.0;
  PermutationMode mode = PermutationMode::random;
  EmConfig em;
  double max_failure_rate = 0.2;
};

struct SpComparison {
  ConditionalMstResult estimate;
  InferenceResult asymptotic;
};

struct SpAnalysis {
  TwoSampleCureFit fits;
  BootstrapSigma boot;
  std::vector<SpComparison> per_z;
};

/// Fits, one bootstrap run and normal-theory inference for every z.
SpAnalysis analyze_conditional_mst(const TwoSampleDataset& ds,
                                   const std::vector<std::vector<double>>& zs, const SpOptions& opt);

/// Point estimates, bootstrap sigma and normal-theory inference per z.
std::vector<SpComparison> compare_conditional_mst(const TwoSampleDataset& ds,
                                                  const std::vector<std::vector<double>>& zs,
                                                  const SpOptions& opt);

/// Studentized permutation inference per z: each permuted split is refitted
/// and studentized by a nested bootstrap. Identity mode replays the observed
/// split with the observed bootstrap seed, so T_perm equals T exactly.
std::vector<InferenceResult> permutation_inference_sp(const TwoSampleDataset& ds,
                                                      const std::vector<std::vector<double>>& zs,
                                                      const SpOptions& opt);

}  // namespace curemst
