#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "curemst/data.hpp"
#include "curemst/km.hpp"
#include "curemst/mst.hpp"

namespace curemst {

enum class InferenceMethod { asymptotic, permutation, cure_fraction_wald };
const char* to_string(InferenceMethod m);

struct InferenceResult {
  InferenceMethod method = InferenceMethod::asymptotic;
  double estimate = 0.0;
  double statistic = 0.0;  // studentized statistic for the null value
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double p_two_sided = 1.0;
  double p_greater = 1.0;  // alternative: m > m0
  double p_less = 1.0;     // alternative: m < m0
  double alpha = 0.05;
  double null_value = 0.0;
  // Permutation only.
  std::size_t replicates_requested = 0;
  std::size_t n_replicates_used = 0;
  std::size_t n_replicates_discarded = 0;
  std::uint64_t seed = 0;
  bool exhaustive = false;
  // Conditional (covariate) comparisons only.
  std::vector<double> z;
  std::size_t bootstrap_B = 0;
  std::size_t fit_failures = 0;
  std::string note;
};

/// Normal-theory interval est -/+ q sigma / a_n and p-values for est = m0.
InferenceResult normal_inference(double estimate, double sigma, double a_n, double alpha,
                                 double m0 = 0.0);
/// Throws InferenceError when sigma_hat == 0.
InferenceResult asymptotic_inference(const TwoSampleMstResult& res, double alpha,
                                     double m0 = 0.0);

enum class PermutationMode {
  random,      // B uniform random splits
  exhaustive,  // every distinct split once (identity included), no smoothing
  identity,    // every replicate is the observed split; test hook
};

struct PermutationOptions {
  double alpha = 0.05;
  std::size_t B = 500;
  std::uint64_t seed = 0;
  double m0 = 0.0;
  std::size_t workers = 0;  // 0: default_workers()
  PermutationMode mode = PermutationMode::random;
  std::size_t exhaustive_cap = 200000;
  double max_discard_rate = 0.2;
};

/// CI [m - q(1-a/2) sigma, m - q(a/2) sigma] from the empirical quantiles of
/// the permuted statistics T = m_perm / sigma_perm, and p-values counting
/// permuted |T| at least |(m - m0) / sigma|. With `smoothing` the counts are
/// (1 + c) / (B + 1), otherwise c / B.
InferenceResult permutation_from_statistics(double m_hat, double sigma_hat, double a_n,
                                            std::vector<double> t_perm, double alpha, double m0,
                                            bool smoothing);

/// Studentized permutation inference for the difference of MST_u.
/// Throws InferenceError("permutation distribution unreliable") when more
/// than max_discard_rate of the draws had to be discarded.
InferenceResult permutation_inference(const TwoSampleDataset& ds, const PermutationOptions& opt);

/// Permuted statistics only (index order); exposed for tests.
struct PermutationDistribution {
  std::vector<double> t_perm;
  std::size_t discarded = 0;
};
PermutationDistribution permutation_distribution(const TwoSampleDataset& ds,
                                                 const PermutationOptions& opt);

/// Wald test for equal cure fractions based on Var(S(t)) ~ S(t)^2 v(t) / n,
/// an approximation to Klein's test.
InferenceResult cure_fraction_test(const KmFit& f1, const KmFit& f2, double alpha = 0.05);

}  // namespace curemst
