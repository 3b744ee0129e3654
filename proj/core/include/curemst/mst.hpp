#pragma once

#include <cstddef>

#include "curemst/km.hpp"

namespace curemst {

inline constexpr double kDefaultCureEpsilon = 1e-10;

/// Mean survival time of the uncured for one sample, with its plug-in
/// asymptotic variance (variance of sqrt(n) * (estimate - truth)).
struct MstEstimate {
  double value = 0.0;
  double variance = 0.0;
  std::size_t n = 0;
};

/// Integral over [0, last event] of (S(u) - p) / (1 - p), computed exactly
/// over the constancy intervals of the Kaplan-Meier step function.
/// Throws EstimationError when p >= 1 - eps.
double mst_uncured(const KmFit& fit, double eps = kDefaultCureEpsilon);

/// The three components of the plug-in variance, kept apart for testing.
struct SigmaTerms {
  double double_integral = 0.0;  // (1-p)^-2 * iint S(u) S(t) v(u ^ t)
  double endpoint = 0.0;         // p^2 (1-p)^-2 (MST - tau0)^2 v(tau0)
  double cross = 0.0;            // 2 p (1-p)^-2 (MST - tau0) int S(u) v(u)
  double total() const noexcept { return double_integral + endpoint + cross; }
};

SigmaTerms sigma_sq_terms(const KmFit& fit, double eps = kDefaultCureEpsilon);
/// Plug-in asymptotic variance of the MST estimator (clamped at 0 against
/// rounding; the exact value is a Gaussian variance and never negative).
double sigma_sq_plugin(const KmFit& fit, double eps = kDefaultCureEpsilon);

MstEstimate estimate_mst(const KmFit& fit, double eps = kDefaultCureEpsilon);

struct TwoSampleMstResult {
  MstEstimate group1;
  MstEstimate group2;
  double m_hat = 0.0;
  double sigma_hat = 0.0;  // sqrt of n2/N * var1 + n1/N * var2
  double a_n = 0.0;        // sqrt(n1 n2 / N)
  double t_stat = 0.0;     // a_n * m_hat / sigma_hat
};

/// Throws EstimationError("degenerate studentization") when sigma_hat == 0.
TwoSampleMstResult two_sample_estimate(const KmFit& f1, const KmFit& f2,
                                       double eps = kDefaultCureEpsilon);

/// Variance pooling used for both the observed and the permuted samples.
double pooled_sigma(double var1, double var2, std::size_t n1, std::size_t n2);
double rate_factor(std::size_t n1, std::size_t n2);

}  // namespace curemst
