#pragma once

namespace curemst {

enum class LatencyFamily { weibull, gompertz };

/// Latency law through its cumulative hazard:
///   Weibull   L(t) = rate * t^shape
///   Gompertz  L(t) = (rate / shape) * (exp(shape * t) - 1)   (hazard rate * e^{shape t})
struct LatencyLaw {
  LatencyFamily family = LatencyFamily::weibull;
  double shape = 1.0;
  double rate = 1.0;

  static LatencyLaw weibull(double shape, double rate) { return {LatencyFamily::weibull, shape, rate}; }
  /// Hazard a e^{b t}.
  static LatencyLaw gompertz(double a, double b) { return {LatencyFamily::gompertz, b, a}; }

  double cumhaz(double t) const;
  double inverse_cumhaz(double h) const;
  double survival(double t) const;
  double cdf(double t) const { return 1.0 - survival(t); }
  double quantile(double q) const;
};

/// How draws are confined to [0, tau0], tau0 the truncation quantile.
enum class Truncation {
  cap,          // T = min(F^-1(u), tau0); the tail mass sits at tau0
  conditional,  // T ~ F given T <= tau0, i.e. F^-1(u F(tau0))
};

inline constexpr double kTruncationQuantile = 0.99;

double truncation_point(const LatencyLaw& law, double quantile = kTruncationQuantile);

/// Inversion draw from the truncated law; u in (0,1). `risk_multiplier`
/// scales the cumulative hazard (proportional hazards, e^{beta'z}); tau0
/// always comes from the baseline law.
double sample_truncated_latency(const LatencyLaw& law, double u,
                                double quantile = kTruncationQuantile,
                                Truncation mode = Truncation::cap, double risk_multiplier = 1.0);

/// CDF of the truncated law (for goodness-of-fit checks).
double truncated_cdf(const LatencyLaw& law, double t, double quantile = kTruncationQuantile,
                     Truncation mode = Truncation::cap, double risk_multiplier = 1.0);

/// Mean of the truncated law by adaptive Gauss-Kronrod quadrature of its
/// survival function over [0, tau0].
double true_mst_oracle(const LatencyLaw& law, double quantile = kTruncationQuantile,
                       Truncation mode = Truncation::cap, double risk_multiplier = 1.0);

/// Support end of a Gompertz law with hazard a e^{b t} at the given quantile,
/// solving (a/b)(e^{b tau} - 1) = -log(1 - quantile) in closed form.
double gompertz_support(double a, double b, double quantile = kTruncationQuantile);

}  // namespace curemst
