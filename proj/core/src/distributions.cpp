#include "curemst/distributions.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace curemst {

double LatencyLaw::cumhaz(double t) const {
  if (t <= 0.0) return 0.0;
  if (family == LatencyFamily::weibull) return rate * std::pow(t, shape);
  return rate / shape * std::expm1(shape * t);
}

double LatencyLaw::inverse_cumhaz(double h) const {
  if (h <= 0.0) return 0.0;
  if (family == LatencyFamily::weibull) return std::pow(h / rate, 1.0 / shape);
  return std::log1p(h * shape / rate) / shape;
}

double LatencyLaw::survival(double t) const { return std::exp(-cumhaz(t)); }

double LatencyLaw::quantile(double q) const { return inverse_cumhaz(-std::log1p(-q)); }

double truncation_point(const LatencyLaw& law, double quantile) {
  if (!(quantile > 0.0 && quantile < 1.0)) throw std::invalid_argument("quantile outside (0,1)");
  return law.quantile(quantile);
}

double sample_truncated_latency(const LatencyLaw& law, double u, double quantile,
                                Truncation mode, double risk_multiplier) {
  const double tau0 = truncation_point(law, quantile);
  // Under proportional hazards the cumulative hazard is m * L(t).
  const double h_tau = risk_multiplier * law.cumhaz(tau0);
  double h;
  if (mode == Truncation::cap) {
    h = -std::log1p(-u);
  } else {
    // u * F(tau0) with F(tau0) = 1 - exp(-h_tau).
    h = -std::log1p(u * std::expm1(-h_tau));
  }
  if (h >= h_tau) return tau0;
  return std::min(law.inverse_cumhaz(h / risk_multiplier), tau0);
}

double truncated_cdf(const LatencyLaw& law, double t, double quantile, Truncation mode,
                     double risk_multiplier) {
  const double tau0 = truncation_point(law, quantile);
  if (t < 0.0) return 0.0;
  if (t >= tau0) return 1.0;
  const double f = -std::expm1(-risk_multiplier * law.cumhaz(t));
  if (mode == Truncation::cap) return f;
  return f / -std::expm1(-risk_multiplier * law.cumhaz(tau0));
}

double true_mst_oracle(const LatencyLaw& law, double quantile, Truncation mode,
                       double risk_multiplier) {
  const double tau0 = truncation_point(law, quantile);
  const double s_tau = std::exp(-risk_multiplier * law.cumhaz(tau0));
  auto surv = [&](double t) {
    const double s = std::exp(-risk_multiplier * law.cumhaz(t));
    return mode == Truncation::cap ? s : (s - s_tau) / (1.0 - s_tau);
  };
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(surv, 0.0, tau0, 15, 1e-12,
                                                                         &err);
}

double gompertz_support(double a, double b, double quantile) {
  return std::log1p(-std::log1p(-quantile) * b / a) / b;
}

}  // namespace curemst
