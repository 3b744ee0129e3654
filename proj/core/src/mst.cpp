#include "curemst/mst.hpp"

#include <cmath>

#include "curemst/errors.hpp"

namespace curemst {

namespace {

void require_uncured_mass(const KmFit& fit, double eps) {
  if (fit.steps() == 0) throw EstimationError("no events: MST undefined");
  if (fit.cure_fraction >= 1.0 - eps) {
    throw EstimationError("degenerate: no estimated uncured mass");
  }
}

}  // namespace

double mst_uncured(const KmFit& fit, double eps) {
  require_uncured_mass(fit, eps);
  const double p = fit.cure_fraction;
  double area = 0.0;
  double prev_t = 0.0;
  double s = 1.0;
  for (std::size_t k = 0; k < fit.steps(); ++k) {
    area += (s - p) * (fit.event_times[k] - prev_t);
    prev_t = fit.event_times[k];
    s = fit.survival[k];
  }
  return area / (1.0 - p);
}

SigmaTerms sigma_sq_terms(const KmFit& fit, double eps) {
  require_uncured_mass(fit, eps);
  const double p = fit.cure_fraction;
  const double q2 = (1.0 - p) * (1.0 - p);
  const double tau0 = fit.last_event_time;
  const double mst = mst_uncured(fit, eps);
  const std::size_t K = fit.steps();

  // Interval j = [t_{j}, t_{j+1}) with t_0 = 0; S and v are constant there.
  // a_j = S_j * len_j. The double integral is sum_{j,l} a_j a_l v_{min(j,l)},
  // folded with a suffix sum: sum_j a_j v_j (a_j + 2 * sum_{l>j} a_l).
  std::vector<double> a(K), v(K);
  double prev_t = 0.0;
  for (std::size_t j = 0; j < K; ++j) {
    const double s = j == 0 ? 1.0 : fit.survival[j - 1];
    v[j] = j == 0 ? 0.0 : fit.v_hat[j - 1];
    a[j] = s * (fit.event_times[j] - prev_t);
    prev_t = fit.event_times[j];
  }
  double suffix = 0.0;
  double dbl = 0.0;
  double sv = 0.0;
  for (std::size_t j = K; j-- > 0;) {
    dbl += a[j] * v[j] * (a[j] + 2.0 * suffix);
    suffix += a[j];
    sv += a[j] * v[j];
  }
  SigmaTerms terms;
  terms.double_integral = dbl / q2;
  if (p > 0.0) {
    const double gap = mst - tau0;
    terms.endpoint = p * p / q2 * gap * gap * fit.v_hat.back();
    terms.cross = 2.0 * p / q2 * gap * sv;
  }
  return terms;
}

double sigma_sq_plugin(const KmFit& fit, double eps) {
  const double s = sigma_sq_terms(fit, eps).total();
  return s > 0.0 ? s : 0.0;
}

MstEstimate estimate_mst(const KmFit& fit, double eps) {
  return {mst_uncured(fit, eps), sigma_sq_plugin(fit, eps), fit.n};
}

double pooled_sigma(double var1, double var2, std::size_t n1, std::size_t n2) {
  const double N = static_cast<double>(n1 + n2);
  const double s2 = static_cast<double>(n2) / N * var1 + static_cast<double>(n1) / N * var2;
  return std::sqrt(s2 > 0.0 ? s2 : 0.0);
}

double rate_factor(std::size_t n1, std::size_t n2) {
  const double a = static_cast<double>(n1);
  const double b = static_cast<double>(n2);
  return std::sqrt(a * b / (a + b));
}

TwoSampleMstResult two_sample_estimate(const KmFit& f1, const KmFit& f2, double eps) {
  TwoSampleMstResult r;
  r.group1 = estimate_mst(f1, eps);
  r.group2 = estimate_mst(f2, eps);
  r.m_hat = r.group1.value - r.group2.value;
  r.sigma_hat = pooled_sigma(r.group1.variance, r.group2.variance, f1.n, f2.n);
  r.a_n = rate_factor(f1.n, f2.n);
  if (!(r.sigma_hat > 0.0)) throw EstimationError("degenerate studentization: sigma_hat = 0");
  r.t_stat = r.a_n * r.m_hat / r.sigma_hat;
  return r;
}

}  // namespace curemst
