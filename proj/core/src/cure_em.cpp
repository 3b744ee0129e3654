#include "curemst/cure_em.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "curemst/errors.hpp"

namespace curemst {

namespace {

double log_logistic(double eta) {
  return eta >= 0.0 ? -std::log1p(std::exp(-eta)) : eta - std::log1p(std::exp(eta));
}

double logistic(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

// log(1 + e^eta) without overflow.
double softplus(double eta) {
  return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

bool well_conditioned(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return true;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  return hi > 0.0 && lo > 1e-12 * hi;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

double BreslowBaseline::operator()(double t) const {
  auto it = std::upper_bound(times.begin(), times.end(), t);
  return it == times.begin() ? 0.0 : cumhaz[static_cast<std::size_t>(it - times.begin()) - 1];
}

double BreslowBaseline::jump_at(double t) const {
  auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.end() || *it != t) return 0.0;
  const auto k = static_cast<std::size_t>(it - times.begin());
  return k == 0 ? cumhaz[0] : cumhaz[k] - cumhaz[k - 1];
}

CureProblem make_problem(const SurvivalSample& sample) {
  const std::size_t n = sample.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return sample[a].time < sample[b].time; });
  const auto p = static_cast<Eigen::Index>(sample.x_dim());
  const auto q = static_cast<Eigen::Index>(sample.z_dim());
  CureProblem pr;
  pr.time.resize(static_cast<Eigen::Index>(n));
  pr.status.resize(n);
  pr.X.resize(static_cast<Eigen::Index>(n), p + 1);
  pr.Z.resize(static_cast<Eigen::Index>(n), q);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = sample[idx[i]];
    const auto row = static_cast<Eigen::Index>(i);
    pr.time[row] = r.time;
    pr.status[i] = r.status;
    pr.X(row, 0) = 1.0;
    for (Eigen::Index c = 0; c < p; ++c) pr.X(row, c + 1) = r.x[static_cast<std::size_t>(c)];
    for (Eigen::Index c = 0; c < q; ++c) pr.Z(row, c) = r.z[static_cast<std::size_t>(c)];
  }
  std::size_t first_at_time = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && pr.time[static_cast<Eigen::Index>(i)] != pr.time[static_cast<Eigen::Index>(i - 1)]) {
      first_at_time = i;
    }
    if (pr.status[i] != 1) continue;
    const double t = pr.time[static_cast<Eigen::Index>(i)];
    if (!pr.event_times.empty() && pr.event_times.back() == t) {
      pr.event_counts.back() += 1.0;
    } else {
      pr.event_times.push_back(t);
      pr.event_counts.push_back(1.0);
      pr.risk_start.push_back(first_at_time);
    }
  }
  if (pr.event_times.empty()) throw EmError("no events: latency model cannot be fitted");
  pr.steps_upto.resize(n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k < pr.event_times.size() && pr.event_times[k] <= pr.time[static_cast<Eigen::Index>(i)]) ++k;
    pr.steps_upto[i] = k;
  }
  return pr;
}

Eigen::VectorXd e_step_weights(const CureProblem& pr, const Eigen::VectorXd& gamma,
                               const Eigen::VectorXd& beta, const BreslowBaseline& baseline) {
  const std::size_t n = pr.n();
  Eigen::VectorXd w(static_cast<Eigen::Index>(n));
  const bool aligned = baseline.times == pr.event_times;
  const double tau = baseline.times.empty() ? 0.0 : baseline.times.back();
  const Eigen::VectorXd eta_x = pr.X * gamma;
  const Eigen::VectorXd eta_z = pr.Z.cols() ? Eigen::VectorXd(pr.Z * beta)
                                            : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    const auto r = static_cast<Eigen::Index>(j);
    if (pr.status[j] == 1) {
      w[r] = 1.0;
      continue;
    }
    const double t = pr.time[r];
    if (t > tau) {
      w[r] = 0.0;
      continue;
    }
    double cum;
    if (aligned) {
      const std::size_t k = pr.steps_upto[j];
      cum = k == 0 ? 0.0 : baseline.cumhaz[k - 1];
    } else {
      cum = baseline(t);
    }
    const double su = std::exp(-cum * std::exp(eta_z[r]));
    const double pi = logistic(eta_x[r]);
    const double num = pi * su;
    w[r] = num > 0.0 ? num / (1.0 - pi + num) : 0.0;
  }
  return w;
}

Eigen::VectorXd m_step_incidence(const Eigen::MatrixXd& X, const Eigen::VectorXd& w,
                                 const Eigen::VectorXd& gamma_init, const EmConfig& cfg) {
  if (!well_conditioned(X.transpose() * X)) throw EmError("incidence design rank-deficient");
  auto objective = [&](const Eigen::VectorXd& eta) {
    double f = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) f += w[i] * eta[i] - softplus(eta[i]);
    return f;
  };
  Eigen::VectorXd gamma = gamma_init.size() == X.cols() ? gamma_init
                                                        : Eigen::VectorXd::Zero(X.cols());
  Eigen::VectorXd eta = X * gamma;
  double f = objective(eta);
  for (std::size_t it = 0; it < cfg.newton_max_steps; ++it) {
    Eigen::VectorXd p(eta.size()), h(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      p[i] = logistic(eta[i]);
      h[i] = p[i] * (1.0 - p[i]);
    }
    const Eigen::VectorXd g = X.transpose() * (w - p);
    const Eigen::MatrixXd H = X.transpose() * h.asDiagonal() * X;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || !well_conditioned(H)) {
      throw EmError("incidence Newton failed: information singular (quasi-separation)");
    }
    Eigen::VectorXd step = ldlt.solve(g);
    Eigen::VectorXd cand = gamma + step;
    Eigen::VectorXd cand_eta = X * cand;
    double fc = objective(cand_eta);
    for (int half = 0; half < 40 && !(fc >= f - 1e-12 * std::abs(f)); ++half) {
      step *= 0.5;
      cand = gamma + step;
      cand_eta = X * cand;
      fc = objective(cand_eta);
    }
    gamma = cand;
    eta = cand_eta;
    f = fc;
    if (step.cwiseAbs().maxCoeff() < cfg.newton_tol) return gamma;
  }
  throw EmError("incidence Newton did not converge (quasi-separation)");
}

namespace {

struct CoxSums {
  std::vector<double> s0;       // per event time, scaled by exp(-shift)
  Eigen::MatrixXd s1;           // q x K
  std::vector<Eigen::MatrixXd> s2;
  double shift = 0.0;
};

CoxSums risk_sums(const CureProblem& pr, const Eigen::VectorXd& w, const Eigen::VectorXd& eta,
                  bool second_order) {
  const std::size_t n = pr.n();
  const std::size_t K = pr.event_times.size();
  const Eigen::Index q = pr.Z.cols();
  CoxSums cs;
  cs.shift = eta.size() ? eta.maxCoeff() : 0.0;
  cs.s0.assign(K, 0.0);
  cs.s1 = Eigen::MatrixXd::Zero(q, static_cast<Eigen::Index>(K));
  if (second_order) cs.s2.assign(K, Eigen::MatrixXd::Zero(q, q));
  double a0 = 0.0;
  Eigen::VectorXd a1 = Eigen::VectorXd::Zero(q);
  Eigen::MatrixXd a2 = Eigen::MatrixXd::Zero(q, q);
  std::size_t k = K;
  for (std::size_t j = n; j-- > 0;) {
    const auto r = static_cast<Eigen::Index>(j);
    const double e = w[r] * std::exp(eta[r] - cs.shift);
    a0 += e;
    if (q > 0) {
      a1.noalias() += e * pr.Z.row(r).transpose();
      if (second_order) a2.noalias() += e * pr.Z.row(r).transpose() * pr.Z.row(r);
    }
    while (k > 0 && pr.risk_start[k - 1] == j) {
      --k;
      cs.s0[k] = a0;
      if (q > 0) {
        cs.s1.col(static_cast<Eigen::Index>(k)) = a1;
        if (second_order) cs.s2[k] = a2;
      }
    }
  }
  return cs;
}

double partial_loglik(const CureProblem& pr, const Eigen::VectorXd& eta, const CoxSums& cs) {
  double f = 0.0;
  for (std::size_t j = 0; j < pr.n(); ++j) {
    if (pr.status[j] == 1) f += eta[static_cast<Eigen::Index>(j)];
  }
  for (std::size_t k = 0; k < cs.s0.size(); ++k) {
    f -= pr.event_counts[k] * (std::log(cs.s0[k]) + cs.shift);
  }
  return f;
}

}  // namespace

LatencyFit m_step_latency(const CureProblem& pr, const Eigen::VectorXd& w,
                          const Eigen::VectorXd& beta_init, const EmConfig& cfg) {
  const Eigen::Index q = pr.Z.cols();
  const std::size_t K = pr.event_times.size();
  if (K == 0) throw EmError("no events: latency model cannot be fitted");
  Eigen::VectorXd beta = beta_init.size() == q ? beta_init : Eigen::VectorXd::Zero(q);
  Eigen::VectorXd zsum_events = Eigen::VectorXd::Zero(q);
  for (std::size_t j = 0; j < pr.n(); ++j) {
    if (pr.status[j] == 1) zsum_events += pr.Z.row(static_cast<Eigen::Index>(j)).transpose();
  }
  auto linear = [&](const Eigen::VectorXd& b) -> Eigen::VectorXd {
    return q ? Eigen::VectorXd(pr.Z * b) : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pr.n()));
  };

  Eigen::VectorXd eta = linear(beta);
  if (q > 0) {
    CoxSums cs = risk_sums(pr, w, eta, true);
    double f = partial_loglik(pr, eta, cs);
    bool done = false;
    for (std::size_t it = 0; it < cfg.newton_max_steps && !done; ++it) {
      Eigen::VectorXd g = zsum_events;
      Eigen::MatrixXd info = Eigen::MatrixXd::Zero(q, q);
      for (std::size_t k = 0; k < K; ++k) {
        const Eigen::VectorXd m = cs.s1.col(static_cast<Eigen::Index>(k)) / cs.s0[k];
        g -= pr.event_counts[k] * m;
        info += pr.event_counts[k] * (cs.s2[k] / cs.s0[k] - m * m.transpose());
      }
      if (!well_conditioned(info)) throw EmError("latency information singular");
      Eigen::VectorXd step = info.ldlt().solve(g);
      Eigen::VectorXd cand = beta + step;
      Eigen::VectorXd cand_eta = linear(cand);
      CoxSums ccs = risk_sums(pr, w, cand_eta, true);
      double fc = partial_loglik(pr, cand_eta, ccs);
      for (int half = 0; half < 40 && !(fc >= f - 1e-12 * std::abs(f)); ++half) {
        step *= 0.5;
        cand = beta + step;
        cand_eta = linear(cand);
        ccs = risk_sums(pr, w, cand_eta, true);
        fc = partial_loglik(pr, cand_eta, ccs);
      }
      beta = cand;
      eta = cand_eta;
      cs = std::move(ccs);
      f = fc;
      done = step.cwiseAbs().maxCoeff() < cfg.newton_tol;
    }
    if (!done) throw EmError("latency Newton did not converge");
  }
  const CoxSums cs = risk_sums(pr, w, eta, false);
  LatencyFit out;
  out.beta = beta;
  out.baseline.times = pr.event_times;
  out.baseline.cumhaz.resize(K);
  const double unshift = std::exp(-cs.shift);
  double cum = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    cum += pr.event_counts[k] / cs.s0[k] * unshift;
    out.baseline.cumhaz[k] = cum;
  }
  return out;
}

double observed_loglik(const CureProblem& pr, const Eigen::VectorXd& gamma,
                       const Eigen::VectorXd& beta, const BreslowBaseline& baseline) {
  const double tau = baseline.times.empty() ? 0.0 : baseline.times.back();
  const Eigen::VectorXd eta_x = pr.X * gamma;
  double ll = 0.0;
  for (std::size_t j = 0; j < pr.n(); ++j) {
    const auto r = static_cast<Eigen::Index>(j);
    const double t = pr.time[r];
    const double lin = pr.Z.cols() ? pr.Z.row(r).dot(beta) : 0.0;
    if (pr.status[j] == 1) {
      const double jump = baseline.jump_at(t);
      if (!(jump > 0.0)) throw EmError("zero density at an observed event time");
      ll += log_logistic(eta_x[r]) + std::log(jump) + lin - baseline(t) * std::exp(lin);
    } else if (t > tau) {
      ll += log_logistic(-eta_x[r]);
    } else {
      const double pi = logistic(eta_x[r]);
      const double su = std::exp(-baseline(t) * std::exp(lin));
      ll += std::log(logistic(-eta_x[r]) + pi * su);
    }
  }
  return ll;
}

LogisticCoxFit fit_logistic_cox(const CureProblem& pr, const EmConfig& cfg,
                                const EmObserver& observer) {
  if (!(cfg.tol > 0.0) || cfg.max_iter < 1) throw EmError("invalid EM configuration");
  const auto n = static_cast<Eigen::Index>(pr.n());
  Eigen::VectorXd delta(n);
  for (Eigen::Index i = 0; i < n; ++i) delta[i] = pr.status[static_cast<std::size_t>(i)];

  LogisticCoxFit fit;
  fit.gamma = m_step_incidence(pr.X, delta, Eigen::VectorXd::Zero(pr.X.cols()), cfg);
  LatencyFit lat = m_step_latency(pr, Eigen::VectorXd::Ones(n), Eigen::VectorXd::Zero(pr.Z.cols()), cfg);
  fit.beta = lat.beta;
  fit.baseline = std::move(lat.baseline);
  fit.last_event_time = pr.last_event_time();
  fit.loglik_path.push_back(observed_loglik(pr, fit.gamma, fit.beta, fit.baseline));

  for (std::size_t it = 1; it <= cfg.max_iter; ++it) {
    const Eigen::VectorXd w = e_step_weights(pr, fit.gamma, fit.beta, fit.baseline);
    Eigen::VectorXd gamma = m_step_incidence(pr.X, w, fit.gamma, cfg);
    LatencyFit next = m_step_latency(pr, w, fit.beta, cfg);
    double change = max_abs_diff(next.baseline.cumhaz, fit.baseline.cumhaz);
    if (gamma.size()) change = std::max(change, (gamma - fit.gamma).cwiseAbs().maxCoeff());
    if (next.beta.size()) change = std::max(change, (next.beta - fit.beta).cwiseAbs().maxCoeff());
    fit.gamma = std::move(gamma);
    fit.beta = std::move(next.beta);
    fit.baseline = std::move(next.baseline);
    fit.em_iterations = it;
    fit.loglik_path.push_back(observed_loglik(pr, fit.gamma, fit.beta, fit.baseline));
    if (observer) observer({it, &w, fit.loglik_path.back()});
    if (change < cfg.tol) {
      fit.converged = true;
      break;
    }
  }
  return fit;
}

LogisticCoxFit fit_logistic_cox(const SurvivalSample& sample, const EmConfig& cfg) {
  return fit_logistic_cox(make_problem(sample), cfg);
}

double uncured_probability(const LogisticCoxFit& fit, const Eigen::VectorXd& x) {
  double eta = fit.gamma[0];
  for (Eigen::Index i = 0; i < x.size(); ++i) eta += fit.gamma[i + 1] * x[i];
  return logistic(eta);
}

double conditional_survival(const LogisticCoxFit& fit, const Eigen::VectorXd& z, double t) {
  if (t > fit.last_event_time) return 0.0;
  const double lin = fit.beta.size() ? fit.beta.dot(z) : 0.0;
  return std::exp(-fit.baseline(t) * std::exp(lin));
}

double conditional_mst(const LogisticCoxFit& fit, const Eigen::VectorXd& z) {
  const double mult = std::exp(fit.beta.size() ? fit.beta.dot(z) : 0.0);
  const auto& bt = fit.baseline.times;
  double area = 0.0;
  double prev = 0.0;
  double cum = 0.0;
  for (std::size_t k = 0; k < bt.size(); ++k) {
    area += std::exp(-cum * mult) * (bt[k] - prev);
    prev = bt[k];
    cum = fit.baseline.cumhaz[k];
  }
  return area;
}

}  // namespace curemst
