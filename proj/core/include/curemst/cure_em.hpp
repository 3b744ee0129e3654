#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "curemst/data.hpp"

namespace curemst {

/// Breslow cumulative hazard: value cumhaz[k] on [times[k], times[k+1]).
struct BreslowBaseline {
  std::vector<double> times;
  std::vector<double> cumhaz;

  /// Right-continuous evaluation; 0 before the first step.
  double operator()(double t) const;
  /// Jump at t (0 if t is not a step time).
  double jump_at(double t) const;
};

struct EmConfig {
  double tol = 1e-7;
  std::size_t max_iter = 500;
  double newton_tol = 1e-10;
  std::size_t newton_max_steps = 50;
};

/// One EM iterate, passed to an optional observer (tests, diagnostics).
struct EmIterate {
  std::size_t iteration = 0;
  const Eigen::VectorXd* weights = nullptr;
  double loglik = 0.0;
};

struct LogisticCoxFit {
  Eigen::VectorXd gamma;  // intercept first
  Eigen::VectorXd beta;
  BreslowBaseline baseline;
  double last_event_time = 0.0;
  std::size_t em_iterations = 0;
  std::vector<double> loglik_path;  // starts at the initial value
  bool converged = false;
};

/// Sample prepared for fitting: sorted by time, design matrices built.
/// X carries a leading intercept column.
struct CureProblem {
  Eigen::VectorXd time;
  std::vector<int> status;
  Eigen::MatrixXd X;
  Eigen::MatrixXd Z;
  // Distinct event times and their multiplicities.
  std::vector<double> event_times;
  std::vector<double> event_counts;
  // First sorted position with time >= event_times[k] (risk set start).
  std::vector<std::size_t> risk_start;
  // Number of event times <= time[j].
  std::vector<std::size_t> steps_upto;

  std::size_t n() const { return status.size(); }
  double last_event_time() const { return event_times.empty() ? 0.0 : event_times.back(); }
};

/// Throws EmError when the sample has no events.
CureProblem make_problem(const SurvivalSample& sample);

/// Uncured posterior weights: 1 for events, pi S_u / (1 - pi + pi S_u) for
/// censored records, with S_u = 0 after the last event time.
Eigen::VectorXd e_step_weights(const CureProblem& pr, const Eigen::VectorXd& gamma,
                               const Eigen::VectorXd& beta, const BreslowBaseline& baseline);

/// Weighted logistic fit by Newton with step halving. Throws EmError on a
/// rank-deficient design or when Newton fails to converge (separation).
Eigen::VectorXd m_step_incidence(const Eigen::MatrixXd& X, const Eigen::VectorXd& w,
                                 const Eigen::VectorXd& gamma_init, const EmConfig& cfg = {});

struct LatencyFit {
  Eigen::VectorXd beta;
  BreslowBaseline baseline;
};

/// Weighted Cox partial likelihood (Breslow ties) and weighted Breslow
/// baseline; censored records enter the risk sets with weight w.
LatencyFit m_step_latency(const CureProblem& pr, const Eigen::VectorXd& w,
                          const Eigen::VectorXd& beta_init, const EmConfig& cfg = {});

/// Observed-data log-likelihood of the discrete-baseline mixture model.
/// Throws EmError if an event time carries no baseline jump.
double observed_loglik(const CureProblem& pr, const Eigen::VectorXd& gamma,
                       const Eigen::VectorXd& beta, const BreslowBaseline& baseline);

using EmObserver = std::function<void(const EmIterate&)>;

/// EM for the logistic-Cox mixture cure model with the zero-tail constraint.
/// A fit that hits max_iter is returned with converged = false.
LogisticCoxFit fit_logistic_cox(const CureProblem& pr, const EmConfig& cfg = {},
                                const EmObserver& observer = {});
LogisticCoxFit fit_logistic_cox(const SurvivalSample& sample, const EmConfig& cfg = {});

double uncured_probability(const LogisticCoxFit& fit, const Eigen::VectorXd& x);
/// exp(-Lambda(t) e^{beta'z}) for t <= last event time, 0 afterwards.
double conditional_survival(const LogisticCoxFit& fit, const Eigen::VectorXd& z, double t);
/// Integral of the conditional survival of the uncured over [0, last event].
double conditional_mst(const LogisticCoxFit& fit, const Eigen::VectorXd& z);

}  // namespace curemst
