#include <cmath>

#include "doctest.h"
#include "cure_data.hpp"
#include "fixtures.hpp"

#include "curemst/cure_em.hpp"
#include "curemst/errors.hpp"
#include "curemst/settings.hpp"

using namespace curemst;
using doctest::Approx;

namespace {

std::vector<oracle::Obs> sorted_obs(const CureProblem& pr) {
  std::vector<oracle::Obs> o;
  for (std::size_t j = 0; j < pr.n(); ++j) o.push_back({pr.time[static_cast<Eigen::Index>(j)], pr.status[j]});
  return o;
}

}  // namespace

TEST_CASE("E-step weight examples") {
  // Three records, one event at 1; censored at 0.5 and in the plateau at 3.
  const auto s = fx::sample({{0.5, 0}, {1, 1}, {3, 0}});
  const auto pr = make_problem(s);
  BreslowBaseline bl{{1.0}, {std::log(2.0)}};
  // At 0.5 S_u = 1: g = pi / 1 = 0.5 with gamma0 = 0.
  Eigen::VectorXd g0 = Eigen::VectorXd::Zero(1), b0(0);
  auto w = e_step_weights(pr, g0, b0, bl);
  CHECK(w[0] == Approx(0.5));
  CHECK(w[1] == 1.0);
  CHECK(w[2] == 0.0);
  // Censored exactly at the event time sees S_u = 1/2: g = 0.25 / 0.75.
  const auto s2 = fx::sample({{1, 0}, {1, 1}});
  const auto pr2 = make_problem(s2);
  w = e_step_weights(pr2, g0, b0, bl);
  const std::size_t cens = pr2.status[0] == 0 ? 0 : 1;
  CHECK(w[static_cast<Eigen::Index>(cens)] == Approx(1.0 / 3.0));
}

TEST_CASE("incidence M-step closed forms") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(10, 1);
  Eigen::VectorXd init = Eigen::VectorXd::Zero(1);
  CHECK(m_step_incidence(X, Eigen::VectorXd::Constant(10, 0.5), init)[0] == Approx(0.0).epsilon(1e-10));
  CHECK(m_step_incidence(X, Eigen::VectorXd::Constant(10, 0.75), init)[0] == Approx(std::log(3.0)).epsilon(1e-10));
  CHECK_THROWS_AS(m_step_incidence(X, Eigen::VectorXd::Zero(10), init), EmError);
  CHECK_THROWS_AS(m_step_incidence(X, Eigen::VectorXd::Ones(10), init), EmError);
  Eigen::MatrixXd Xr(10, 2);
  Xr.col(0).setOnes();
  Xr.col(1).setConstant(2.0);
  CHECK_THROWS_WITH_AS(m_step_incidence(Xr, Eigen::VectorXd::Constant(10, 0.5), Eigen::VectorXd::Zero(2)),
                       doctest::Contains("rank-deficient"), EmError);
}

TEST_CASE("latency M-step: Nelson-Aalen on D") {
  const auto pr = make_problem(fx::D());
  const auto lat = m_step_latency(pr, Eigen::VectorXd::Ones(4), Eigen::VectorXd(0));
  REQUIRE(lat.baseline.times.size() == 2);
  CHECK(lat.baseline.cumhaz[0] == Approx(0.25));
  CHECK(lat.baseline.cumhaz[1] == Approx(7.0 / 12.0));
}

TEST_CASE("latency M-step: constant z is singular") {
  std::vector<SurvivalRecord> recs;
  for (int i = 0; i < 10; ++i) recs.push_back({1.0 + i, i % 3 ? 1 : 0, {}, {2.0}});
  const auto pr = make_problem(SurvivalSample(recs));
  CHECK_THROWS_AS(m_step_latency(pr, Eigen::VectorXd::Ones(10), Eigen::VectorXd::Zero(1)), EmError);
}

TEST_CASE("latency M-step matches the brute-force weighted Cox") {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const auto s = fx::logistic_cox_sample(30 + seed, 40 + seed);
    const auto pr = make_problem(s);
    const auto o = sorted_obs(pr);
    Eigen::VectorXd w = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(pr.n()));
    Rng rng(seed);
    for (std::size_t j = 0; j < pr.n(); ++j) {
      if (pr.status[j] == 0) w[static_cast<Eigen::Index>(j)] = seed % 2 ? 0.5 : rng.uniform();
    }
    const auto lat = m_step_latency(pr, w, Eigen::VectorXd::Zero(pr.Z.cols()));
    const auto ref = oracle::cox(o, pr.Z, w);
    for (Eigen::Index i = 0; i < ref.beta.size(); ++i) CHECK(lat.beta[i] == Approx(ref.beta[i]).epsilon(1e-8));
    REQUIRE(lat.baseline.times == ref.times);
    for (std::size_t k = 0; k < ref.cumhaz.size(); ++k) {
      CHECK(lat.baseline.cumhaz[k] == Approx(ref.cumhaz[k]).epsilon(1e-8));
    }
  }
}

TEST_CASE("observed log-likelihood matches the direct formula") {
  const auto s = fx::logistic_cox_sample(60, 3);
  const auto pr = make_problem(s);
  const auto fit = fit_logistic_cox(pr);
  Rng rng(1);
  for (int rep = 0; rep < 5; ++rep) {
    Eigen::VectorXd g = fit.gamma, b = fit.beta;
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] += 0.3 * rng.normal();
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] += 0.3 * rng.normal();
    const double ref = oracle::mixture_loglik(sorted_obs(pr), pr.X, pr.Z, g, b, fit.baseline.times,
                                              fit.baseline.cumhaz);
    CHECK(observed_loglik(pr, g, b, fit.baseline) == Approx(ref).epsilon(1e-12));
  }
  // Single censored record in the plateau contributes log(1 - pi).
  const auto one = make_problem(fx::sample({{1, 1}, {5, 0}}));
  BreslowBaseline bl{{1.0}, {1.0}};
  Eigen::VectorXd g(1);
  g << 0.4;
  const double pi = 1 / (1 + std::exp(-0.4));
  CHECK(observed_loglik(one, g, Eigen::VectorXd(0), bl) == Approx(std::log(pi) + std::log(1.0) - 1.0 + std::log(1 - pi)));
  BreslowBaseline bad{{0.5}, {1.0}};
  CHECK_THROWS_AS(observed_loglik(one, g, Eigen::VectorXd(0), bad), EmError);
}

TEST_CASE("EM ascent, weight bounds and stationarity") {
  EmConfig cfg;
  cfg.tol = 1e-10;
  cfg.max_iter = 5000;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const auto pr = make_problem(fx::logistic_cox_sample(150, 100 + seed));
    bool weights_ok = true;
    const auto fit = fit_logistic_cox(pr, cfg, [&](const EmIterate& it) {
      for (std::size_t j = 0; j < pr.n(); ++j) {
        const double w = (*it.weights)[static_cast<Eigen::Index>(j)];
        if (w < pr.status[j] || w > 1.0) weights_ok = false;
      }
    });
    CHECK(fit.converged);
    CHECK(weights_ok);
    for (std::size_t i = 1; i < fit.loglik_path.size(); ++i) {
      CHECK(fit.loglik_path[i] >= fit.loglik_path[i - 1] - 1e-10);
    }
    auto fg = [&](const Eigen::VectorXd& g) { return observed_loglik(pr, g, fit.beta, fit.baseline); };
    auto fb = [&](const Eigen::VectorXd& b) { return observed_loglik(pr, fit.gamma, b, fit.baseline); };
    const double score = std::max(oracle::gradient(fg, fit.gamma).cwiseAbs().maxCoeff(),
                                  oracle::gradient(fb, fit.beta).cwiseAbs().maxCoeff());
    CHECK(score < 1e-4);
    for (std::size_t k = 1; k < fit.baseline.cumhaz.size(); ++k) {
      CHECK(fit.baseline.cumhaz[k] >= fit.baseline.cumhaz[k - 1]);
    }
  }
}

TEST_CASE("consistency on Setting II.1 sample 1") {
  const auto spec = setting_by_id("II.1");
  Rng rng(2024);
  const auto s = sample_group(spec.group1, 2000, rng, 1);
  const auto fit = fit_logistic_cox(s);
  CHECK(fit.converged);
  const Eigen::Vector3d g(0.0, 0.5, 0.8);
  const Eigen::Vector2d b(0.3, 0.5);
  CHECK((fit.gamma - g).cwiseAbs().maxCoeff() < 0.15);
  CHECK((fit.beta - b).cwiseAbs().maxCoeff() < 0.15);
}

TEST_CASE("no events") {
  CHECK_THROWS_AS(make_problem(fx::sample({{1, 0}, {2, 0}})), EmError);
}

TEST_CASE("conditional survival and MST") {
  const auto s = fx::logistic_cox_sample(120, 8);
  const auto fit = fit_logistic_cox(s);
  Eigen::Vector2d z(0.3, 1.0);
  CHECK(conditional_survival(fit, z, 0.0) == 1.0);
  CHECK(conditional_survival(fit, z, fit.last_event_time + 1e-9) == 0.0);
  double prev = 1.0;
  for (double t = 0; t <= fit.last_event_time; t += fit.last_event_time / 200) {
    const double v = conditional_survival(fit, z, t);
    CHECK(v <= prev);
    prev = v;
  }
  // Midpoint rule on a fine grid against the interval sum.
  const long steps = 20000000;
  const double h = fit.last_event_time / steps;
  double area = 0;
  for (long i = 0; i < steps; ++i) area += conditional_survival(fit, z, (i + 0.5) * h) * h;
  CHECK(std::abs(conditional_mst(fit, z) - area) < 1e-6);

  LogisticCoxFit flat = fit;
  flat.beta.setZero();
  CHECK(conditional_mst(flat, z) == conditional_mst(flat, Eigen::Vector2d(-4, 0)));
  CHECK(conditional_survival(flat, z, 0.5) == conditional_survival(flat, Eigen::Vector2d(3, 1), 0.5));
}
