#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"

#include "curemst/errors.hpp"
#include "curemst/inference_sp.hpp"
#include "curemst/settings.hpp"

using namespace curemst;
using doctest::Approx;

namespace {

TwoSampleDataset ii(const std::string& id, std::size_t n1, std::size_t n2, std::uint64_t seed) {
  return sample_setting(setting_by_id(id), n1, n2, seed);
}

}  // namespace

TEST_CASE("antisymmetry under label swap") {
  const auto ds = ii("II.1", 150, 150, 1);
  const auto a = fit_two_sample_cure(ds);
  const auto b = fit_two_sample_cure(ds.swapped());
  for (const auto& z : std::vector<std::vector<double>>{{0, 1}, {-1, 0}, {2, 1}}) {
    CHECK(conditional_mst_difference(a, z) == Approx(-conditional_mst_difference(b, z)).epsilon(1e-12));
  }
  SpOptions o;
  o.B_boot = 20;
  o.seed = 3;
  const auto ra = compare_conditional_mst(ds, {{0, 1}}, o);
  const auto rb = compare_conditional_mst(ds.swapped(), {{0, 1}}, o);
  CHECK(ra[0].estimate.t_stat == Approx(-rb[0].estimate.t_stat).epsilon(1e-10));
}

TEST_CASE("bootstrap sigma is reproducible and grows with |z|") {
  const auto ds = ii("II.1", 200, 200, 2);
  const auto a = bootstrap_sigma_z(ds, {{0, 0.4}, {6, 1}}, 40, 11);
  const auto b = bootstrap_sigma_z(ds, {{0, 0.4}, {6, 1}}, 40, 11, {}, 3);
  CHECK(a.sigma == b.sigma);
  CHECK(a.sigma[1] > a.sigma[0]);
  CHECK(a.used + a.failures == 40);
  CHECK(a.coef_se1.size() == 5);
}

TEST_CASE("z dimension mismatch") {
  const auto ds = ii("II.1", 80, 80, 3);
  CHECK_THROWS_AS(bootstrap_sigma_z(ds, {{0}}, 5, 1), ValidationError);
}

TEST_CASE("asymptotic interval from the bootstrap sigma") {
  const auto ds = ii("II.2", 150, 150, 4);
  SpOptions o;
  o.B_boot = 30;
  o.seed = 9;
  const auto r = compare_conditional_mst(ds, {{0, 1}}, o);
  const auto& e = r[0].estimate;
  const double half = 1.959963984540054 * e.sigma_z_hat / e.a_n;
  CHECK(r[0].asymptotic.ci_lower == Approx(e.m_z_hat - half).epsilon(1e-9));
  CHECK(r[0].asymptotic.ci_upper == Approx(e.m_z_hat + half).epsilon(1e-9));
  CHECK(e.a_n == Approx(std::sqrt(150.0 * 150.0 / 300.0)));
  CHECK_THROWS_AS(normal_inference(e.m_z_hat, 0.0, e.a_n, 0.05), InferenceError);
}

TEST_CASE("m_z is flat in z when both latency slopes vanish") {
  auto spec = setting_by_id("II.1");
  spec.group1.beta = {0.0, 0.0};
  spec.group2.beta = {0.0, 0.0};
  const auto ds = sample_setting(spec, 150, 150, 5);
  auto fits = fit_two_sample_cure(ds);
  fits.fit1.beta.setZero();
  fits.fit2.beta.setZero();
  const double m0 = conditional_mst_difference(fits, {0, 0});
  for (const auto& z : std::vector<std::vector<double>>{{1, 1}, {-3, 0}, {4, 1}}) {
    CHECK(std::abs(conditional_mst_difference(fits, z) - m0) < 1e-8);
  }
}

TEST_CASE("permutation: identity stream, determinism") {
  const auto ds = ii("II.3", 80, 60, 6);
  SpOptions o;
  o.B_boot = 10;
  o.B_perm = 6;
  o.seed = 21;
  o.workers = 1;
  o.mode = PermutationMode::identity;
  const auto id = permutation_inference_sp(ds, {{0, 1}}, o);
  CHECK(id[0].p_two_sided == 1.0);

  o.mode = PermutationMode::random;
  const auto a = permutation_inference_sp(ds, {{0, 1}, {1, 0}}, o);
  o.workers = 4;
  const auto b = permutation_inference_sp(ds, {{0, 1}, {1, 0}}, o);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(a[k].ci_lower == b[k].ci_lower);
    CHECK(a[k].ci_upper == b[k].ci_upper);
    CHECK(a[k].p_two_sided == b[k].p_two_sided);
    CHECK(a[k].n_replicates_used == 6);
  }
  o.mode = PermutationMode::exhaustive;
  CHECK_THROWS_AS(permutation_inference_sp(ds, {{0, 1}}, o), InferenceError);
}

TEST_CASE("permuted fits converge on Setting II.3 data") {
  const auto ds = ii("II.3", 200, 100, 7);
  const auto pooled = ds.pooled();
  int ok = 0;
  const int R = 40;
  for (int r = 0; r < R; ++r) {
    Rng rng(substream_seed(1, static_cast<std::uint64_t>(r), 0, stream_tag::permutation));
    auto sp = permute_split(pooled, ds.n1(), rng);
    try {
      const auto f1 = fit_logistic_cox(sp.group1);
      const auto f2 = fit_logistic_cox(sp.group2);
      ok += f1.converged && f2.converged;
    } catch (const Error&) {
    }
  }
  CHECK(ok >= 0.95 * R);
}
