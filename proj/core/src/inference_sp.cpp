#include "curemst/inference_sp.hpp"

#include <cmath>

#include "curemst/errors.hpp"
#include "curemst/mst.hpp"
#include "curemst/resampling.hpp"
#include "curemst/stats.hpp"

namespace curemst {

namespace {

Eigen::VectorXd as_vector(const std::vector<double>& z) {
  return Eigen::Map<const Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(z.size()));
}

void check_z(const TwoSampleDataset& ds, const std::vector<std::vector<double>>& zs) {
  for (const auto& z : zs) {
    if (z.size() != ds.sample1.z_dim()) {
      throw ValidationError("z has dimension " + std::to_string(z.size()) + ", latency covariates " +
                            std::to_string(ds.sample1.z_dim()));
    }
  }
}

std::vector<double> differences(const TwoSampleCureFit& fits, const std::vector<std::vector<double>>& zs) {
  std::vector<double> m;
  m.reserve(zs.size());
  for (const auto& z : zs) m.push_back(conditional_mst_difference(fits, z));
  return m;
}

Eigen::VectorXd coefficients(const LogisticCoxFit& f) {
  Eigen::VectorXd c(f.gamma.size() + f.beta.size());
  c << f.gamma, f.beta;
  return c;
}

Eigen::VectorXd column_sd(const std::vector<Eigen::VectorXd>& rows) {
  if (rows.empty()) return {};
  const Eigen::Index d = rows.front().size();
  Eigen::VectorXd sd(d);
  std::vector<double> col(rows.size());
  for (Eigen::Index j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < rows.size(); ++i) col[i] = rows[i][j];
    sd[j] = sample_sd(col);
  }
  return sd;
}

}  // namespace

TwoSampleCureFit fit_two_sample_cure(const TwoSampleDataset& ds, const EmConfig& cfg) {
  TwoSampleCureFit out{fit_logistic_cox(ds.sample1, cfg), fit_logistic_cox(ds.sample2, cfg)};
  if (!out.fit1.converged || !out.fit2.converged) {
    throw EmError("EM did not converge within " + std::to_string(cfg.max_iter) + " iterations");
  }
  return out;
}

double conditional_mst_difference(const TwoSampleCureFit& fits, const std::vector<double>& z) {
  const Eigen::VectorXd v = as_vector(z);
  return conditional_mst(fits.fit1, v) - conditional_mst(fits.fit2, v);
}

BootstrapSigma bootstrap_sigma_z(const TwoSampleDataset& ds, const std::vector<std::vector<double>>& zs,
                                 std::size_t B, std::uint64_t seed, const EmConfig& cfg,
                                 std::size_t workers, double max_failure_rate) {
  check_z(ds, zs);
  const ReplicateStream stream{seed, B, Scheme::bootstrap_stratified};
  struct Replicate {
    std::vector<double> m;
    Eigen::VectorXd coef1, coef2;
  };
  auto out = run_replicates<Replicate>(
      stream,
      [&](std::size_t, Rng& rng) {
        const auto fits = fit_two_sample_cure(bootstrap_dataset(ds, rng), cfg);
        return Replicate{differences(fits, zs), coefficients(fits.fit1), coefficients(fits.fit2)};
      },
      workers);
  BootstrapSigma res;
  std::vector<std::vector<double>> cols(zs.size());
  std::vector<Eigen::VectorXd> c1, c2;
  for (auto& o : out) {
    if (!o.ok()) {
      ++res.failures;
      continue;
    }
    for (std::size_t k = 0; k < zs.size(); ++k) cols[k].push_back(o.value->m[k]);
    c1.push_back(o.value->coef1);
    c2.push_back(o.value->coef2);
  }
  res.used = B - res.failures;
  if (static_cast<double>(res.failures) > max_failure_rate * static_cast<double>(B) || res.used < 2) {
    throw EmError("bootstrap unreliable: " + std::to_string(res.failures) + " of " +
                  std::to_string(B) + " replicate fits failed");
  }
  const double a_n = rate_factor(ds.n1(), ds.n2());
  for (const auto& c : cols) res.sigma.push_back(a_n * sample_sd(c));
  res.coef_se1 = column_sd(c1);
  res.coef_se2 = column_sd(c2);
  return res;
}

SpAnalysis analyze_conditional_mst(const TwoSampleDataset& ds,
                                   const std::vector<std::vector<double>>& zs, const SpOptions& opt) {
  check_z(ds, zs);
  SpAnalysis an;
  an.fits = fit_two_sample_cure(ds, opt.em);
  an.boot = bootstrap_sigma_z(ds, zs, opt.B_boot, opt.seed, opt.em, opt.workers,
                              opt.max_failure_rate);
  const auto& fits = an.fits;
  const auto& boot = an.boot;
  const double a_n = rate_factor(ds.n1(), ds.n2());
  auto& out = an.per_z;
  for (std::size_t k = 0; k < zs.size(); ++k) {
    SpComparison c;
    auto& e = c.estimate;
    const Eigen::VectorXd v = as_vector(zs[k]);
    e.z = zs[k];
    e.mst1 = conditional_mst(fits.fit1, v);
    e.mst2 = conditional_mst(fits.fit2, v);
    e.m_z_hat = e.mst1 - e.mst2;
    e.sigma_z_hat = boot.sigma[k];
    e.a_n = a_n;
    e.bootstrap_B = opt.B_boot;
    e.fit_failures = boot.failures;
    if (!(e.sigma_z_hat > 0.0)) throw InferenceError("degenerate studentization: sigma_z = 0");
    e.t_stat = a_n * e.m_z_hat / e.sigma_z_hat;
    c.asymptotic = normal_inference(e.m_z_hat, e.sigma_z_hat, a_n, opt.alpha, opt.m0);
    c.asymptotic.z = zs[k];
    c.asymptotic.bootstrap_B = opt.B_boot;
    c.asymptotic.fit_failures = boot.failures;
    c.asymptotic.seed = opt.seed;
    out.push_back(std::move(c));
  }
  return an;
}

std::vector<SpComparison> compare_conditional_mst(const TwoSampleDataset& ds,
                                                  const std::vector<std::vector<double>>& zs,
                                                  const SpOptions& opt) {
  return analyze_conditional_mst(ds, zs, opt).per_z;
}

std::vector<InferenceResult> permutation_inference_sp(const TwoSampleDataset& ds,
                                                      const std::vector<std::vector<double>>& zs,
                                                      const SpOptions& opt) {
  check_z(ds, zs);
  if (opt.mode == PermutationMode::exhaustive) {
    throw InferenceError("exhaustive enumeration is not offered for refitted models");
  }
  if (opt.B_perm == 0) throw InferenceError("permutation inference needs B >= 1");
  const auto fits = fit_two_sample_cure(ds, opt.em);
  const auto m_hat = differences(fits, zs);
  const auto boot = bootstrap_sigma_z(ds, zs, opt.B_boot, opt.seed, opt.em, opt.workers,
                                      opt.max_failure_rate);
  for (double s : boot.sigma) {
    if (!(s > 0.0)) throw InferenceError("degenerate studentization: sigma_z = 0");
  }

  const auto pooled = ds.pooled();
  const std::size_t n1 = ds.n1();
  constexpr std::size_t kMaxAttempts = 16;
  struct Draw {
    std::vector<double> t;
    std::size_t discarded = 0;
    std::size_t inner_failures = 0;
  };
  auto out = run_indexed<Draw>(
      opt.B_perm,
      [&](std::size_t r) -> Draw {
        Draw d;
        for (std::size_t attempt = 0; attempt < kMaxAttempts; ++attempt) {
          TwoSampleDataset split;
          std::uint64_t boot_seed;
          if (opt.mode == PermutationMode::identity) {
            split = ds;
            boot_seed = opt.seed;
          } else {
            Rng rng(substream_seed(opt.seed, r, attempt, stream_tag::permutation));
            auto ps = permute_split(pooled, n1, rng);
            split = TwoSampleDataset(std::move(ps.group1), std::move(ps.group2));
            boot_seed = substream_seed(opt.seed, r, attempt, stream_tag::replicate);
          }
          try {
            const auto pf = fit_two_sample_cure(split, opt.em);
            const auto m = differences(pf, zs);
            const auto bs = bootstrap_sigma_z(split, zs, opt.B_boot, boot_seed, opt.em, 1,
                                              opt.max_failure_rate);
            d.inner_failures += bs.failures;
            bool ok = true;
            d.t.clear();
            for (std::size_t k = 0; k < zs.size(); ++k) {
              if (!(bs.sigma[k] > 0.0) || !std::isfinite(m[k])) ok = false;
              d.t.push_back(m[k] / bs.sigma[k]);
            }
            if (ok) return d;
          } catch (const Error&) {
          }
          ++d.discarded;
          if (opt.mode == PermutationMode::identity) break;
        }
        throw InferenceError("no usable permuted split after repeated redraws");
      },
      opt.workers);

  std::vector<std::vector<double>> t_perm(zs.size());
  std::size_t discarded = 0, inner_failures = 0;
  for (auto& o : out) {
    if (!o.ok()) {
      discarded += kMaxAttempts;
      continue;
    }
    discarded += o.value->discarded;
    inner_failures += o.value->inner_failures;
    for (std::size_t k = 0; k < zs.size(); ++k) t_perm[k].push_back(o.value->t[k]);
  }
  const double draws = static_cast<double>(t_perm.front().size() + discarded);
  if (t_perm.front().empty() || static_cast<double>(discarded) > opt.max_failure_rate * draws) {
    throw InferenceError("permutation distribution unreliable: " + std::to_string(discarded) +
                         " of " + std::to_string(static_cast<std::size_t>(draws)) +
                         " draws discarded");
  }
  const double a_n = rate_factor(ds.n1(), ds.n2());
  std::vector<InferenceResult> res;
  for (std::size_t k = 0; k < zs.size(); ++k) {
    auto r = permutation_from_statistics(m_hat[k], boot.sigma[k], a_n, std::move(t_perm[k]),
                                         opt.alpha, opt.m0, true);
    r.replicates_requested = opt.B_perm;
    r.n_replicates_discarded = discarded;
    r.seed = opt.seed;
    r.z = zs[k];
    r.bootstrap_B = opt.B_boot;
    r.fit_failures = boot.failures + inner_failures;
    if (opt.mode == PermutationMode::identity) r.note = "identity-only stream";
    res.push_back(std::move(r));
  }
  return res;
}

}  // namespace curemst
