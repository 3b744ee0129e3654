#include "curemst/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "curemst/errors.hpp"
#include "curemst/resampling.hpp"
#include "curemst/stats.hpp"

namespace curemst {

const char* to_string(InferenceMethod m) {
  switch (m) {
    case InferenceMethod::asymptotic: return "asymptotic";
    case InferenceMethod::permutation: return "permutation";
    case InferenceMethod::cure_fraction_wald: return "cure_fraction_wald";
  }
  return "unknown";
}

InferenceResult normal_inference(double estimate, double sigma, double a_n, double alpha,
                                 double m0) {
  if (!(sigma > 0.0)) throw InferenceError("degenerate studentization: sigma = 0");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InferenceError("alpha must lie in (0,1)");
  InferenceResult r;
  r.method = InferenceMethod::asymptotic;
  r.estimate = estimate;
  r.alpha = alpha;
  r.null_value = m0;
  const double half = normal_quantile(1.0 - alpha / 2.0) * sigma / a_n;
  r.ci_lower = estimate - half;
  r.ci_upper = estimate + half;
  const double t = a_n * (estimate - m0) / sigma;
  r.statistic = t;
  r.p_two_sided = std::min(1.0, 2.0 * normal_cdf(-std::abs(t)));
  r.p_greater = normal_cdf(-t);
  r.p_less = normal_cdf(t);
  return r;
}

InferenceResult asymptotic_inference(const TwoSampleMstResult& res, double alpha, double m0) {
  return normal_inference(res.m_hat, res.sigma_hat, res.a_n, alpha, m0);
}

InferenceResult permutation_from_statistics(double m_hat, double sigma_hat, double a_n,
                                            std::vector<double> t_perm, double alpha, double m0,
                                            bool smoothing) {
  if (!(sigma_hat > 0.0)) throw InferenceError("degenerate studentization: sigma = 0");
  if (t_perm.empty()) throw InferenceError("no usable permutation replicates");
  InferenceResult r;
  r.method = InferenceMethod::permutation;
  r.estimate = m_hat;
  r.alpha = alpha;
  r.null_value = m0;
  const double t0 = (m_hat - m0) / sigma_hat;
  r.statistic = a_n * t0;
  // Relative slack so that a replicate reproducing the observed split counts.
  const double slack = 1e-12 * std::abs(t0);
  std::size_t c_abs = 0, c_ge = 0, c_le = 0;
  for (double t : t_perm) {
    if (std::abs(t) >= std::abs(t0) - slack) ++c_abs;
    if (t >= t0 - slack) ++c_ge;
    if (t <= t0 + slack) ++c_le;
  }
  const double B = static_cast<double>(t_perm.size());
  auto pv = [&](std::size_t c) {
    return smoothing ? (1.0 + static_cast<double>(c)) / (B + 1.0) : static_cast<double>(c) / B;
  };
  r.p_two_sided = pv(c_abs);
  r.p_greater = pv(c_ge);
  r.p_less = pv(c_le);
  std::sort(t_perm.begin(), t_perm.end());
  r.ci_lower = m_hat - empirical_quantile(t_perm, 1.0 - alpha / 2.0) * sigma_hat;
  r.ci_upper = m_hat - empirical_quantile(t_perm, alpha / 2.0) * sigma_hat;
  r.n_replicates_used = t_perm.size();
  return r;
}

namespace {

// Pooled (time, status) sorted once; each split is a membership mask over
// the sorted positions, so per-replicate KM fits need no sorting.
class SplitStatistic {
 public:
  explicit SplitStatistic(const TwoSampleDataset& ds) : n1_(ds.n1()), n2_(ds.n2()) {
    const auto pooled = ds.pooled();
    const std::size_t N = pooled.size();
    std::vector<std::size_t> idx(N);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return pooled[a].time < pooled[b].time; });
    sorted_.resize(N);
    pos_.resize(N);
    for (std::size_t k = 0; k < N; ++k) {
      sorted_[k] = {pooled[idx[k]].time, pooled[idx[k]].status};
      pos_[idx[k]] = k;
    }
  }

  std::size_t n() const { return sorted_.size(); }
  std::size_t n1() const { return n1_; }

  // T = m / sigma for the split whose group 1 holds the given pooled indices;
  // nullopt when the split must be discarded.
  std::optional<double> statistic(std::span<const std::size_t> group1) const {
    std::vector<char> in1(sorted_.size(), 0);
    for (std::size_t i : group1) in1[pos_[i]] = 1;
    std::vector<TimeStatus> a, b;
    a.reserve(n1_);
    b.reserve(n2_);
    for (std::size_t k = 0; k < sorted_.size(); ++k) (in1[k] ? a : b).push_back(sorted_[k]);
    try {
      const auto res = two_sample_estimate(fit_km_sorted(a), fit_km_sorted(b));
      if (!std::isfinite(res.m_hat) || !(res.sigma_hat > 0.0)) return std::nullopt;
      return res.m_hat / res.sigma_hat;
    } catch (const EstimationError&) {
      return std::nullopt;
    }
  }

 private:
  std::size_t n1_, n2_;
  std::vector<TimeStatus> sorted_;
  std::vector<std::size_t> pos_;  // pooled index -> sorted position
};

constexpr std::size_t kMaxAttempts = 64;

}  // namespace

PermutationDistribution permutation_distribution(const TwoSampleDataset& ds,
                                                 const PermutationOptions& opt) {
  if (ds.n1() == 0 || ds.n2() == 0) throw InferenceError("both samples must be nonempty");
  const SplitStatistic stat(ds);
  PermutationDistribution dist;
  const std::size_t N = stat.n();
  const std::size_t n1 = stat.n1();

  if (opt.mode == PermutationMode::exhaustive) {
    const auto splits = enumerate_splits(N, n1, opt.exhaustive_cap);
    auto out = run_indexed<std::optional<double>>(
        splits.size(), [&](std::size_t r) { return stat.statistic(splits[r]); }, opt.workers);
    for (auto& o : out) {
      if (o.ok() && *o.value) {
        dist.t_perm.push_back(**o.value);
      } else {
        ++dist.discarded;
      }
    }
    return dist;
  }

  struct Draw {
    double t;
    std::size_t discarded;
  };
  std::vector<std::size_t> identity(n1);
  std::iota(identity.begin(), identity.end(), std::size_t{0});
  auto out = run_indexed<Draw>(
      opt.B,
      [&](std::size_t r) -> Draw {
        for (std::size_t attempt = 0; attempt < kMaxAttempts; ++attempt) {
          std::optional<double> t;
          if (opt.mode == PermutationMode::identity) {
            t = stat.statistic(identity);
          } else {
            Rng rng(substream_seed(opt.seed, r, attempt, stream_tag::permutation));
            const auto order = random_permutation(N, rng);
            t = stat.statistic(std::span<const std::size_t>(order).first(n1));
          }
          if (t) return {*t, attempt};
          if (opt.mode == PermutationMode::identity) break;
        }
        throw InferenceError("no usable split after repeated redraws");
      },
      opt.workers);
  for (auto& o : out) {
    if (o.ok()) {
      dist.t_perm.push_back(o.value->t);
      dist.discarded += o.value->discarded;
    } else {
      dist.discarded += kMaxAttempts;
    }
  }
  return dist;
}

InferenceResult permutation_inference(const TwoSampleDataset& ds, const PermutationOptions& opt) {
  if (opt.mode != PermutationMode::exhaustive && opt.B == 0) {
    throw InferenceError("permutation inference needs B >= 1");
  }
  const auto observed = two_sample_estimate(fit_km(ds.sample1), fit_km(ds.sample2));
  auto dist = permutation_distribution(ds, opt);
  const double draws = static_cast<double>(dist.t_perm.size() + dist.discarded);
  if (dist.t_perm.empty() || static_cast<double>(dist.discarded) > opt.max_discard_rate * draws) {
    throw InferenceError("permutation distribution unreliable: " + std::to_string(dist.discarded) +
                         " of " + std::to_string(static_cast<std::size_t>(draws)) +
                         " draws discarded");
  }
  const bool exhaustive = opt.mode == PermutationMode::exhaustive;
  auto r = permutation_from_statistics(observed.m_hat, observed.sigma_hat, observed.a_n,
                                       std::move(dist.t_perm), opt.alpha, opt.m0, !exhaustive);
  r.replicates_requested = exhaustive ? split_count(ds.n1() + ds.n2(), ds.n1()) : opt.B;
  r.n_replicates_discarded = dist.discarded;
  r.seed = opt.seed;
  r.exhaustive = exhaustive;
  if (opt.mode == PermutationMode::identity) r.note = "identity-only stream";
  return r;
}

InferenceResult cure_fraction_test(const KmFit& f1, const KmFit& f2, double alpha) {
  const double p1 = f1.cure_fraction;
  const double p2 = f2.cure_fraction;
  const double var = p1 * p1 * f1.v_hat.back() / static_cast<double>(f1.n) +
                     p2 * p2 * f2.v_hat.back() / static_cast<double>(f2.n);
  if (!(var > 0.0)) throw InferenceError("cure fraction test: both variances are 0");
  const double se = std::sqrt(var);
  auto r = normal_inference(p1 - p2, se, 1.0, alpha, 0.0);
  r.method = InferenceMethod::cure_fraction_wald;
  r.note = "Wald approximation to Klein's test";
  return r;
}

}  // namespace curemst
