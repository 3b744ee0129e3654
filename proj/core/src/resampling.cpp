#include "curemst/resampling.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>

namespace curemst {

namespace {

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index, std::uint64_t attempt,
                             std::uint64_t tag) {
  constexpr std::uint64_t golden = 0x9e3779b97f4a7c15ULL;
  std::uint64_t h = mix64(master + golden);
  h = mix64(h ^ (tag + golden * 2));
  h = mix64(h ^ (index + golden * 3));
  h = mix64(h ^ (attempt + golden * 4));
  return h;
}

std::size_t Rng::index(std::size_t n) {
  if (n <= 1) return 0;
  const std::uint64_t range = n;
  // Reject the top partial block so every residue is equally likely.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<std::size_t>(x % range);
}

double Rng::normal() {
  if (spare_) {
    double s = *spare_;
    spare_.reset();
    return s;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  return u * f;
}

std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = rng.index(i);
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

PermutedSplit split_by_order(std::span<const SurvivalRecord> pooled,
                             std::span<const std::size_t> order, std::size_t n1) {
  std::vector<SurvivalRecord> a, b;
  a.reserve(n1);
  b.reserve(order.size() - n1);
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n1 ? a : b).push_back(pooled[order[i]]);
  }
  return {SurvivalSample(std::move(a), 1), SurvivalSample(std::move(b), 2)};
}

PermutedSplit permute_split(std::span<const SurvivalRecord> pooled, std::size_t n1, Rng& rng) {
  if (n1 == 0 || n1 >= pooled.size()) {
    throw InferenceError("permute_split: n1 must satisfy 0 < n1 < pooled size");
  }
  auto order = random_permutation(pooled.size(), rng);
  return split_by_order(pooled, order, n1);
}

std::size_t split_count(std::size_t n, std::size_t n1) {
  if (n1 > n) return 0;
  n1 = std::min(n1, n - n1);
  long double c = 1.0L;
  for (std::size_t i = 1; i <= n1; ++i) {
    c = c * static_cast<long double>(n - n1 + i) / static_cast<long double>(i);
    if (c > static_cast<long double>(std::numeric_limits<std::size_t>::max() / 2)) {
      return std::numeric_limits<std::size_t>::max();
    }
  }
  return static_cast<std::size_t>(std::llround(c));
}

std::vector<std::vector<std::size_t>> enumerate_splits(std::size_t n, std::size_t n1,
                                                       std::size_t cap) {
  if (n1 == 0 || n1 >= n) throw InferenceError("enumerate_splits: need 0 < n1 < n");
  const std::size_t total = split_count(n, n1);
  if (total > cap) {
    throw InferenceError("exhaustive enumeration: " + std::to_string(total) +
                         " splits exceed cap " + std::to_string(cap));
  }
  std::vector<std::vector<std::size_t>> out;
  out.reserve(total);
  std::vector<std::size_t> c(n1);
  std::iota(c.begin(), c.end(), std::size_t{0});
  while (true) {
    out.push_back(c);
    std::size_t i = n1;
    while (i > 0 && c[i - 1] == n - n1 + i - 1) --i;
    if (i == 0) break;
    ++c[i - 1];
    for (std::size_t j = i; j < n1; ++j) c[j] = c[j - 1] + 1;
  }
  return out;
}

SurvivalSample bootstrap_sample(const SurvivalSample& sample, Rng& rng) {
  const std::size_t n = sample.size();
  std::vector<SurvivalRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample[rng.index(n)]);
  return SurvivalSample(std::move(out), sample.label());
}

TwoSampleDataset bootstrap_dataset(const TwoSampleDataset& ds, Rng& rng) {
  // One stream per group label, so relabelling the samples permutes the draws with them.
  const std::uint64_t base = rng.bits();
  const bool distinct = ds.sample1.label() != ds.sample2.label();
  const auto key1 = static_cast<std::uint64_t>(distinct ? ds.sample1.label() : 1);
  const auto key2 = static_cast<std::uint64_t>(distinct ? ds.sample2.label() : 2);
  Rng r1(substream_seed(base, key1, 0, stream_tag::bootstrap));
  Rng r2(substream_seed(base, key2, 0, stream_tag::bootstrap));
  TwoSampleDataset out(bootstrap_sample(ds.sample1, r1), bootstrap_sample(ds.sample2, r2));
  out.name1 = ds.name1;
  out.name2 = ds.name2;
  return out;
}

std::size_t default_workers() {
  if (const char* env = std::getenv("CUREMST_WORKERS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

}  // namespace curemst
