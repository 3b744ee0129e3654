#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "curemst/data.hpp"
#include "curemst/errors.hpp"

namespace curemst {

/// Seed of substream (index, attempt) under `tag`, a keyed 64-bit mix.
/// Depends on nothing but its arguments, so replicate r draws the same
/// numbers whatever order or thread it runs on.
std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index,
                             std::uint64_t attempt = 0, std::uint64_t tag = 0);

/// Tags keep the streams of different consumers of one master seed apart.
namespace stream_tag {
inline constexpr std::uint64_t permutation = 0x7065726d;  // "perm"
inline constexpr std::uint64_t bootstrap = 0x626f6f74;    // "boot"
inline constexpr std::uint64_t data = 0x64617461;         // "data"
inline constexpr std::uint64_t replicate = 0x7265706c;    // "repl"
}  // namespace stream_tag

/// mt19937_64 with hand-rolled variate transforms, so draws do not depend on
/// the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }
  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }
  /// Unbiased integer in [0, n).
  std::size_t index(std::size_t n);
  double exponential(double rate) { return -std::log(uniform()) / rate; }
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

enum class Scheme { permutation, bootstrap_stratified };

struct ReplicateStream {
  std::uint64_t master_seed = 0;
  std::size_t replicate_count = 0;
  Scheme scheme = Scheme::permutation;
};

struct PermutedSplit {
  SurvivalSample group1;
  SurvivalSample group2;
};

/// Uniform random permutation of 0..n-1 (Fisher-Yates).
std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng);
/// First n1 permuted records form group 1, the rest group 2.
PermutedSplit split_by_order(std::span<const SurvivalRecord> pooled,
                             std::span<const std::size_t> order, std::size_t n1);
PermutedSplit permute_split(std::span<const SurvivalRecord> pooled, std::size_t n1, Rng& rng);

/// All C(n, n1) subsets of {0..n-1} of size n1 in lexicographic order (the
/// first is the identity split). Throws InferenceError above `cap`.
std::vector<std::vector<std::size_t>> enumerate_splits(std::size_t n, std::size_t n1,
                                                       std::size_t cap = 200000);
/// Number of subsets, saturating at SIZE_MAX.
std::size_t split_count(std::size_t n, std::size_t n1);

SurvivalSample bootstrap_sample(const SurvivalSample& sample, Rng& rng);
/// Resamples each group within itself, keeping both sizes. Each group draws
/// from its own substream keyed by its label.
TwoSampleDataset bootstrap_dataset(const TwoSampleDataset& ds, Rng& rng);

/// Worker count from CUREMST_WORKERS, else hardware concurrency (>= 1).
std::size_t default_workers();

template <typename T>
struct ReplicateOutcome {
  std::optional<T> value;
  std::string error;  // empty on success
  bool ok() const noexcept { return value.has_value(); }
};

/// Runs job(r) for r = 0..count-1 on up to `workers` threads and returns
/// the outcomes in index order. Exceptions are captured per replicate.
/// workers == 0 means default_workers().
template <typename T, typename Job>
std::vector<ReplicateOutcome<T>> run_indexed(std::size_t count, Job&& job, std::size_t workers = 0) {
  std::vector<ReplicateOutcome<T>> out(count);
  if (count == 0) return out;
  if (workers == 0) workers = default_workers();
  workers = std::min(workers, count);
  auto one = [&](std::size_t r) {
    try {
      out[r].value.emplace(job(r));
    } catch (const std::exception& e) {
      out[r].error = e.what();
    } catch (...) {
      out[r].error = "unknown failure";
    }
  };
  if (workers <= 1) {
    for (std::size_t r = 0; r < count; ++r) one(r);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t r = next.fetch_add(1); r < count; r = next.fetch_add(1)) one(r);
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

/// output[r] = job(r, Rng(substream_seed(master, r, 0, tag))).
template <typename T, typename Job>
std::vector<ReplicateOutcome<T>> run_replicates(const ReplicateStream& stream, Job&& job,
                                                std::size_t workers = 0) {
  const std::uint64_t tag = stream.scheme == Scheme::permutation ? stream_tag::permutation
                                                                 : stream_tag::bootstrap;
  return run_indexed<T>(
      stream.replicate_count,
      [&](std::size_t r) {
        Rng rng(substream_seed(stream.master_seed, r, 0, tag));
        return job(r, rng);
      },
      workers);
}

}  // namespace curemst
