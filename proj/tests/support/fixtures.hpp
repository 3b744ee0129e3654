#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <utility>
#include <vector>

#include "curemst/data.hpp"
#include "curemst/resampling.hpp"
#include "oracles.hpp"

namespace fx {

inline curemst::SurvivalSample sample(std::initializer_list<std::pair<double, int>> rows, int label = 1) {
  std::vector<curemst::SurvivalRecord> recs;
  for (auto [t, s] : rows) recs.push_back({t, s, {}, {}});
  return curemst::SurvivalSample(std::move(recs), label);
}

// The four-record hand example used throughout: events at 1 and 2, two
// censored in the plateau.
inline curemst::SurvivalSample D() { return sample({{1, 1}, {2, 1}, {3, 0}, {4, 0}}); }

inline std::vector<oracle::Obs> obs(const curemst::SurvivalSample& s) {
  std::vector<oracle::Obs> o;
  for (const auto& r : s.records()) o.push_back({r.time, r.status});
  return o;
}

// Cure-type data: exponential latency, a cured fraction, uniform censoring.
inline curemst::SurvivalSample random_cure_sample(std::size_t n, std::uint64_t seed, double cure = 0.3,
                                                  bool ties = false) {
  curemst::Rng rng(seed);
  std::vector<curemst::SurvivalRecord> recs;
  for (std::size_t i = 0; i < n; ++i) {
    const bool cured = rng.bernoulli(cure);
    double t = cured ? 1e9 : rng.exponential(1.0);
    double c = 4.0 * rng.uniform();
    if (ties) {
      t = std::ceil(t * 4) / 4;
      c = std::ceil(c * 4) / 4;
    }
    recs.push_back({std::min(t, c), t <= c ? 1 : 0, {}, {}});
  }
  return curemst::SurvivalSample(std::move(recs));
}

}  // namespace fx
