#include "curemst/monte_carlo.hpp"

#include <algorithm>
#include <sstream>

#include "curemst/errors.hpp"
#include "curemst/inference.hpp"
#include "curemst/inference_sp.hpp"
#include "curemst/km.hpp"
#include "curemst/mst.hpp"
#include "curemst/resampling.hpp"

namespace curemst {

namespace {

struct Tally {
  bool covered;
  double length;
  bool reject_greater;
  bool reject_two_sided;
};

Tally tally(const InferenceResult& r, double truth, double alpha) {
  return {r.ci_lower <= truth && truth <= r.ci_upper, r.ci_upper - r.ci_lower,
          r.p_greater <= alpha, r.p_two_sided <= alpha};
}

std::string z_label(const std::vector<double>& z) {
  std::ostringstream os;
  os << "z=(";
  for (std::size_t i = 0; i < z.size(); ++i) os << (i ? "," : "") << z[i];
  os << ")";
  return os.str();
}

}  // namespace

SimulationReport monte_carlo_table(const SettingSpec& spec, const MonteCarloConfig& cfg) {
  if (cfg.reps < 1) throw ValidationError("reps must be >= 1");
  const bool sp = spec.semiparametric();
  const bool use_perm = cfg.permutation && cfg.B_perm > 0;
  std::vector<std::vector<double>> zs = cfg.z;
  if (sp && zs.empty()) {
    for (const auto& p : spec.z_grid) zs.push_back(p.z);
  }

  SimulationReport rep;
  rep.setting = spec.id;
  rep.config = cfg;
  rep.config.z = zs;
  std::vector<std::string> methods;
  if (cfg.asymptotic) methods.push_back("M1");
  if (use_perm) methods.push_back("M2");
  const std::size_t n_cells = sp ? zs.size() : 1;
  for (const auto& m : methods) {
    for (std::size_t k = 0; k < n_cells; ++k) {
      CellSummary c;
      c.method = m;
      if (sp) {
        c.z = zs[k];
        c.cell = z_label(zs[k]);
        c.true_value = spec.true_m_z(zs[k]);
      } else {
        c.cell = "m";
        c.true_value = spec.true_m();
      }
      rep.cells.push_back(std::move(c));
    }
  }

  // One tally per cell, in rep.cells order.
  auto job = [&](std::size_t r) {
    const auto ds = sample_setting(spec, cfg.n1, cfg.n2, substream_seed(cfg.seed, r, 0, stream_tag::data));
    const std::uint64_t perm_seed = substream_seed(cfg.seed, r, 0, stream_tag::permutation);
    std::vector<Tally> out;
    if (!sp) {
      const auto est = two_sample_estimate(fit_km(ds.sample1), fit_km(ds.sample2));
      const double truth = rep.cells.front().true_value;
      if (cfg.asymptotic) out.push_back(tally(asymptotic_inference(est, cfg.alpha), truth, cfg.alpha));
      if (use_perm) {
        PermutationOptions po;
        po.alpha = cfg.alpha;
        po.B = cfg.B_perm;
        po.seed = perm_seed;
        po.workers = 1;
        out.push_back(tally(permutation_inference(ds, po), truth, cfg.alpha));
      }
      return out;
    }
    SpOptions so;
    so.alpha = cfg.alpha;
    so.B_boot = cfg.B_boot;
    so.B_perm = cfg.B_perm;
    so.seed = substream_seed(cfg.seed, r, 0, stream_tag::bootstrap);
    so.workers = 1;
    so.em = cfg.em;
    if (cfg.asymptotic) {
      const auto cmp = compare_conditional_mst(ds, zs, so);
      for (std::size_t k = 0; k < zs.size(); ++k) {
        out.push_back(tally(cmp[k].asymptotic, rep.cells[k].true_value, cfg.alpha));
      }
    }
    if (use_perm) {
      so.seed = perm_seed;
      const auto perm = permutation_inference_sp(ds, zs, so);
      const std::size_t off = cfg.asymptotic ? zs.size() : 0;
      for (std::size_t k = 0; k < zs.size(); ++k) {
        out.push_back(tally(perm[k], rep.cells[off + k].true_value, cfg.alpha));
      }
    }
    return out;
  };
  auto results = run_indexed<std::vector<Tally>>(cfg.reps, job, cfg.workers);

  for (const auto& o : results) {
    if (!o.ok()) {
      ++rep.failed_replicates;
      if (rep.failure_reasons.size() < 5 &&
          std::find(rep.failure_reasons.begin(), rep.failure_reasons.end(), o.error) ==
              rep.failure_reasons.end()) {
        rep.failure_reasons.push_back(o.error);
      }
      continue;
    }
    for (std::size_t c = 0; c < rep.cells.size(); ++c) {
      const Tally& t = (*o.value)[c];
      auto& cell = rep.cells[c];
      ++cell.tallied;
      cell.coverage_pct += t.covered;
      cell.mean_length += t.length;
      cell.reject_greater_pct += t.reject_greater;
      cell.reject_two_sided_pct += t.reject_two_sided;
    }
  }
  for (auto& cell : rep.cells) {
    cell.failed = rep.failed_replicates;
    if (cell.tallied == 0) continue;
    const double n = static_cast<double>(cell.tallied);
    cell.coverage_pct *= 100.0 / n;
    cell.mean_length /= n;
    cell.reject_greater_pct *= 100.0 / n;
    cell.reject_two_sided_pct *= 100.0 / n;
  }
  if (static_cast<double>(rep.failed_replicates) > cfg.max_failure_rate * static_cast<double>(cfg.reps)) {
    throw InferenceError("monte carlo: " + std::to_string(rep.failed_replicates) + " of " +
                         std::to_string(cfg.reps) + " replications failed" +
                         (rep.failure_reasons.empty() ? "" : " (" + rep.failure_reasons.front() + ")"));
  }
  return rep;
}

}  // namespace curemst
