#include "curemst/settings.hpp"

#include <cmath>

#include "curemst/errors.hpp"

namespace curemst {

double CovariateLaw::draw(Rng& rng) const {
  switch (kind) {
    case Kind::normal: return a + b * rng.normal();
    case Kind::bernoulli: return rng.bernoulli(a) ? 1.0 : 0.0;
    case Kind::uniform: return a + (b - a) * rng.uniform();
  }
  return 0.0;
}

double GroupSpec::true_mst(const std::vector<double>& z) const {
  double lin = 0.0;
  for (std::size_t i = 0; i < z.size() && i < beta.size(); ++i) lin += beta[i] * z[i];
  return true_mst_oracle(baseline, quantile, truncation, std::exp(lin));
}

double SettingSpec::true_m() const { return group1.true_mst() - group2.true_mst(); }

double SettingSpec::true_m_z(const std::vector<double>& z) const {
  return group1.true_mst(z) - group2.true_mst(z);
}

namespace {

GroupSpec part1_group(LatencyLaw law, double cure, double cens) {
  GroupSpec g;
  g.baseline = law;
  g.cure_rate = cure;
  g.censoring_rate = cens;
  return g;
}

SettingSpec part1(std::string id, std::string desc, GroupSpec g1, GroupSpec g2, double stated) {
  SettingSpec s;
  s.id = std::move(id);
  s.description = std::move(desc);
  s.group1 = std::move(g1);
  s.group2 = std::move(g2);
  s.stated_m = stated;
  return s;
}

GroupSpec ii1_sample1() {
  GroupSpec g;
  g.baseline = LatencyLaw::weibull(0.75, 1.5);
  g.gamma = {0.0, 0.5, 0.8};
  g.beta = {0.3, 0.5};
  g.covariates = {CovariateLaw::normal(0.0, 1.0), CovariateLaw::bernoulli(0.4)};
  g.censoring_rate = 0.4;
  return g;
}

std::vector<ZPoint> ii1_grid(bool exchangeable) {
  std::vector<ZPoint> grid = {{{0, 1}, 0.11},  {{-1, 0}, 0.5}, {{1, 0}, 0.0},  {{1, 1}, 0.0},
                              {{2, 1}, -0.07}, {{4, 0}, -0.3}, {{-4, 0}, 1.68}, {{-3, 1}, 0.83}};
  if (exchangeable) {
    for (auto& p : grid) p.stated_m = 0.0;
  }
  return grid;
}

std::vector<SettingSpec> build_catalog() {
  const auto w = LatencyLaw::weibull(0.75, 1.5);
  const auto g01 = LatencyLaw::gompertz(0.1, 1.0);
  const auto g05 = LatencyLaw::gompertz(0.5, 1.0);
  const auto g008 = LatencyLaw::gompertz(0.08, 1.0);
  std::vector<SettingSpec> c;
  c.push_back(part1("I.1", "exchangeable Weibull, cure 40%/40%", part1_group(w, 0.4, 0.3),
                    part1_group(w, 0.4, 0.3), 0.0));
  c.push_back(part1("I.2", "same Weibull, cure 20%/60%", part1_group(w, 0.2, 0.25),
                    part1_group(w, 0.6, 0.5), 0.0));
  c.push_back(part1("I.3", "same Weibull, cure 60%/20%", part1_group(w, 0.6, 0.3),
                    part1_group(w, 0.2, 0.1), 0.0));
  c.push_back(part1("I.4", "Weibull vs Gompertz with equal means",
                    part1_group(LatencyLaw::weibull(0.75, 1.0), 0.4, 0.2),
                    part1_group(LatencyLaw::gompertz(0.327, 1.0), 0.4, 0.15), 0.0));
  c.push_back(part1("I.5", "Gompertz 0.1 vs 0.5", part1_group(g01, 0.4, 0.3),
                    part1_group(g05, 0.4, 0.1), 1.09));
  c.push_back(part1("I.6", "Gompertz 0.5 vs 0.1 (I.5 swapped)", part1_group(g05, 0.4, 0.1),
                    part1_group(g01, 0.4, 0.3), -1.09));
  c.push_back(part1("I.7", "Gompertz 0.08 vs 0.1, cure 60%/20%", part1_group(g008, 0.6, 0.2),
                    part1_group(g01, 0.2, 0.15), 0.18));
  c.push_back(part1("I.8", "Gompertz 0.08 vs 0.1, cure 30%/20%", part1_group(g008, 0.3, 0.1),
                    part1_group(g01, 0.2, 0.1), 0.18));
  c.push_back(part1("I.9", "Gompertz 0.08 vs Weibull(2, 0.28)", part1_group(g008, 0.4, 0.1),
                    part1_group(LatencyLaw::weibull(2.0, 0.28), 0.4, 0.1), 0.52));

  {
    SettingSpec s;
    s.id = "II.1";
    s.description = "logistic-Cox, Weibull baselines, different covariate laws";
    s.group1 = ii1_sample1();
    s.group2 = ii1_sample1();
    s.group2.baseline = LatencyLaw::weibull(0.75, 2.0);
    s.group2.gamma = {0.1, 1.0, 0.6};
    s.group2.beta = {0.3 + std::log(0.75), 0.5};
    s.group2.covariates = {CovariateLaw::normal(1.0, 1.0), CovariateLaw::bernoulli(0.6)};
    s.group2.censoring_rate = 0.2;
    s.z_grid = ii1_grid(false);
    c.push_back(std::move(s));
  }
  {
    SettingSpec s;
    s.id = "II.2";
    s.description = "logistic-Cox, Gompertz baselines, common covariate laws";
    GroupSpec g;
    g.baseline = LatencyLaw::gompertz(0.1, 1.0);
    g.gamma = {0.8, -1.0, 1.0};
    g.beta = {-0.6, 0.5};
    g.covariates = {CovariateLaw::normal(0.0, 1.0), CovariateLaw::uniform(-1.0, 1.0)};
    g.censoring_rate = 0.1;
    s.group1 = g;
    g.baseline = LatencyLaw::gompertz(0.3, 1.0);
    g.beta = {-0.05, 0.4};
    g.censoring_rate = 0.2;
    s.group2 = g;
    s.z_grid = {{{-2, 0}, 0.0},     {{-1.85, 0.8}, 0.0}, {{-2.16, -0.8}, 0.0}, {{0, 0}, 0.79},
                {{1, 0.5}, 1.16},   {{-1, -0.5}, 0.43},  {{-3, 0.5}, -0.31},   {{-6, 0}, -0.82},
                {{2, 0}, 1.65},     {{-1.5, 0}, 0.18},   {{-2.5, 0}, -0.16}};
    c.push_back(std::move(s));
  }
  {
    SettingSpec s;
    s.id = "II.3";
    s.description = "exchangeable logistic-Cox samples (II.1 sample 1 twice)";
    s.group1 = ii1_sample1();
    s.group2 = ii1_sample1();
    s.z_grid = ii1_grid(true);
    c.push_back(std::move(s));
  }
  return c;
}

const std::vector<SettingSpec>& catalog() {
  static const std::vector<SettingSpec> c = build_catalog();
  return c;
}

}  // namespace

const std::vector<std::string>& setting_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v;
    for (const auto& s : catalog()) v.push_back(s.id);
    return v;
  }();
  return ids;
}

SettingSpec setting_by_id(const std::string& id) {
  for (const auto& s : catalog()) {
    if (s.id == id) return s;
  }
  throw ValidationError("unknown setting id: " + id);
}

namespace {

struct Subject {
  SurvivalRecord record;
  bool cured = false;
};

Subject draw_subject(const GroupSpec& g, double cap, Rng& rng) {
  Subject s;
  std::vector<double> cov;
  cov.reserve(g.covariates.size());
  for (const auto& law : g.covariates) cov.push_back(law.draw(rng));
  double mult = 1.0;
  if (g.gamma.empty()) {
    s.cured = rng.bernoulli(g.cure_rate);
  } else {
    double eta = g.gamma[0];
    for (std::size_t k = 0; k < cov.size(); ++k) eta += g.gamma[k + 1] * cov[k];
    s.cured = !rng.bernoulli(1.0 / (1.0 + std::exp(-eta)));
    double lin = 0.0;
    for (std::size_t k = 0; k < cov.size() && k < g.beta.size(); ++k) lin += g.beta[k] * cov[k];
    mult = std::exp(lin);
  }
  // Latency is drawn for cured subjects too so streams stay aligned.
  const double t = sample_truncated_latency(g.baseline, rng.uniform(), g.quantile, g.truncation, mult);
  const double c = std::min(rng.exponential(g.censoring_rate), cap);
  if (!s.cured && t <= c) {
    s.record.time = t;
    s.record.status = 1;
  } else {
    s.record.time = c;
    s.record.status = 0;
  }
  if (!g.gamma.empty()) {
    s.record.x = cov;
    s.record.z = std::move(cov);
  }
  return s;
}

}  // namespace

SurvivalSample sample_group(const GroupSpec& g, std::size_t n, Rng& rng, int label) {
  const double cap = g.tau0() + g.followup_gap;
  std::vector<SurvivalRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(draw_subject(g, cap, rng).record);
  return SurvivalSample(std::move(out), label);
}

TwoSampleDataset sample_setting(const SettingSpec& spec, std::size_t n1, std::size_t n2,
                                std::uint64_t seed) {
  Rng r1(substream_seed(seed, 1, 0, stream_tag::data));
  Rng r2(substream_seed(seed, 2, 0, stream_tag::data));
  TwoSampleDataset ds(sample_group(spec.group1, n1, r1, 1), sample_group(spec.group2, n2, r2, 2));
  return ds;
}

GroupCalibration calibrate_group(const GroupSpec& g, std::size_t n, std::uint64_t seed) {
  Rng rng(substream_seed(seed, 0, 0, stream_tag::data));
  const double cap = g.tau0() + g.followup_gap;
  std::size_t cured = 0, censored = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Subject s = draw_subject(g, cap, rng);
    cured += s.cured;
    censored += s.record.status == 0;
  }
  const double dn = static_cast<double>(n);
  return {static_cast<double>(cured) / dn, static_cast<double>(censored) / dn};
}

}  // namespace curemst
