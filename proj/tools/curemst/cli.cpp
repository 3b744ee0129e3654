#include "curemst/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"

#include "curemst/errors.hpp"
#include "curemst/inference.hpp"
#include "curemst/inference_sp.hpp"
#include "curemst/km.hpp"
#include "curemst/monte_carlo.hpp"
#include "curemst/mst.hpp"
#include "curemst/report.hpp"
#include "curemst/settings.hpp"
#include "curemst/stats.hpp"

namespace curemst::cli {

using nlohmann::ordered_json;

namespace {

ordered_json header(const std::string& command) {
  return {{"schema_version", kSchemaVersion}, {"command", command}};
}

std::uint64_t resolve_seed(const CliConfig& cfg, std::ostream& err) {
  if (cfg.seed) return *cfg.seed;
  std::random_device rd;
  const std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  err << "seed: " << s << " (pass --seed " << s << " to reproduce)\n";
  return s;
}

CsvSchema schema_of(const CliConfig& cfg) {
  CsvSchema s;
  s.time = cfg.time_col;
  s.status = cfg.status_col;
  if (!cfg.group_col.empty()) s.group = cfg.group_col;
  s.x_cols = cfg.x_cols;
  s.z_cols = cfg.z_cols;
  return s;
}

TwoSampleDataset load_two_sample(const CliConfig& cfg) {
  if (cfg.input.empty()) throw ValidationError("--input is required");
  if (cfg.group_col.empty()) throw ValidationError("--group-col is required for two-sample commands");
  return std::get<TwoSampleDataset>(parse_csv_file(cfg.input, schema_of(cfg)));
}

void print_json(std::ostream& out, const ordered_json& j) { out << j.dump(2) << "\n"; }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void text_inference(std::ostream& out, const std::string& label, const InferenceResult& r) {
  out << label << ": estimate " << fmt(r.estimate) << "  CI [" << fmt(r.ci_lower) << ", "
      << fmt(r.ci_upper) << "]  p(two-sided) " << fmt(r.p_two_sided) << "  p(>) "
      << fmt(r.p_greater) << "  p(<) " << fmt(r.p_less);
  if (r.method == InferenceMethod::permutation) {
    out << "  B " << r.n_replicates_used << " discarded " << r.n_replicates_discarded;
  }
  out << "\n";
}

void csv_inference_header(std::ostream& out) {
  out << "label,method,estimate,ci_lower,ci_upper,p_two_sided,p_greater,p_less,alpha\n";
}

void csv_inference(std::ostream& out, const std::string& label, const InferenceResult& r) {
  out << label << ',' << to_string(r.method) << ',' << format_number(r.estimate) << ','
      << format_number(r.ci_lower) << ',' << format_number(r.ci_upper) << ','
      << format_number(r.p_two_sided) << ',' << format_number(r.p_greater) << ','
      << format_number(r.p_less) << ',' << format_number(r.alpha) << '\n';
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write " + path);
  f << content;
}

std::vector<std::string> coefficient_names(const CliConfig& cfg) {
  std::vector<std::string> names{"(intercept)"};
  for (const auto& x : cfg.x_cols) names.push_back("gamma:" + x);
  for (const auto& z : cfg.z_cols) names.push_back("beta:" + z);
  return names;
}

ordered_json parameter_block(const LogisticCoxFit& fit, const Eigen::VectorXd& se,
                             const std::vector<std::string>& names) {
  auto rows = ordered_json::array();
  Eigen::VectorXd est(fit.gamma.size() + fit.beta.size());
  est << fit.gamma, fit.beta;
  for (Eigen::Index i = 0; i < est.size(); ++i) {
    ordered_json row = {{"name", names[static_cast<std::size_t>(i)]}, {"estimate", est[i]}};
    if (se.size() == est.size() && se[i] > 0.0) {
      row["se"] = se[i];
      row["p"] = 2.0 * normal_cdf(-std::abs(est[i] / se[i]));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

int run_compare_np(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto ds = load_two_sample(cfg);
  const auto diag = validate_dataset(ds, cfg.plateau_threshold);
  const auto f1 = fit_km(ds.sample1);
  const auto f2 = fit_km(ds.sample2);
  const auto est = two_sample_estimate(f1, f2);
  const auto asym = asymptotic_inference(est, cfg.alpha);

  std::optional<InferenceResult> cure;
  std::string cure_error;
  try {
    cure = cure_fraction_test(f1, f2, cfg.alpha);
  } catch (const InferenceError& e) {
    cure_error = e.what();
  }

  std::optional<InferenceResult> perm;
  const std::size_t B = cfg.permutations.value_or(500);
  std::uint64_t seed = 0;
  if (B > 0 || cfg.exhaustive) {
    PermutationOptions po;
    po.alpha = cfg.alpha;
    po.B = B;
    po.seed = cfg.exhaustive ? 0 : (seed = resolve_seed(cfg, err));
    po.workers = cfg.workers;
    po.mode = cfg.exhaustive ? PermutationMode::exhaustive : PermutationMode::random;
    perm = permutation_inference(ds, po);
  }

  if (cfg.format == Format::json) {
    auto j = header("compare-np");
    j["groups"] = {ds.name1, ds.name2};
    j["diagnostics"] = to_json(diag);
    j["estimate"] = to_json(est);
    j["cure_fractions"] = {f1.cure_fraction, f2.cure_fraction};
    j["cure_fraction_test"] = cure ? to_json(*cure) : ordered_json{{"error", cure_error}};
    j["asymptotic"] = to_json(asym);
    j["permutation"] = perm ? to_json(*perm) : ordered_json();
    print_json(out, j);
  } else if (cfg.format == Format::csv) {
    csv_inference_header(out);
    csv_inference(out, "mst_difference", asym);
    if (perm) csv_inference(out, "mst_difference", *perm);
    if (cure) csv_inference(out, "cure_fraction_difference", *cure);
  } else {
    for (const auto* d : {&diag.sample1, &diag.sample2}) {
      const bool first = d == &diag.sample1;
      out << "group " << (first ? ds.name1 : ds.name2) << ": n " << d->n << ", events " << d->events
          << ", censoring " << fmt(100.0 * d->censoring_rate) << "%, plateau "
          << fmt(100.0 * d->plateau_fraction) << "%" << (d->followup_warning ? " (short follow-up?)" : "")
          << "\n";
    }
    out << "MST_u: " << fmt(est.group1.value) << " vs " << fmt(est.group2.value) << ", m_hat "
        << fmt(est.m_hat) << ", sigma_hat " << fmt(est.sigma_hat) << "\n";
    out << "cure fractions: " << fmt(f1.cure_fraction) << " vs " << fmt(f2.cure_fraction) << "\n";
    if (cure) text_inference(out, "cure fraction test (Wald)", *cure);
    text_inference(out, "asymptotic", asym);
    if (perm) text_inference(out, "permutation", *perm);
  }
  for (const auto* d : {&diag.sample1, &diag.sample2}) {
    if (d->followup_warning) err << "warning: plateau below threshold; follow-up may be insufficient\n";
  }
  (void)seed;
  return ok;
}

int run_fit_cure(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.input.empty()) throw ValidationError("--input is required");
  const auto parsed = parse_csv_file(cfg.input, schema_of(cfg));
  std::vector<std::pair<std::string, const SurvivalSample*>> groups;
  if (const auto* ds = std::get_if<TwoSampleDataset>(&parsed)) {
    groups = {{ds->name1, &ds->sample1}, {ds->name2, &ds->sample2}};
  } else {
    groups = {{"all", &std::get<SurvivalSample>(parsed)}};
  }
  auto j = header("fit-cure");
  auto fits = ordered_json::array();
  const auto names = coefficient_names(cfg);
  for (const auto& [name, sample] : groups) {
    const auto fit = fit_logistic_cox(*sample);
    if (!fit.converged) err << "warning: EM for group " << name << " did not converge\n";
    auto fj = to_json(fit);
    fits.push_back({{"group", name}, {"parameters", parameter_block(fit, {}, names)}, {"fit", fj}});
    if (cfg.format == Format::text) {
      out << "group " << name << ": " << (fit.converged ? "converged" : "NOT converged") << " after "
          << fit.em_iterations << " iterations, loglik " << fmt(fit.loglik_path.back()) << "\n";
      Eigen::VectorXd est(fit.gamma.size() + fit.beta.size());
      est << fit.gamma, fit.beta;
      for (Eigen::Index i = 0; i < est.size(); ++i) {
        out << "  " << names[static_cast<std::size_t>(i)] << " " << fmt(est[i]) << "\n";
      }
    } else if (cfg.format == Format::csv) {
      if (&name == &groups.front().first) out << "group,time,cumhaz\n";
      for (std::size_t k = 0; k < fit.baseline.times.size(); ++k) {
        out << name << ',' << format_number(fit.baseline.times[k]) << ','
            << format_number(fit.baseline.cumhaz[k]) << '\n';
      }
    }
  }
  if (cfg.format == Format::json) {
    j["fits"] = std::move(fits);
    print_json(out, j);
  }
  return ok;
}

int run_compare_sp(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto ds = load_two_sample(cfg);
  if (cfg.z.empty()) throw ValidationError("--z is required (comma-separated latency covariates)");
  for (const auto& z : cfg.z) {
    if (z.size() != cfg.z_cols.size()) {
      throw ValidationError("--z has " + std::to_string(z.size()) + " values but " +
                            std::to_string(cfg.z_cols.size()) + " latency columns");
    }
  }
  validate_dataset(ds, cfg.plateau_threshold);
  SpOptions opt;
  opt.alpha = cfg.alpha;
  opt.B_boot = cfg.bootstrap;
  opt.B_perm = cfg.permutations.value_or(500);
  opt.workers = cfg.workers;
  const auto names = coefficient_names(cfg);

  auto j = header("compare-sp");
  j["groups"] = {ds.name1, ds.name2};
  if (opt.B_boot == 0) {
    err << "warning: --bootstrap 0: point estimates only, inference suppressed\n";
    const auto fits = fit_two_sample_cure(ds, opt.em);
    auto per_z = ordered_json::array();
    for (const auto& z : cfg.z) per_z.push_back({{"z", z}, {"m_z_hat", conditional_mst_difference(fits, z)}});
    j["parameters"] = {{ds.name1, parameter_block(fits.fit1, {}, names)},
                       {ds.name2, parameter_block(fits.fit2, {}, names)}};
    j["conditional_mst"] = std::move(per_z);
    if (cfg.format == Format::json) {
      print_json(out, j);
    } else {
      for (const auto& z : cfg.z) {
        out << "m_z" << ordered_json(z).dump() << " = " << fmt(conditional_mst_difference(fits, z)) << "\n";
      }
    }
    return ok;
  }

  opt.seed = resolve_seed(cfg, err);
  const auto an = analyze_conditional_mst(ds, cfg.z, opt);
  std::vector<InferenceResult> perm;
  if (opt.B_perm > 0) perm = permutation_inference_sp(ds, cfg.z, opt);

  if (cfg.format == Format::json) {
    j["parameters"] = {{ds.name1, parameter_block(an.fits.fit1, an.boot.coef_se1, names)},
                       {ds.name2, parameter_block(an.fits.fit2, an.boot.coef_se2, names)}};
    j["bootstrap"] = {{"B", opt.B_boot}, {"used", an.boot.used}, {"failures", an.boot.failures}, {"seed", opt.seed}};
    auto per_z = ordered_json::array();
    for (std::size_t k = 0; k < cfg.z.size(); ++k) {
      per_z.push_back({{"estimate", to_json(an.per_z[k].estimate)},
                       {"asymptotic", to_json(an.per_z[k].asymptotic)},
                       {"permutation", perm.empty() ? ordered_json() : to_json(perm[k])}});
    }
    j["conditional_mst"] = std::move(per_z);
    print_json(out, j);
  } else if (cfg.format == Format::csv) {
    csv_inference_header(out);
    for (std::size_t k = 0; k < cfg.z.size(); ++k) {
      const std::string label = "\"z=" + ordered_json(cfg.z[k]).dump() + "\"";
      csv_inference(out, label, an.per_z[k].asymptotic);
      if (!perm.empty()) csv_inference(out, label, perm[k]);
    }
  } else {
    for (int g = 0; g < 2; ++g) {
      const auto& fit = g == 0 ? an.fits.fit1 : an.fits.fit2;
      const auto& se = g == 0 ? an.boot.coef_se1 : an.boot.coef_se2;
      out << "group " << (g == 0 ? ds.name1 : ds.name2) << " (EM iterations " << fit.em_iterations << ")\n";
      const auto block = parameter_block(fit, se, names);
      for (const auto& row : block) {
        out << "  " << row["name"].get<std::string>() << "  " << fmt(row["estimate"].get<double>());
        if (row.contains("se")) {
          out << "  se " << fmt(row["se"].get<double>()) << "  p " << fmt(row["p"].get<double>());
        }
        out << "\n";
      }
    }
    for (std::size_t k = 0; k < cfg.z.size(); ++k) {
      out << "z = " << ordered_json(cfg.z[k]).dump() << ": m_z " << fmt(an.per_z[k].estimate.m_z_hat)
          << ", sigma_z " << fmt(an.per_z[k].estimate.sigma_z_hat) << "\n";
      text_inference(out, "  asymptotic", an.per_z[k].asymptotic);
      if (!perm.empty()) text_inference(out, "  permutation", perm[k]);
    }
  }
  return ok;
}

int run_simulate(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.setting.empty()) throw ValidationError("--setting is required");
  const auto spec = setting_by_id(cfg.setting);
  MonteCarloConfig mc;
  mc.n1 = cfg.n1;
  mc.n2 = cfg.n2;
  mc.reps = cfg.reps;
  mc.alpha = cfg.alpha;
  // Nested permutation-bootstrap is expensive; Part II settings default to
  // the asymptotic method unless --permutations is given.
  mc.B_perm = cfg.permutations.value_or(spec.semiparametric() ? 0 : 500);
  mc.permutation = mc.B_perm > 0;
  mc.B_boot = cfg.bootstrap;
  mc.seed = resolve_seed(cfg, err);
  mc.workers = cfg.workers;
  mc.z = cfg.z;
  const auto rep = monte_carlo_table(spec, mc);

  auto j = header("simulate");
  j["report"] = to_json(rep);
  std::ostringstream csv, table;
  write_simulation_csv(csv, rep);
  write_simulation_table(table, rep);
  if (!cfg.out.empty()) {
    write_file(cfg.out + ".json", j.dump(2) + "\n");
    write_file(cfg.out + ".csv", csv.str());
    write_file(cfg.out + ".txt", table.str());
  }
  if (cfg.format == Format::json) {
    print_json(out, j);
  } else if (cfg.format == Format::csv) {
    out << csv.str();
  } else {
    out << table.str();
  }
  return ok;
}

int run_curves(const CliConfig& cfg, std::ostream& out, std::ostream&) {
  const auto ds = load_two_sample(cfg);
  const auto f1 = fit_km(ds.sample1);
  const auto f2 = fit_km(ds.sample2);
  const std::string prefix = cfg.out.empty() ? "curves" : cfg.out;
  std::ostringstream csv;
  write_km_csv(csv, f1, ds.name1, true);
  write_km_csv(csv, f2, ds.name2, false);
  write_file(prefix + ".csv", csv.str());
  write_file(prefix + ".svg", km_svg({{ds.name1, &f1}, {ds.name2, &f2}}, "Kaplan-Meier estimates"));
  auto j = header("curves");
  j["files"] = {prefix + ".csv", prefix + ".svg"};
  j["cure_fractions"] = {{ds.name1, f1.cure_fraction}, {ds.name2, f2.cure_fraction}};
  if (cfg.format == Format::csv) {
    out << csv.str();
  } else if (cfg.format == Format::json) {
    print_json(out, j);
  } else {
    out << "wrote " << prefix << ".csv and " << prefix << ".svg\n";
  }
  return ok;
}

int dispatch(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ValidationError("--alpha must lie in (0,1)");
    if (cfg.subcommand == "compare-np") return run_compare_np(cfg, out, err);
    if (cfg.subcommand == "fit-cure") return run_fit_cure(cfg, out, err);
    if (cfg.subcommand == "compare-sp") return run_compare_sp(cfg, out, err);
    if (cfg.subcommand == "simulate") return run_simulate(cfg, out, err);
    if (cfg.subcommand == "curves") return run_curves(cfg, out, err);
    err << "error: unknown subcommand " << cfg.subcommand << "\n";
    return usage;
  } catch (const SchemaError& e) {
    err << "error: " << e.what() << "\n";
    return input_error;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return input_error;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return input_error;
  } catch (const EmError& e) {
    err << "error: EM failure: " << e.what() << "\n";
    return em_error;
  } catch (const EstimationError& e) {
    err << "error: " << e.what() << "\n";
    return inference_error;
  } catch (const InferenceError& e) {
    err << "error: " << e.what() << "\n";
    return inference_error;
  } catch (const std::bad_variant_access&) {
    err << "error: expected a two-group input (check --group-col)\n";
    return input_error;
  }
}

namespace {

std::vector<double> parse_z(const std::string& s) {
  std::vector<double> z;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      z.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw CLI::ValidationError("--z", "not a number: " + item);
    }
  }
  return z;
}

}  // namespace

int main_entry(int argc, char** argv) {
  CLI::App app{"curemst: mean survival time of the uncured, two-sample comparison"};
  app.require_subcommand(1);
  CliConfig cfg;
  std::uint64_t seed = 0;
  std::size_t perms = 0;
  std::vector<std::string> z_strings;
  std::string format = "json";
  if (const char* env = std::getenv("CUREMST_WORKERS")) cfg.workers = std::strtoul(env, nullptr, 10);

  auto common = [&](CLI::App* sub, bool randomized) {
    sub->add_option("--input", cfg.input, "CSV file with a header row");
    sub->add_option("--time-col", cfg.time_col, "time column")->capture_default_str();
    sub->add_option("--status-col", cfg.status_col, "status column (1 event, 0 censored)")->capture_default_str();
    sub->add_option("--group-col", cfg.group_col, "column with exactly two group values");
    sub->add_option("--alpha", cfg.alpha, "significance level")->capture_default_str();
    sub->add_option("--format", format, "output format")
        ->check(CLI::IsMember({"json", "csv", "text"}))
        ->capture_default_str();
    sub->add_option("--plateau-threshold", cfg.plateau_threshold, "follow-up warning threshold")
        ->capture_default_str();
    if (randomized) {
      sub->add_option("--seed", seed, "master seed (printed when omitted)");
      sub->add_option("--permutations", perms, "random permutations B");
      sub->add_option("--workers", cfg.workers, "worker threads (0: CUREMST_WORKERS or all cores)");
    }
  };

  auto* np = app.add_subcommand("compare-np", "Kaplan-Meier based comparison of MST_u");
  common(np, true);
  np->add_flag("--exhaustive", cfg.exhaustive, "enumerate every split instead of random draws");

  auto* fc = app.add_subcommand("fit-cure", "fit the logistic-Cox mixture cure model");
  common(fc, false);
  fc->add_option("--x-cols", cfg.x_cols, "incidence covariates")->delimiter(',');
  fc->add_option("--z-cols", cfg.z_cols, "latency covariates")->delimiter(',');

  auto* sp = app.add_subcommand("compare-sp", "covariate-conditional comparison of MST_u");
  common(sp, true);
  sp->add_option("--x-cols", cfg.x_cols, "incidence covariates")->delimiter(',');
  sp->add_option("--z-cols", cfg.z_cols, "latency covariates")->delimiter(',');
  sp->add_option("--z", z_strings, "covariate value, comma separated (repeatable)");
  sp->add_option("--bootstrap,--boot", cfg.bootstrap, "bootstrap replicates")->capture_default_str();

  auto* sim = app.add_subcommand("simulate", "Monte Carlo study of a built-in setting");
  common(sim, true);
  sim->add_option("--setting", cfg.setting, "setting id (I.1 .. I.9, II.1 .. II.3)");
  sim->add_option("--n1", cfg.n1)->capture_default_str();
  sim->add_option("--n2", cfg.n2)->capture_default_str();
  sim->add_option("--reps", cfg.reps)->capture_default_str();
  sim->add_option("--bootstrap,--boot", cfg.bootstrap, "bootstrap replicates (Part II)")->capture_default_str();
  sim->add_option("--z", z_strings, "covariate value for Part II (repeatable)");
  sim->add_option("--out", cfg.out, "write <out>.json, <out>.csv and <out>.txt");

  auto* cv = app.add_subcommand("curves", "Kaplan-Meier curves as CSV and SVG");
  common(cv, false);
  cv->add_option("--out", cfg.out, "output prefix")->capture_default_str();

  try {
    app.parse(argc, argv);
    for (const auto& s : z_strings) cfg.z.push_back(parse_z(s));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : input_error;
  }
  cfg.subcommand = app.get_subcommands().front()->get_name();
  const auto* active = app.get_subcommands().front();
  if (active->get_option_no_throw("--seed") && active->count("--seed")) cfg.seed = seed;
  if (active->get_option_no_throw("--permutations") && active->count("--permutations")) cfg.permutations = perms;
  cfg.format = format == "csv" ? Format::csv : format == "text" ? Format::text : Format::json;
  return dispatch(cfg, std::cout, std::cerr);
}

}  // namespace curemst::cli
