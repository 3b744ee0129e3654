#include "curemst/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace curemst {

using nlohmann::ordered_json;

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

ordered_json number_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(); }

ordered_json vec(const Eigen::VectorXd& v) {
  auto a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

ordered_json to_json(const SampleDiagnostics& d) {
  return {{"n", d.n},
          {"events", d.events},
          {"censored", d.censored},
          {"censoring_rate", d.censoring_rate},
          {"last_event_time", d.last_event_time},
          {"plateau_size", d.plateau_size},
          {"plateau_fraction", d.plateau_fraction},
          {"followup_warning", d.followup_warning},
          {"constant_x", d.constant_x},
          {"constant_z", d.constant_z}};
}

ordered_json to_json(const DatasetDiagnostics& d) {
  return {{"plateau_threshold", d.plateau_threshold},
          {"sample1", to_json(d.sample1)},
          {"sample2", to_json(d.sample2)}};
}

ordered_json to_json(const InferenceResult& r) {
  ordered_json j = {{"method", to_string(r.method)},
                    {"estimate", r.estimate},
                    {"statistic", number_or_null(r.statistic)},
                    {"ci", {r.ci_lower, r.ci_upper}},
                    {"p_two_sided", r.p_two_sided},
                    {"p_greater", r.p_greater},
                    {"p_less", r.p_less},
                    {"alpha", r.alpha},
                    {"null_value", r.null_value}};
  if (r.method == InferenceMethod::permutation) {
    j["B"] = r.replicates_requested;
    j["used"] = r.n_replicates_used;
    j["discarded"] = r.n_replicates_discarded;
    j["seed"] = r.seed;
    j["exhaustive"] = r.exhaustive;
  }
  if (!r.z.empty() || r.bootstrap_B > 0) {
    j["z"] = r.z;
    j["B_boot"] = r.bootstrap_B;
    j["fit_failures"] = r.fit_failures;
  }
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

ordered_json to_json(const TwoSampleMstResult& r) {
  return {{"mst1", r.group1.value},     {"mst2", r.group2.value},
          {"var1", r.group1.variance},  {"var2", r.group2.variance},
          {"n1", r.group1.n},           {"n2", r.group2.n},
          {"m_hat", r.m_hat},           {"sigma_hat", r.sigma_hat},
          {"a_n", r.a_n},               {"t_stat", r.t_stat}};
}

ordered_json to_json(const LogisticCoxFit& fit) {
  auto baseline = ordered_json::array();
  for (std::size_t k = 0; k < fit.baseline.times.size(); ++k) {
    baseline.push_back({{"time", fit.baseline.times[k]}, {"cumhaz", fit.baseline.cumhaz[k]}});
  }
  return {{"gamma", vec(fit.gamma)},
          {"beta", vec(fit.beta)},
          {"baseline", std::move(baseline)},
          {"last_event_time", fit.last_event_time},
          {"converged", fit.converged},
          {"iterations", fit.em_iterations},
          {"loglik", fit.loglik_path.empty() ? ordered_json() : ordered_json(fit.loglik_path.back())},
          {"init", "logistic(status ~ x), Cox(w = 1)"},
          {"stopping", "max abs change of (gamma, beta, cumulative hazard) < tol"}};
}

ordered_json to_json(const ConditionalMstResult& r) {
  return {{"z", r.z},
          {"mst1", r.mst1},
          {"mst2", r.mst2},
          {"m_z_hat", r.m_z_hat},
          {"sigma_z_hat", r.sigma_z_hat},
          {"a_n", r.a_n},
          {"t_stat", r.t_stat},
          {"B_boot", r.bootstrap_B},
          {"fit_failures", r.fit_failures}};
}

ordered_json to_json(const SimulationReport& rep) {
  const auto& c = rep.config;
  auto cells = ordered_json::array();
  for (const auto& cell : rep.cells) {
    cells.push_back({{"method", cell.method},
                     {"cell", cell.cell},
                     {"z", cell.z},
                     {"true_value", cell.true_value},
                     {"tallied", cell.tallied},
                     {"coverage_pct", cell.coverage_pct},
                     {"mean_length", cell.mean_length},
                     {"reject_greater_pct", cell.reject_greater_pct},
                     {"reject_two_sided_pct", cell.reject_two_sided_pct}});
  }
  return {{"setting", rep.setting},
          {"n1", c.n1},
          {"n2", c.n2},
          {"reps", c.reps},
          {"alpha", c.alpha},
          {"B_perm", c.permutation ? c.B_perm : 0},
          {"B_boot", c.B_boot},
          {"seed", c.seed},
          {"failed_replicates", rep.failed_replicates},
          {"failure_reasons", rep.failure_reasons},
          {"cells", std::move(cells)}};
}

void write_km_csv(std::ostream& out, const KmFit& fit, const std::string& group, bool header) {
  if (header) out << "group,time,survival,at_risk,events,v_hat\n";
  out << group << ",0,1," << fit.n << ",0,0\n";
  for (std::size_t k = 0; k < fit.steps(); ++k) {
    out << group << ',' << format_number(fit.event_times[k]) << ','
        << format_number(fit.survival[k]) << ',' << fit.at_risk[k] << ',' << fit.events[k] << ','
        << format_number(fit.v_hat[k]) << '\n';
  }
}

void write_simulation_csv(std::ostream& out, const SimulationReport& rep) {
  out << "setting,method,cell,true_value,tallied,coverage_pct,mean_length,reject_greater_pct,"
         "reject_two_sided_pct\n";
  for (const auto& c : rep.cells) {
    out << rep.setting << ',' << c.method << ",\"" << c.cell << "\"," << format_number(c.true_value)
        << ',' << c.tallied << ',' << format_number(c.coverage_pct) << ','
        << format_number(c.mean_length) << ',' << format_number(c.reject_greater_pct) << ','
        << format_number(c.reject_two_sided_pct) << '\n';
  }
}

void write_simulation_table(std::ostream& out, const SimulationReport& rep) {
  const auto& c = rep.config;
  out << "Setting " << rep.setting << "  n1=" << c.n1 << " n2=" << c.n2 << "  reps=" << c.reps
      << "  alpha=" << c.alpha << "  seed=" << c.seed << "\n";
  out << std::left << std::setw(22) << "cell" << std::setw(8) << "method" << std::right
      << std::setw(10) << "true" << std::setw(8) << "CP%" << std::setw(9) << "L" << std::setw(10)
      << "rej>0 %" << std::setw(10) << "rej!=0 %" << "\n";
  out << std::fixed;
  for (const auto& cell : rep.cells) {
    out << std::left << std::setw(22) << cell.cell << std::setw(8) << cell.method << std::right
        << std::setprecision(3) << std::setw(10) << cell.true_value << std::setprecision(1)
        << std::setw(8) << cell.coverage_pct << std::setprecision(3) << std::setw(9)
        << cell.mean_length << std::setprecision(1) << std::setw(10) << cell.reject_greater_pct
        << std::setw(10) << cell.reject_two_sided_pct << "\n";
  }
  out.unsetf(std::ios::floatfield);
  out << "failed replications: " << rep.failed_replicates << "\n";
}

std::string km_svg(const std::vector<CurveSeries>& curves, const std::string& title) {
  constexpr double W = 640, H = 420, L = 60, R = 150, T = 40, B = 50;
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  double tmax = 0.0;
  for (const auto& c : curves) {
    if (c.fit && c.fit->steps()) tmax = std::max(tmax, c.fit->event_times.back());
  }
  tmax = tmax > 0.0 ? tmax * 1.05 : 1.0;
  auto px = [&](double t) { return L + (W - L - R) * t / tmax; };
  auto py = [&](double s) { return T + (H - T - B) * (1.0 - s); };
  auto f = [](double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << v;
    return os.str();
  };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) os << "<text x=\"" << L << "\" y=\"24\" font-size=\"14\">" << title << "</text>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << py(0) << "\" x2=\"" << W - R << "\" y2=\"" << py(0)
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << py(0) << "\" x2=\"" << L << "\" y2=\"" << py(1)
     << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double s = i / 5.0;
    const double t = tmax * i / 5.0;
    os << "<text x=\"" << L - 8 << "\" y=\"" << f(py(s) + 4) << "\" text-anchor=\"end\">" << f(s)
       << "</text>\n";
    os << "<text x=\"" << f(px(t)) << "\" y=\"" << py(0) + 18 << "\" text-anchor=\"middle\">"
       << f(t) << "</text>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">time</text>\n";
  os << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" transform=\"rotate(-90 16 " << (T + H - B) / 2
     << ")\" text-anchor=\"middle\">survival</text>\n";
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto* fit = curves[i].fit;
    if (!fit) continue;
    const char* col = colors[i % 4];
    os << "<path fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" d=\"M" << f(px(0)) << ' '
       << f(py(1));
    double s = 1.0;
    for (std::size_t k = 0; k < fit->steps(); ++k) {
      const double x = px(fit->event_times[k]);
      os << " L" << f(x) << ' ' << f(py(s));
      s = fit->survival[k];
      os << " L" << f(x) << ' ' << f(py(s));
    }
    os << " L" << f(px(tmax)) << ' ' << f(py(s)) << "\"/>\n";
    const double ly = T + 20.0 * static_cast<double>(i + 1);
    os << "<line x1=\"" << W - R + 15 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 40 << "\" y2=\""
       << ly << "\" stroke=\"" << col << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << W - R + 46 << "\" y=\"" << ly + 4 << "\">" << curves[i].label << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace curemst
