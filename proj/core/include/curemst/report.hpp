#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "curemst/cure_em.hpp"
#include "curemst/data.hpp"
#include "curemst/inference.hpp"
#include "curemst/inference_sp.hpp"
#include "curemst/km.hpp"
#include "curemst/monte_carlo.hpp"

namespace curemst {

inline constexpr int kSchemaVersion = 1;

nlohmann::ordered_json to_json(const SampleDiagnostics& d);
nlohmann::ordered_json to_json(const DatasetDiagnostics& d);
nlohmann::ordered_json to_json(const InferenceResult& r);
nlohmann::ordered_json to_json(const TwoSampleMstResult& r);
nlohmann::ordered_json to_json(const LogisticCoxFit& fit);
nlohmann::ordered_json to_json(const ConditionalMstResult& r);
nlohmann::ordered_json to_json(const SimulationReport& rep);

/// time,survival,at_risk,events,v_hat rows, preceded by the t = 0 row.
void write_km_csv(std::ostream& out, const KmFit& fit, const std::string& group,
                  bool header = true);
void write_simulation_csv(std::ostream& out, const SimulationReport& rep);
/// Fixed-width table: one row per cell, M1/M2 side by side.
void write_simulation_table(std::ostream& out, const SimulationReport& rep);

struct CurveSeries {
  std::string label;
  const KmFit* fit = nullptr;
};
/// Step-function overlay of survival curves (axes time/survival, legend).
std::string km_svg(const std::vector<CurveSeries>& curves, const std::string& title = "");

/// Shortest round-trip decimal form of a double.
std::string format_number(double v);

}  // namespace curemst
