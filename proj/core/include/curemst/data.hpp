#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace curemst {

/// One right-censored observation. `x` holds incidence covariates (no
/// intercept), `z` latency covariates; both may be empty.
struct SurvivalRecord {
  double time = 0.0;
  int status = 0;  // 1 = event observed, 0 = censored
  std::vector<double> x;
  std::vector<double> z;

  friend bool operator==(const SurvivalRecord&, const SurvivalRecord&) = default;
};

/// Records of one group. Construction enforces the per-record invariants
/// (finite nonnegative time, status in {0,1}, common covariate dimensions).
/// Having at least one event is checked by the estimators, not here, so that
/// resampled groups without events can be represented and rejected later.
class SurvivalSample {
 public:
  SurvivalSample() = default;
  explicit SurvivalSample(std::vector<SurvivalRecord> records, int label = 1);

  std::span<const SurvivalRecord> records() const noexcept { return records_; }
  const SurvivalRecord& operator[](std::size_t i) const { return records_[i]; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  int label() const noexcept { return label_; }
  std::size_t x_dim() const noexcept { return x_dim_; }
  std::size_t z_dim() const noexcept { return z_dim_; }
  std::size_t event_count() const noexcept;

  /// Same records with every time multiplied by `factor` (> 0).
  SurvivalSample scaled(double factor) const;

 private:
  std::vector<SurvivalRecord> records_;
  int label_ = 1;
  std::size_t x_dim_ = 0;
  std::size_t z_dim_ = 0;
};

struct TwoSampleDataset {
  TwoSampleDataset() = default;
  TwoSampleDataset(SurvivalSample s1, SurvivalSample s2);

  SurvivalSample sample1;
  SurvivalSample sample2;
  /// Optional display names of the two groups (e.g. the CSV group values).
  std::string name1 = "1";
  std::string name2 = "2";

  std::size_t n1() const noexcept { return sample1.size(); }
  std::size_t n2() const noexcept { return sample2.size(); }
  /// Sample 1 records followed by sample 2 records.
  std::vector<SurvivalRecord> pooled() const;
  /// Exchanges the samples; each keeps its own label.
  TwoSampleDataset swapped() const;
  TwoSampleDataset scaled(double factor) const;
};

/// Column mapping for CSV ingestion.
struct CsvSchema {
  std::string time = "time";
  std::string status = "status";
  std::optional<std::string> group;
  std::vector<std::string> x_cols;
  std::vector<std::string> z_cols;
};

using ParsedData = std::variant<SurvivalSample, TwoSampleDataset>;

/// Reads a header-first CSV. Returns a TwoSampleDataset when the schema names
/// a group column (which must then hold exactly two distinct values, sorted
/// lexicographically: the first becomes sample 1), otherwise a single sample.
ParsedData parse_csv(std::istream& in, const CsvSchema& schema);
SurvivalSample parse_sample_csv(std::istream& in, const CsvSchema& schema);
TwoSampleDataset parse_two_sample_csv(std::istream& in, const CsvSchema& schema);
ParsedData parse_csv_file(const std::string& path, const CsvSchema& schema);

/// Writes records with the schema's column names; numbers use the shortest
/// representation that parses back to the same double.
void write_csv(std::ostream& out, const SurvivalSample& sample, const CsvSchema& schema);
void write_csv(std::ostream& out, const TwoSampleDataset& ds, const CsvSchema& schema);

struct SampleDiagnostics {
  std::size_t n = 0;
  std::size_t events = 0;
  std::size_t censored = 0;
  double censoring_rate = 0.0;
  double last_event_time = 0.0;
  std::size_t plateau_size = 0;  // censored strictly after the last event
  double plateau_fraction = 0.0;
  bool followup_warning = false;  // plateau_fraction < threshold
  // Covariate columns with zero sample variance (identifiability proxy).
  std::vector<std::size_t> constant_x;
  std::vector<std::size_t> constant_z;
};

struct DatasetDiagnostics {
  SampleDiagnostics sample1;
  SampleDiagnostics sample2;
  double plateau_threshold = 0.05;
};

/// Throws ValidationError("no events: MST undefined") for a sample without events.
SampleDiagnostics diagnose_sample(const SurvivalSample& sample, double plateau_threshold = 0.05);
DatasetDiagnostics validate_dataset(const TwoSampleDataset& ds, double plateau_threshold = 0.05);

}  // namespace curemst
