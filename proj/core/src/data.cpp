#include "curemst/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "curemst/errors.hpp"

namespace curemst {

namespace {

void check_record(const SurvivalRecord& r, std::size_t index) {
  if (!std::isfinite(r.time) || r.time < 0.0) {
    throw ValidationError("record " + std::to_string(index + 1) +
                          ": time must be finite and nonnegative");
  }
  if (r.status != 0 && r.status != 1) {
    throw ValidationError("record " + std::to_string(index + 1) + ": status must be 0 or 1");
  }
  for (double v : r.x) {
    if (!std::isfinite(v)) {
      throw ValidationError("record " + std::to_string(index + 1) + ": non-finite covariate");
    }
  }
  for (double v : r.z) {
    if (!std::isfinite(v)) {
      throw ValidationError("record " + std::to_string(index + 1) + ": non-finite covariate");
    }
  }
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Splits one CSV line; double quotes may wrap a field and "" escapes a quote.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

std::optional<double> to_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return v;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw SchemaError(name);
  return static_cast<std::size_t>(it - header.begin());
}

struct RawRow {
  SurvivalRecord record;
  std::string group;
};

std::vector<RawRow> read_rows(std::istream& in, const CsvSchema& schema) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(schema.time);
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
      static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF) {
    line.erase(0, 3);
  }
  const auto header = split_csv_line(line);
  const std::size_t time_col = column_index(header, schema.time);
  const std::size_t status_col = column_index(header, schema.status);
  std::optional<std::size_t> group_col;
  if (schema.group) group_col = column_index(header, *schema.group);
  std::vector<std::size_t> x_idx, z_idx;
  for (const auto& c : schema.x_cols) x_idx.push_back(column_index(header, c));
  for (const auto& c : schema.z_cols) z_idx.push_back(column_index(header, c));

  std::vector<RawRow> rows;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw ParseError(row, "expected " + std::to_string(header.size()) + " fields, found " +
                                std::to_string(fields.size()));
    }
    RawRow r;
    auto t = to_double(fields[time_col]);
    if (!t) throw ParseError(row, "non-numeric time '" + fields[time_col] + "'");
    auto s = to_double(fields[status_col]);
    if (!s) throw ParseError(row, "non-numeric status '" + fields[status_col] + "'");
    if (!std::isfinite(*t) || *t < 0.0) {
      throw ValidationError("row " + std::to_string(row) + ": time must be finite and nonnegative");
    }
    if (*s != 0.0 && *s != 1.0) {
      throw ValidationError("row " + std::to_string(row) + ": status must be 0 or 1");
    }
    r.record.time = *t;
    r.record.status = static_cast<int>(*s);
    auto read_cov = [&](const std::vector<std::size_t>& idx, const std::vector<std::string>& names,
                        std::vector<double>& out) {
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const auto& cell = fields[idx[k]];
        if (cell.empty() || cell == "NA") {
          throw ParseError(row, "missing value in column '" + names[k] + "'");
        }
        auto v = to_double(cell);
        if (!v) throw ParseError(row, "non-numeric value in column '" + names[k] + "'");
        out.push_back(*v);
      }
    };
    read_cov(x_idx, schema.x_cols, r.record.x);
    read_cov(z_idx, schema.z_cols, r.record.z);
    if (group_col) {
      r.group = fields[*group_col];
      if (r.group.empty()) throw ParseError(row, "missing group value");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string fmt_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_header(std::ostream& out, const CsvSchema& schema, bool with_group) {
  out << quote_if_needed(schema.time) << ',' << quote_if_needed(schema.status);
  if (with_group) out << ',' << quote_if_needed(schema.group.value_or("group"));
  for (const auto& c : schema.x_cols) out << ',' << quote_if_needed(c);
  for (const auto& c : schema.z_cols) out << ',' << quote_if_needed(c);
  out << '\n';
}

void write_rows(std::ostream& out, const SurvivalSample& s, const std::string* group) {
  for (const auto& r : s.records()) {
    out << fmt_double(r.time) << ',' << r.status;
    if (group) out << ',' << quote_if_needed(*group);
    for (double v : r.x) out << ',' << fmt_double(v);
    for (double v : r.z) out << ',' << fmt_double(v);
    out << '\n';
  }
}

std::vector<std::size_t> constant_columns(const SurvivalSample& s, bool latency) {
  std::vector<std::size_t> out;
  const std::size_t dim = latency ? s.z_dim() : s.x_dim();
  for (std::size_t k = 0; k < dim; ++k) {
    bool constant = true;
    const double first = latency ? s[0].z[k] : s[0].x[k];
    for (const auto& r : s.records()) {
      if ((latency ? r.z[k] : r.x[k]) != first) {
        constant = false;
        break;
      }
    }
    if (constant) out.push_back(k);
  }
  return out;
}

}  // namespace

SurvivalSample::SurvivalSample(std::vector<SurvivalRecord> records, int label)
    : records_(std::move(records)), label_(label) {
  if (!records_.empty()) {
    x_dim_ = records_.front().x.size();
    z_dim_ = records_.front().z.size();
  }
  for (std::size_t i = 0; i < records_.size(); ++i) {
    check_record(records_[i], i);
    if (records_[i].x.size() != x_dim_ || records_[i].z.size() != z_dim_) {
      throw ValidationError("record " + std::to_string(i + 1) + ": covariate dimension mismatch");
    }
  }
}

std::size_t SurvivalSample::event_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(records_.begin(), records_.end(), [](const auto& r) { return r.status == 1; }));
}

SurvivalSample SurvivalSample::scaled(double factor) const {
  std::vector<SurvivalRecord> recs(records_);
  for (auto& r : recs) r.time *= factor;
  return SurvivalSample(std::move(recs), label_);
}

TwoSampleDataset::TwoSampleDataset(SurvivalSample s1, SurvivalSample s2)
    : sample1(std::move(s1)), sample2(std::move(s2)) {
  if (!sample1.empty() && !sample2.empty() &&
      (sample1.x_dim() != sample2.x_dim() || sample1.z_dim() != sample2.z_dim())) {
    throw ValidationError("covariate dimensions differ between samples");
  }
}

std::vector<SurvivalRecord> TwoSampleDataset::pooled() const {
  std::vector<SurvivalRecord> out;
  out.reserve(n1() + n2());
  out.insert(out.end(), sample1.records().begin(), sample1.records().end());
  out.insert(out.end(), sample2.records().begin(), sample2.records().end());
  return out;
}

TwoSampleDataset TwoSampleDataset::swapped() const {
  TwoSampleDataset out(SurvivalSample({sample2.records().begin(), sample2.records().end()}, sample2.label()),
                       SurvivalSample({sample1.records().begin(), sample1.records().end()}, sample1.label()));
  out.name1 = name2;
  out.name2 = name1;
  return out;
}

TwoSampleDataset TwoSampleDataset::scaled(double factor) const {
  TwoSampleDataset out(sample1.scaled(factor), sample2.scaled(factor));
  out.name1 = name1;
  out.name2 = name2;
  return out;
}

ParsedData parse_csv(std::istream& in, const CsvSchema& schema) {
  auto rows = read_rows(in, schema);
  if (!schema.group) {
    std::vector<SurvivalRecord> recs;
    recs.reserve(rows.size());
    for (auto& r : rows) recs.push_back(std::move(r.record));
    return SurvivalSample(std::move(recs), 1);
  }
  std::set<std::string> values;
  for (const auto& r : rows) values.insert(r.group);
  if (values.size() != 2) {
    throw ValidationError("group column '" + *schema.group + "' must hold exactly 2 distinct values, found " +
                          std::to_string(values.size()));
  }
  const std::string first = *values.begin();
  const std::string second = *std::next(values.begin());
  std::vector<SurvivalRecord> g1, g2;
  for (auto& r : rows) {
    (r.group == first ? g1 : g2).push_back(std::move(r.record));
  }
  TwoSampleDataset ds(SurvivalSample(std::move(g1), 1), SurvivalSample(std::move(g2), 2));
  ds.name1 = first;
  ds.name2 = second;
  return ds;
}

SurvivalSample parse_sample_csv(std::istream& in, const CsvSchema& schema) {
  CsvSchema s = schema;
  s.group.reset();
  return std::get<SurvivalSample>(parse_csv(in, s));
}

TwoSampleDataset parse_two_sample_csv(std::istream& in, const CsvSchema& schema) {
  if (!schema.group) throw SchemaError("<group>");
  return std::get<TwoSampleDataset>(parse_csv(in, schema));
}

ParsedData parse_csv_file(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  return parse_csv(in, schema);
}

void write_csv(std::ostream& out, const SurvivalSample& sample, const CsvSchema& schema) {
  write_header(out, schema, false);
  write_rows(out, sample, nullptr);
}

void write_csv(std::ostream& out, const TwoSampleDataset& ds, const CsvSchema& schema) {
  write_header(out, schema, true);
  write_rows(out, ds.sample1, &ds.name1);
  write_rows(out, ds.sample2, &ds.name2);
}

SampleDiagnostics diagnose_sample(const SurvivalSample& sample, double plateau_threshold) {
  SampleDiagnostics d;
  d.n = sample.size();
  d.events = sample.event_count();
  if (d.events == 0) throw ValidationError("no events: MST undefined");
  d.censored = d.n - d.events;
  d.censoring_rate = static_cast<double>(d.censored) / static_cast<double>(d.n);
  for (const auto& r : sample.records()) {
    if (r.status == 1) d.last_event_time = std::max(d.last_event_time, r.time);
  }
  for (const auto& r : sample.records()) {
    if (r.status == 0 && r.time > d.last_event_time) ++d.plateau_size;
  }
  d.plateau_fraction = static_cast<double>(d.plateau_size) / static_cast<double>(d.n);
  d.followup_warning = d.plateau_fraction < plateau_threshold;
  d.constant_x = constant_columns(sample, false);
  d.constant_z = constant_columns(sample, true);
  return d;
}

DatasetDiagnostics validate_dataset(const TwoSampleDataset& ds, double plateau_threshold) {
  DatasetDiagnostics d;
  d.plateau_threshold = plateau_threshold;
  d.sample1 = diagnose_sample(ds.sample1, plateau_threshold);
  d.sample2 = diagnose_sample(ds.sample2, plateau_threshold);
  return d;
}

}  // namespace curemst
