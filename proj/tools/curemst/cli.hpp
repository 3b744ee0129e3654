#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace curemst::cli {

enum class Format { json, csv, text };

struct CliConfig {
  std::string subcommand;
  std::string input;
  std::string time_col = "time";
  std::string status_col = "status";
  std::string group_col;
  std::vector<std::string> x_cols;
  std::vector<std::string> z_cols;
  double alpha = 0.05;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> permutations;
  std::size_t bootstrap = 100;
  std::size_t workers = 0;
  Format format = Format::json;
  std::vector<std::vector<double>> z;
  bool exhaustive = false;
  double plateau_threshold = 0.05;
  // simulate
  std::string setting;
  std::size_t n1 = 200;
  std::size_t n2 = 200;
  std::size_t reps = 1000;
  // output prefix for file artifacts (simulate, curves)
  std::string out;
};

enum ExitCode { ok = 0, usage = 1, input_error = 2, inference_error = 3, em_error = 4 };

int run_compare_np(const CliConfig& cfg, std::ostream& out, std::ostream& err);
int run_fit_cure(const CliConfig& cfg, std::ostream& out, std::ostream& err);
int run_compare_sp(const CliConfig& cfg, std::ostream& out, std::ostream& err);
int run_simulate(const CliConfig& cfg, std::ostream& out, std::ostream& err);
int run_curves(const CliConfig& cfg, std::ostream& out, std::ostream& err);
int dispatch(const CliConfig& cfg, std::ostream& out, std::ostream& err);

/// Parses argv with CLI11 and runs the subcommand.
int main_entry(int argc, char** argv);

}  // namespace curemst::cli
