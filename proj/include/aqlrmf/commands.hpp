#pragma once

#include <cstdint>
#include <exception>
#include <iosfwd>
#include <optional>
#include <string>

#include "aqlrmf/bench.hpp"

namespace aqlrmf {

// Exit codes shared by every subcommand.
enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitIo = 2 };

// Maps an exception escaping a command to its exit code.
int exit_code_for(const std::exception& e);

struct FitArgs {
  std::string input;
  int rank = 1;
  int components = 4;
  int max_iterations = 100;
  int inner_sweeps = 10;
  std::uint64_t seed = 0;
  std::string method = "aq";
  std::string output_u;
  std::string output_v;
  std::string report;
};

// Fits a CSV matrix and writes U, V and a JSON report. Returns the report.
Json run_fit(const FitArgs& args);

struct BenchArgs {
  std::string config;  // optional JSON config file
  std::optional<int> replications;
  std::optional<std::uint64_t> master_seed;
  std::optional<std::vector<int>> ranks;
  std::optional<std::vector<std::string>> methods;
  std::optional<int> threads;
  std::string output_json;
  std::string output_table;
  bool timing = false;
};

BenchmarkConfig resolve_bench_config(const BenchArgs& args);
// Runs the grid, writes the JSON/table files if requested and returns the result.
BenchmarkResult run_bench(const BenchArgs& args, std::ostream& table_out);

struct InpaintArgs {
  std::string image;
  std::string mask;  // pixel value 0 marks a missing pixel
  int rank = 80;
  int components = 4;
  int max_iterations = 100;
  int inner_sweeps = 10;
  std::uint64_t seed = 0;
  std::string output;
  std::string report;
};

// Completes the masked pixels and writes the clamped reconstruction.
Json run_inpaint(const InpaintArgs& args);

}  // namespace aqlrmf
