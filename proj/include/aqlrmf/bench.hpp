#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "aqlrmf/cwm.hpp"
#include "aqlrmf/metrics.hpp"
#include "aqlrmf/synth.hpp"

namespace aqlrmf {

using Json = nlohmann::ordered_json;

enum class Method { aq, cwm_uniform };

std::string to_string(Method method);
Method parse_method(const std::string& name);

struct NamedNoise {
  std::string name;
  NoiseSpec spec;
};

// The eight noise settings of the synthetic study, in table order.
std::vector<NamedNoise> default_noise_rows();

struct BenchmarkConfig {
  int rows = 40;
  int cols = 20;
  std::vector<int> ranks{4, 8};
  int replications = 30;
  double missing_fraction = 0.2;
  std::vector<NamedNoise> noise_rows = default_noise_rows();
  std::vector<Method> methods{Method::aq, Method::cwm_uniform};
  std::uint64_t master_seed = 20200101;
  int components = 4;
  int max_iterations = 100;
  double convergence_epsilon = 1e-50;
  WL1Options inner;
  // Worker threads; 0 picks the hardware concurrency. Does not affect results.
  int threads = 0;

  void validate() const;
};

struct RunRecord {
  int replication = 0;
  std::uint64_t seed = 0;
  ErrorPair noisy{};  // against the observed (noisy) matrix
  ErrorPair truth{};  // against the noise-free product
  double seconds = 0.0;
  bool converged = false;
  int iterations = 0;
  int final_components = 0;  // 0 for the uniform baseline
};

struct Summary {
  double mean = 0.0;
  double median = 0.0;
};

struct CellResult {
  std::string noise;
  int rank = 0;
  Method method = Method::aq;
  std::vector<RunRecord> runs;  // sorted by replication
  Summary l1_noisy, l2_noisy, l1_truth, l2_truth;
  double mean_seconds = 0.0;
  double convergence_rate = 0.0;
};

struct BenchmarkResult {
  BenchmarkConfig config;
  std::vector<CellResult> cells;  // noise row major, then rank, then method

  const CellResult& cell(const std::string& noise, int rank, Method method) const;
};

Summary summarize(std::vector<double> values);

BenchmarkResult run_benchmark(const BenchmarkConfig& config);

Json noise_to_json(const NoiseSpec& spec);
NoiseSpec noise_from_json(const Json& j);
Json config_to_json(const BenchmarkConfig& config);
// Missing keys keep their defaults; unknown keys are rejected.
BenchmarkConfig config_from_json(const Json& j);

// Timing fields are omitted unless requested so that reruns are byte-identical.
Json result_to_json(const BenchmarkResult& result, bool include_timing);
// Aligned text tables, one block per rank: noise rows x methods with mean and
// median footers, for errors against the noisy matrix and the ground truth.
std::string format_table(const BenchmarkResult& result, bool include_timing);

// Fixed-format JSON text: ordered keys, two-space indent, trailing newline.
std::string dump_json(const Json& j);

}  // namespace aqlrmf
