// aqlrmf: robust low-rank matrix factorization under mixture of asymmetric
// Laplace noise.
//
//   aqlrmf fit --input X.csv --rank 4 --output-u U.csv --output-v V.csv --report fit.json
//   aqlrmf bench --config bench.json --json result.json
//   aqlrmf inpaint --image in.pgm --mask mask.pgm --rank 80 --output out.pgm

#include <iostream>

#include "CLI11.hpp"

#include "aqlrmf/commands.hpp"

int main(int argc, char** argv) {
  using namespace aqlrmf;

  CLI::App app{"Low-rank matrix factorization with mixture of asymmetric Laplace noise"};
  app.require_subcommand(1);

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "Fit U, V to a CSV matrix (NaN marks missing)");
  fit_cmd->add_option("--input", fit_args.input, "Input CSV matrix")->required();
  fit_cmd->add_option("--rank", fit_args.rank, "Factorization rank")->required();
  fit_cmd->add_option("--components", fit_args.components, "Initial number of mixture components")
      ->capture_default_str();
  fit_cmd->add_option("--max-iters", fit_args.max_iterations, "Maximum outer EM iterations")
      ->capture_default_str();
  fit_cmd->add_option("--sweeps", fit_args.inner_sweeps, "Weighted-median sweeps per iteration")
      ->capture_default_str();
  fit_cmd->add_option("--seed", fit_args.seed, "Random seed")->capture_default_str();
  fit_cmd->add_option("--method", fit_args.method, "aq (mixture model) or cwm (uniform L1)")
      ->check(CLI::IsMember({"aq", "cwm", "cwm_uniform"}))
      ->capture_default_str();
  fit_cmd->add_option("--output-u", fit_args.output_u, "Write U as CSV");
  fit_cmd->add_option("--output-v", fit_args.output_v, "Write V as CSV");
  fit_cmd->add_option("--report", fit_args.report, "Write a JSON report");

  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("bench", "Run the synthetic benchmark grid");
  bench_cmd->add_option("--config", bench_args.config, "JSON benchmark config");
  bench_cmd->add_option("--replications", bench_args.replications, "Override replications");
  bench_cmd->add_option("--seed", bench_args.master_seed, "Override master seed");
  bench_cmd->add_option("--ranks", bench_args.ranks, "Override ranks");
  bench_cmd->add_option("--methods", bench_args.methods, "Override methods (aq, cwm_uniform)");
  bench_cmd->add_option("--threads", bench_args.threads, "Worker threads (0 = all cores)");
  bench_cmd->add_option("--json", bench_args.output_json, "Write results as JSON");
  bench_cmd->add_option("--table", bench_args.output_table, "Write the text table to a file");
  bench_cmd->add_flag("--timing", bench_args.timing,
                      "Include wall-clock timings (JSON is then no longer reproducible)");

  InpaintArgs inpaint_args;
  auto* inpaint_cmd = app.add_subcommand(
      "inpaint",
      "Fill masked pixels of a greyscale P5 PGM image. Mask pixels equal to 0 are treated as "
      "missing; any other value is observed. For RGB images, reshape the channels side by "
      "side into one greyscale image first.");
  inpaint_cmd->add_option("--image", inpaint_args.image, "Input PGM image")->required();
  inpaint_cmd->add_option("--mask", inpaint_args.mask, "Mask PGM (0 = missing)")->required();
  inpaint_cmd->add_option("--rank", inpaint_args.rank, "Factorization rank")->capture_default_str();
  inpaint_cmd->add_option("--components", inpaint_args.components, "Initial mixture components")
      ->capture_default_str();
  inpaint_cmd->add_option("--max-iters", inpaint_args.max_iterations, "Maximum EM iterations")
      ->capture_default_str();
  inpaint_cmd->add_option("--sweeps", inpaint_args.inner_sweeps, "Sweeps per iteration")
      ->capture_default_str();
  inpaint_cmd->add_option("--seed", inpaint_args.seed, "Random seed")->capture_default_str();
  inpaint_cmd->add_option("--output", inpaint_args.output, "Output PGM")->required();
  inpaint_cmd->add_option("--report", inpaint_args.report, "Write a JSON report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*fit_cmd) {
      const Json report = run_fit(fit_args);
      std::cout << "iterations " << report.at("iterations").get<int>() << ", observed L1 "
                << report.at("observed_l1").get<double>() << '\n';
    } else if (*bench_cmd) {
      run_bench(bench_args, std::cout);
    } else if (*inpaint_cmd) {
      const Json report = run_inpaint(inpaint_args);
      std::cout << "iterations " << report.at("iterations").get<int>() << ", observed L1 "
                << report.at("observed_l1").get<double>() << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kExitOk;
}
