#include "aqlrmf/commands.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "aqlrmf/em.hpp"
#include "aqlrmf/errors.hpp"
#include "aqlrmf/io.hpp"
#include "aqlrmf/metrics.hpp"

namespace aqlrmf {
namespace {

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path);
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

Json model_json(const MoALModel& m) {
  Json comps = Json::array();
  for (const auto& c : m.components())
    comps.push_back(Json{{"pi", c.weight}, {"lambda", c.scale}, {"kappa", c.asymmetry}});
  return comps;
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  return kExitValidation;
}

Json run_fit(const FitArgs& args) {
  const Method method = parse_method(args.method);
  const MaskedMatrix X = read_csv_matrix(args.input);

  FitOptions opts;
  opts.rank = args.rank;
  opts.components = args.components;
  opts.max_iterations = args.max_iterations;
  opts.inner.max_sweeps = args.inner_sweeps;

  Json report{{"method", to_string(method)},
              {"input", args.input},
              {"rows", X.rows()},
              {"cols", X.cols()},
              {"observed", X.observed_count()},
              {"rank", args.rank},
              {"seed", args.seed}};
  FactorPair F;
  if (method == Method::aq) {
    FitResult res = fit(X, opts, args.seed);
    report["components_initial"] = args.components;
    report["iterations"] = res.report.iterations;
    report["converged"] = res.report.converged;
    report["final_components"] = res.report.final_components;
    report["components"] = model_json(res.model);
    report["loglik_trace"] = res.report.loglik_trace;
    report["fallback_steps"] = res.report.fallback_steps;
    F = std::move(res.factors);
  } else {
    BaselineResult res = fit_cwm_uniform(X, opts, args.seed);
    report["iterations"] = res.iterations;
    report["converged"] = res.converged;
    F = std::move(res.factors);
  }
  const ErrorPair err = observed_errors(X, F);
  report["observed_l1"] = err.l1;
  report["observed_l2"] = err.l2;

  if (!args.output_u.empty()) write_csv_matrix(args.output_u, F.U);
  if (!args.output_v.empty()) write_csv_matrix(args.output_v, F.V);
  if (!args.report.empty()) write_file(args.report, dump_json(report));
  return report;
}

BenchmarkConfig resolve_bench_config(const BenchArgs& args) {
  BenchmarkConfig cfg;
  if (!args.config.empty()) cfg = config_from_json(read_json_file(args.config));
  if (args.replications) cfg.replications = *args.replications;
  if (args.master_seed) cfg.master_seed = *args.master_seed;
  if (args.ranks) cfg.ranks = *args.ranks;
  if (args.methods) {
    cfg.methods.clear();
    for (const auto& m : *args.methods) cfg.methods.push_back(parse_method(m));
  }
  if (args.threads) cfg.threads = *args.threads;
  cfg.validate();
  return cfg;
}

BenchmarkResult run_bench(const BenchArgs& args, std::ostream& table_out) {
  const BenchmarkConfig cfg = resolve_bench_config(args);
  BenchmarkResult result = run_benchmark(cfg);
  const std::string table = format_table(result, args.timing);
  table_out << table;
  if (!args.output_json.empty())
    write_file(args.output_json, dump_json(result_to_json(result, args.timing)));
  if (!args.output_table.empty()) write_file(args.output_table, table);
  return result;
}

Json run_inpaint(const InpaintArgs& args) {
  const Matrix image = read_pgm(args.image);
  const Matrix mask_pixels = read_pgm(args.mask);
  if (image.rows() != mask_pixels.rows() || image.cols() != mask_pixels.cols())
    throw ValidationError("image and mask sizes differ");
  const Mask mask = (mask_pixels.array() > 0.0).matrix();
  const MaskedMatrix X(image, mask);

  FitOptions opts;
  opts.rank = args.rank;
  opts.components = args.components;
  opts.max_iterations = args.max_iterations;
  opts.inner.max_sweeps = args.inner_sweeps;
  const FitResult res = fit(X, opts, args.seed);
  const Matrix recon = res.factors.product().cwiseMax(0.0).cwiseMin(1.0);
  if (!args.output.empty()) write_pgm(args.output, recon);

  const ErrorPair err = observed_errors(X, res.factors);
  Json report{{"image", args.image},
              {"mask", args.mask},
              {"rows", X.rows()},
              {"cols", X.cols()},
              {"missing", static_cast<std::size_t>(X.rows() * X.cols()) - X.observed_count()},
              {"rank", args.rank},
              {"seed", args.seed},
              {"iterations", res.report.iterations},
              {"converged", res.report.converged},
              {"final_components", res.report.final_components},
              {"components", model_json(res.model)},
              {"observed_l1", err.l1},
              {"observed_l2", err.l2}};
  if (!args.report.empty()) write_file(args.report, dump_json(report));
  return report;
}

}  // namespace aqlrmf
