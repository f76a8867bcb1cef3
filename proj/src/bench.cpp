#include "aqlrmf/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "aqlrmf/em.hpp"
#include "aqlrmf/errors.hpp"

namespace aqlrmf {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Json basic_to_json(const noise::Basic& spec) {
  return std::visit(
      Overloaded{
          [](const noise::None&) { return Json{{"type", "none"}}; },
          [](const noise::Gaussian& g) { return Json{{"type", "gaussian"}, {"sigma", g.sigma}}; },
          [](const noise::Laplace& l) {
            return Json{{"type", "laplace"}, {"location", l.location}, {"scale", l.scale}};
          },
          [](const noise::StudentT& t) { return Json{{"type", "student_t"}, {"df", t.df}}; },
          [](const noise::AsymmetricLaplace& a) {
            return Json{{"type", "asymmetric_laplace"}, {"lambda", a.lambda}, {"kappa", a.kappa}};
          },
          [](const noise::SkewNormal& s) {
            return Json{{"type", "skew_normal"}, {"sigma", s.sigma}, {"kappa", s.kappa}};
          },
      },
      spec);
}

double number(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw ValidationError(std::string("noise spec: missing numeric field '") + key + "'");
  return j.at(key).get<double>();
}

noise::Basic basic_from_json(const Json& j) {
  const std::string type = j.value("type", "");
  if (type == "none") return noise::None{};
  if (type == "gaussian") return noise::Gaussian{number(j, "sigma")};
  if (type == "laplace") return noise::Laplace{j.value("location", 0.0), number(j, "scale")};
  if (type == "student_t") return noise::StudentT{number(j, "df")};
  if (type == "asymmetric_laplace")
    return noise::AsymmetricLaplace{number(j, "lambda"), number(j, "kappa")};
  if (type == "skew_normal") return noise::SkewNormal{number(j, "sigma"), number(j, "kappa")};
  throw ValidationError("noise spec: unknown type '" + type + "'");
}

Json summary_json(const Summary& s) { return Json{{"mean", s.mean}, {"median", s.median}}; }

Json error_json(const ErrorPair& e) { return Json{{"l1", e.l1}, {"l2", e.l2}}; }

void dump_into(std::string& out, const Json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  if (j.is_object()) {
    if (j.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first) out += ",\n";
      first = false;
      out += inner + Json(it.key()).dump() + ": ";
      dump_into(out, it.value(), indent + 1);
    }
    out += "\n" + pad + "}";
  } else if (j.is_array()) {
    if (j.empty()) {
      out += "[]";
      return;
    }
    // Arrays of scalars stay on one line.
    const bool flat = std::none_of(j.begin(), j.end(),
                                   [](const Json& v) { return v.is_structured(); });
    out += flat ? "[" : "[\n";
    bool first = true;
    for (const auto& v : j) {
      if (!first) out += flat ? ", " : ",\n";
      first = false;
      if (!flat) out += inner;
      dump_into(out, v, indent + 1);
    }
    out += flat ? "]" : "\n" + pad + "]";
  } else if (j.is_number_float()) {
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
      out += "null";
      return;
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    out.append(buf, res.ptr);
  } else {
    out += j.dump();
  }
}

struct Job {
  std::size_t noise_row;
  std::size_t rank_index;
  int replication;
};

}  // namespace

std::string to_string(Method method) {
  return method == Method::aq ? "aq" : "cwm_uniform";
}

Method parse_method(const std::string& name) {
  if (name == "aq") return Method::aq;
  if (name == "cwm_uniform" || name == "cwm") return Method::cwm_uniform;
  throw ValidationError("unknown method '" + name + "' (expected aq or cwm_uniform)");
}

std::vector<NamedNoise> default_noise_rows() {
  using namespace noise;
  return {
      {"Laplace (b=1.5)", Laplace{0.0, 1.5}},
      {"Gaussian (sigma=5)", Gaussian{5.0}},
      {"Student-t (df=1)", StudentT{1.0}},
      {"Student-t (df=2)", StudentT{2.0}},
      {"AL (lambda=1, kappa=0.7)", AsymmetricLaplace{1.0, 0.7}},
      {"Skew normal (sigma=3, kappa=0.7)", SkewNormal{3.0, 0.7}},
      {"Mixture 1", Mixture{{{0.5, Gaussian{1.0}}, {0.3, Laplace{0.0, 1.0}}, {0.2, Laplace{0.0, 2.0}}}}},
      {"Mixture 2",
       Mixture{{{0.5, Gaussian{1.0}}, {0.3, Laplace{0.0, 1.0}}, {0.2, AsymmetricLaplace{1.0, 0.8}}}}},
  };
}

void BenchmarkConfig::validate() const {
  if (rows < 1 || cols < 1) throw ValidationError("benchmark dimensions must be positive");
  if (ranks.empty()) throw ValidationError("benchmark needs at least one rank");
  for (int r : ranks)
    if (r < 1 || r > std::min(rows, cols)) throw ValidationError("benchmark rank out of range");
  if (replications < 1) throw ValidationError("replications must be at least 1");
  if (!(missing_fraction >= 0.0 && missing_fraction < 1.0))
    throw ValidationError("missing_fraction must lie in [0,1)");
  if (noise_rows.empty()) throw ValidationError("benchmark needs at least one noise row");
  for (const auto& row : noise_rows) aqlrmf::validate(row.spec);
  if (methods.empty()) throw ValidationError("benchmark needs at least one method");
  if (components < 1) throw ValidationError("components must be at least 1");
  if (max_iterations < 1) throw ValidationError("max_iterations must be positive");
  if (!(convergence_epsilon > 0.0)) throw ValidationError("convergence_epsilon must be positive");
  if (threads < 0) throw ValidationError("threads must be nonnegative");
  inner.validate();
}

const CellResult& BenchmarkResult::cell(const std::string& noise, int rank, Method method) const {
  for (const auto& c : cells)
    if (c.noise == noise && c.rank == rank && c.method == method) return c;
  throw ValidationError("no benchmark cell for " + noise);
}

Summary summarize(std::vector<double> values) {
  Summary s;
  if (values.empty()) return s;
  double total = 0.0;
  for (double v : values) total += v;
  s.mean = total / static_cast<double>(values.size());
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  s.median = values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
  return s;
}

BenchmarkResult run_benchmark(const BenchmarkConfig& config) {
  config.validate();
  const std::size_t n_ranks = config.ranks.size();
  const std::size_t n_methods = config.methods.size();
  const auto reps = static_cast<std::size_t>(config.replications);

  std::vector<Job> jobs;
  for (std::size_t row = 0; row < config.noise_rows.size(); ++row)
    for (std::size_t ri = 0; ri < n_ranks; ++ri)
      for (int rep = 0; rep < config.replications; ++rep) jobs.push_back({row, ri, rep});

  // records[job][method]
  std::vector<std::vector<RunRecord>> records(jobs.size(), std::vector<RunRecord>(n_methods));

  auto run_job = [&](std::size_t index) {
    const Job& job = jobs[index];
    const int rank = config.ranks[job.rank_index];
    const std::uint64_t seed = derive_seed(config.master_seed, index);
    const SyntheticInstance inst =
        make_instance(config.rows, config.cols, rank, config.missing_fraction,
                      config.noise_rows[job.noise_row].spec, seed);
    FitOptions opts;
    opts.rank = rank;
    opts.components = config.components;
    opts.max_iterations = config.max_iterations;
    opts.convergence_epsilon = config.convergence_epsilon;
    opts.inner = config.inner;
    const std::uint64_t fit_seed = derive_seed(seed, 1);

    for (std::size_t mi = 0; mi < n_methods; ++mi) {
      RunRecord rec;
      rec.replication = job.replication;
      rec.seed = seed;
      FactorPair F;
      const auto start = std::chrono::steady_clock::now();
      if (config.methods[mi] == Method::aq) {
        FitResult res = fit(inst.observed, opts, fit_seed);
        rec.converged = res.report.converged;
        rec.iterations = res.report.iterations;
        rec.final_components = res.report.final_components;
        F = std::move(res.factors);
      } else {
        BaselineResult res = fit_cwm_uniform(inst.observed, opts, fit_seed);
        rec.converged = res.converged;
        rec.iterations = res.iterations;
        F = std::move(res.factors);
      }
      rec.seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      rec.noisy = reconstruction_errors(inst.noisy_reference(), F);
      rec.truth = reconstruction_errors(inst.ground_truth, F);
      records[index][mi] = rec;
    }
  };

  unsigned workers = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                        : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(jobs.size()));
  if (workers <= 1) {
    for (std::size_t k = 0; k < jobs.size(); ++k) run_job(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_lock;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < jobs.size(); k = next++) {
          try {
            run_job(k);
          } catch (...) {
            std::lock_guard<std::mutex> hold(failure_lock);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  BenchmarkResult result{config, {}};
  for (std::size_t row = 0; row < config.noise_rows.size(); ++row) {
    for (std::size_t ri = 0; ri < n_ranks; ++ri) {
      for (std::size_t mi = 0; mi < n_methods; ++mi) {
        CellResult cell;
        cell.noise = config.noise_rows[row].name;
        cell.rank = config.ranks[ri];
        cell.method = config.methods[mi];
        const std::size_t base = (row * n_ranks + ri) * reps;
        for (std::size_t rep = 0; rep < reps; ++rep) cell.runs.push_back(records[base + rep][mi]);

        std::vector<double> l1n, l2n, l1t, l2t;
        double seconds = 0.0;
        int converged = 0;
        for (const auto& r : cell.runs) {
          l1n.push_back(r.noisy.l1);
          l2n.push_back(r.noisy.l2);
          l1t.push_back(r.truth.l1);
          l2t.push_back(r.truth.l2);
          seconds += r.seconds;
          converged += r.converged ? 1 : 0;
        }
        cell.l1_noisy = summarize(l1n);
        cell.l2_noisy = summarize(l2n);
        cell.l1_truth = summarize(l1t);
        cell.l2_truth = summarize(l2t);
        cell.mean_seconds = seconds / static_cast<double>(reps);
        cell.convergence_rate = static_cast<double>(converged) / static_cast<double>(reps);
        result.cells.push_back(std::move(cell));
      }
    }
  }
  return result;
}

Json noise_to_json(const NoiseSpec& spec) {
  if (const auto* mix = std::get_if<noise::Mixture>(&spec)) {
    Json parts = Json::array();
    for (const auto& [p, part] : mix->parts)
      parts.push_back(Json{{"probability", p}, {"noise", basic_to_json(part)}});
    return Json{{"type", "mixture"}, {"components", parts}};
  }
  return std::visit(Overloaded{[](const noise::Mixture&) { return Json{}; },
                               [](const auto& b) { return basic_to_json(noise::Basic(b)); }},
                    spec);
}

NoiseSpec noise_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("noise spec must be a JSON object");
  NoiseSpec spec;
  if (j.value("type", "") == "mixture") {
    if (!j.contains("components") || !j.at("components").is_array())
      throw ValidationError("mixture noise needs a 'components' array");
    noise::Mixture mix;
    for (const auto& part : j.at("components")) {
      if (!part.contains("noise")) throw ValidationError("mixture component needs 'noise'");
      if (part.at("noise").value("type", "") == "mixture")
        throw ValidationError("mixtures cannot nest");
      mix.parts.emplace_back(number(part, "probability"), basic_from_json(part.at("noise")));
    }
    spec = std::move(mix);
  } else {
    spec = std::visit([](const auto& b) -> NoiseSpec { return b; }, basic_from_json(j));
  }
  validate(spec);
  return spec;
}

Json config_to_json(const BenchmarkConfig& c) {
  Json rows = Json::array();
  for (const auto& r : c.noise_rows) rows.push_back(Json{{"name", r.name}, {"noise", noise_to_json(r.spec)}});
  Json methods = Json::array();
  for (Method m : c.methods) methods.push_back(to_string(m));
  return Json{{"rows", c.rows},
              {"cols", c.cols},
              {"ranks", c.ranks},
              {"replications", c.replications},
              {"missing_fraction", c.missing_fraction},
              {"methods", methods},
              {"master_seed", c.master_seed},
              {"components", c.components},
              {"max_iterations", c.max_iterations},
              {"convergence_epsilon", c.convergence_epsilon},
              {"inner_max_sweeps", c.inner.max_sweeps},
              {"inner_objective_tolerance", c.inner.objective_tolerance},
              {"noise_rows", rows}};
}

BenchmarkConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("benchmark config must be a JSON object");
  BenchmarkConfig c;
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& key = it.key();
      const Json& v = it.value();
      if (key == "rows") c.rows = v.get<int>();
      else if (key == "cols") c.cols = v.get<int>();
      else if (key == "ranks") c.ranks = v.get<std::vector<int>>();
      else if (key == "replications") c.replications = v.get<int>();
      else if (key == "missing_fraction") c.missing_fraction = v.get<double>();
      else if (key == "methods") {
        c.methods.clear();
        for (const auto& m : v) c.methods.push_back(parse_method(m.get<std::string>()));
      } else if (key == "master_seed") c.master_seed = v.get<std::uint64_t>();
      else if (key == "components") c.components = v.get<int>();
      else if (key == "max_iterations") c.max_iterations = v.get<int>();
      else if (key == "convergence_epsilon") c.convergence_epsilon = v.get<double>();
      else if (key == "inner_max_sweeps") c.inner.max_sweeps = v.get<int>();
      else if (key == "inner_objective_tolerance") c.inner.objective_tolerance = v.get<double>();
      else if (key == "threads") c.threads = v.get<int>();
      else if (key == "noise_rows") {
        c.noise_rows.clear();
        for (const auto& row : v)
          c.noise_rows.push_back({row.at("name").get<std::string>(), noise_from_json(row.at("noise"))});
      } else {
        throw ValidationError("benchmark config: unknown key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("benchmark config: ") + e.what());
  }
  c.validate();
  return c;
}

Json result_to_json(const BenchmarkResult& result, bool include_timing) {
  Json cells = Json::array();
  for (const auto& cell : result.cells) {
    Json runs = Json::array();
    for (const auto& r : cell.runs) {
      Json run{{"replication", r.replication},
               {"seed", r.seed},
               {"noisy", error_json(r.noisy)},
               {"truth", error_json(r.truth)},
               {"iterations", r.iterations},
               {"converged", r.converged}};
      if (cell.method == Method::aq) run["final_components"] = r.final_components;
      if (include_timing) run["seconds"] = r.seconds;
      runs.push_back(std::move(run));
    }
    Json c{{"noise", cell.noise},
           {"rank", cell.rank},
           {"method", to_string(cell.method)},
           {"l1_noisy", summary_json(cell.l1_noisy)},
           {"l2_noisy", summary_json(cell.l2_noisy)},
           {"l1_truth", summary_json(cell.l1_truth)},
           {"l2_truth", summary_json(cell.l2_truth)},
           {"convergence_rate", cell.convergence_rate}};
    if (include_timing) c["mean_seconds"] = cell.mean_seconds;
    c["runs"] = std::move(runs);
    cells.push_back(std::move(c));
  }
  return Json{{"config", config_to_json(result.config)}, {"cells", cells}};
}

std::string format_table(const BenchmarkResult& result, bool include_timing) {
  const auto& cfg = result.config;
  std::size_t name_width = 6;
  for (const auto& row : cfg.noise_rows) name_width = std::max(name_width, row.name.size());

  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  auto header = [&](const std::string& title) {
    out << std::left << std::setw(static_cast<int>(name_width)) << title;
    for (const char* block : {"L1", "L2"})
      for (Method m : cfg.methods)
        out << "  " << std::right << std::setw(13) << (std::string(block) + " " + to_string(m));
    out << '\n';
  };

  struct View {
    const char* label;
    Summary CellResult::*l1;
    Summary CellResult::*l2;
  };
  const View views[] = {{"vs observed matrix", &CellResult::l1_noisy, &CellResult::l2_noisy},
                        {"vs ground truth", &CellResult::l1_truth, &CellResult::l2_truth}};

  for (int rank : cfg.ranks) {
    for (const View& view : views) {
      out << "r = " << rank << ", mean error " << view.label << ", " << cfg.replications
          << " replications\n";
      header("noise");
      // per-method column of row means, for the footer
      std::vector<std::vector<double>> l1_cols(cfg.methods.size()), l2_cols(cfg.methods.size());
      for (const auto& row : cfg.noise_rows) {
        out << std::left << std::setw(static_cast<int>(name_width)) << row.name;
        for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
          const double v = (result.cell(row.name, rank, cfg.methods[mi]).*view.l1).mean;
          l1_cols[mi].push_back(v);
          out << "  " << std::right << std::setw(13) << v;
        }
        for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
          const double v = (result.cell(row.name, rank, cfg.methods[mi]).*view.l2).mean;
          l2_cols[mi].push_back(v);
          out << "  " << std::right << std::setw(13) << v;
        }
        out << '\n';
      }
      for (const bool use_mean : {true, false}) {
        out << std::left << std::setw(static_cast<int>(name_width)) << (use_mean ? "mean" : "median");
        for (const auto* cols : {&l1_cols, &l2_cols})
          for (const auto& col : *cols) {
            const Summary s = summarize(col);
            out << "  " << std::right << std::setw(13) << (use_mean ? s.mean : s.median);
          }
        out << '\n';
      }
      out << '\n';
    }

    out << "r = " << rank << ", convergence rate" << (include_timing ? " and mean seconds per fit" : "")
        << '\n';
    out << std::left << std::setw(static_cast<int>(name_width)) << "noise";
    for (Method m : cfg.methods) out << "  " << std::right << std::setw(13) << ("conv " + to_string(m));
    if (include_timing)
      for (Method m : cfg.methods) out << "  " << std::right << std::setw(13) << ("sec " + to_string(m));
    out << '\n';
    for (const auto& row : cfg.noise_rows) {
      out << std::left << std::setw(static_cast<int>(name_width)) << row.name;
      for (Method m : cfg.methods)
        out << "  " << std::right << std::setw(13) << result.cell(row.name, rank, m).convergence_rate;
      if (include_timing)
        for (Method m : cfg.methods)
          out << "  " << std::right << std::setw(13) << result.cell(row.name, rank, m).mean_seconds;
      out << '\n';
    }
    out << '\n';
  }
  return out.str();
}

std::string dump_json(const Json& j) {
  std::string out;
  dump_into(out, j, 0);
  out.push_back('\n');
  return out;
}

}  // namespace aqlrmf
