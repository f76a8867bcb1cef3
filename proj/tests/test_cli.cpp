#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"

#include "aqlrmf/commands.hpp"
#include "aqlrmf/errors.hpp"
#include "aqlrmf/io.hpp"
#include "aqlrmf/metrics.hpp"

using namespace aqlrmf;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "aqlrmf_test_cli";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(AQLRMF_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Matrix rank_one_image() {
  // Pixel values 5 a b / 255 are exact 8-bit levels.
  Matrix img(5, 10);
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 10; ++b) img(a, b) = 5.0 * (a + 1) * (b + 1) / 255.0;
  return img;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("fit recovers a noiseless rank-1 CSV") {
  const fs::path dir = scratch_dir();
  Matrix x(8, 6);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 6; ++j) x(i, j) = (i + 1.5) * (j - 2.25);
  write_csv_matrix((dir / "r1.csv").string(), x);

  FitArgs args;
  args.input = (dir / "r1.csv").string();
  args.rank = 1;
  args.components = 1;
  args.output_u = (dir / "U.csv").string();
  args.output_v = (dir / "V.csv").string();
  args.report = (dir / "fit.json").string();
  const Json report = run_fit(args);
  CHECK(report.at("observed_l1").get<double>() < 1e-6);
  CHECK(report.contains("loglik_trace"));
  CHECK(report.at("components").size() == report.at("final_components").get<std::size_t>());

  const Matrix U = read_csv_matrix(args.output_u).values();
  const Matrix V = read_csv_matrix(args.output_v).values();
  CHECK(U.rows() == 8);
  CHECK(V.rows() == 6);
  CHECK((U * V.transpose() - x).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("fit is byte-reproducible and the cwm path omits mixture fields") {
  const fs::path dir = scratch_dir();
  std::mt19937_64 rng(3);
  std::normal_distribution<double> d(0.0, 1.0);
  Matrix x(15, 10);
  for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = d(rng);
  Mask mask = Mask::Constant(15, 10, true);
  mask(2, 3) = false;
  write_csv_matrix((dir / "in.csv").string(), MaskedMatrix(x, mask));

  auto run = [&](const std::string& tag, const std::string& method) {
    FitArgs args;
    args.input = (dir / "in.csv").string();
    args.rank = 2;
    args.seed = 99;
    args.max_iterations = 15;
    args.method = method;
    args.output_u = (dir / ("U" + tag)).string();
    args.output_v = (dir / ("V" + tag)).string();
    args.report = (dir / ("R" + tag)).string();
    return run_fit(args);
  };
  run("a", "aq");
  run("b", "aq");
  CHECK(slurp(dir / "Ua") == slurp(dir / "Ub"));
  CHECK(slurp(dir / "Va") == slurp(dir / "Vb"));
  CHECK(slurp(dir / "Ra") == slurp(dir / "Rb"));

  const Json cwm = run("c", "cwm");
  CHECK(cwm.at("method") == "cwm_uniform");
  CHECK_FALSE(cwm.contains("components"));
  CHECK_FALSE(cwm.contains("loglik_trace"));
  CHECK(cwm.at("observed_l1").get<double>() >= 0.0);
}

TEST_CASE("bench config parsing and reproducible JSON") {
  const Json cfg = Json::parse(R"({
    "rows": 12, "cols": 8, "ranks": [2], "replications": 2, "master_seed": 5,
    "max_iterations": 5, "threads": 2,
    "noise_rows": [
      {"name": "lap", "noise": {"type": "laplace", "scale": 1.0}},
      {"name": "mix", "noise": {"type": "mixture", "components": [
        {"probability": 0.5, "noise": {"type": "gaussian", "sigma": 1.0}},
        {"probability": 0.5, "noise": {"type": "asymmetric_laplace", "lambda": 1.0, "kappa": 0.8}}]}}
    ]})");
  const BenchmarkConfig c = config_from_json(cfg);
  CHECK(c.rows == 12);
  CHECK(c.noise_rows.size() == 2);
  CHECK(c.replications == 2);
  CHECK(config_from_json(config_to_json(c)).noise_rows.size() == 2);
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"rowz": 3})")), ValidationError);
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"replications": 0})")), ValidationError);

  const fs::path dir = scratch_dir();
  spit(dir / "cfg.json", cfg.dump());
  BenchArgs args;
  args.config = (dir / "cfg.json").string();
  args.output_json = (dir / "b1.json").string();
  std::ostringstream table;
  const BenchmarkResult r = run_bench(args, table);
  CHECK(r.cells.size() == 4);
  CHECK(table.str().find("lap") != std::string::npos);
  args.output_json = (dir / "b2.json").string();
  args.threads = 1;
  std::ostringstream ignored;
  run_bench(args, ignored);
  // Thread count does not change results, so the files match byte for byte
  // apart from the echoed thread setting.
  std::string a = slurp(dir / "b1.json"), b = slurp(dir / "b2.json");
  const Json ja = Json::parse(a), jb = Json::parse(b);
  CHECK(ja.at("cells") == jb.at("cells"));

  const CellResult& cell = r.cell("lap", 2, Method::aq);
  CHECK(cell.runs.size() == 2);
  std::vector<double> l1;
  for (const auto& run : cell.runs) l1.push_back(run.truth.l1);
  CHECK(cell.l1_truth.mean == doctest::Approx((l1[0] + l1[1]) / 2.0));
}

TEST_CASE("inpaint recovers a hidden pixel of a rank-1 image") {
  const fs::path dir = scratch_dir();
  const Matrix img = rank_one_image();
  Matrix mask = Matrix::Ones(5, 10);
  mask(2, 7) = 0.0;
  Matrix damaged = img;
  damaged(2, 7) = 0.0;
  write_pgm((dir / "img.pgm").string(), damaged);
  write_pgm((dir / "mask.pgm").string(), mask);

  InpaintArgs args;
  args.image = (dir / "img.pgm").string();
  args.mask = (dir / "mask.pgm").string();
  args.rank = 1;
  args.components = 1;
  args.output = (dir / "out.pgm").string();
  const Json report = run_inpaint(args);
  CHECK(report.at("missing").get<int>() == 1);
  const Matrix out = read_pgm(args.output);
  CHECK(std::abs(out(2, 7) - img(2, 7)) < 1e-3);
  CHECK((out - img).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("inpaint with an all-observed mask reports the observed fit") {
  const fs::path dir = scratch_dir();
  write_pgm((dir / "full.pgm").string(), rank_one_image());
  write_pgm((dir / "ones.pgm").string(), Matrix::Ones(5, 10));
  InpaintArgs args;
  args.image = (dir / "full.pgm").string();
  args.mask = (dir / "ones.pgm").string();
  args.rank = 1;
  args.output = (dir / "full_out.pgm").string();
  const Json report = run_inpaint(args);
  CHECK(report.at("missing").get<int>() == 0);
  CHECK(report.at("observed_l1").get<double>() < 1e-6);
}

TEST_CASE("inpaint beats the all-zeros baseline on a rank-4 image") {
  const fs::path dir = scratch_dir();
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  Matrix U(40, 4), V(30, 4);
  for (Eigen::Index k = 0; k < U.size(); ++k) U.data()[k] = d(rng);
  for (Eigen::Index k = 0; k < V.size(); ++k) V.data()[k] = d(rng);
  const Matrix truth_raw = U * V.transpose() / 4.0;
  write_pgm((dir / "r4.pgm").string(), truth_raw);
  const Matrix truth = read_pgm((dir / "r4.pgm").string());

  Matrix mask = Matrix::Ones(40, 30);
  std::bernoulli_distribution hide(0.2);
  for (Eigen::Index k = 0; k < mask.size(); ++k)
    if (hide(rng)) mask.data()[k] = 0.0;
  write_pgm((dir / "r4mask.pgm").string(), mask);

  InpaintArgs args;
  args.image = (dir / "r4.pgm").string();
  args.mask = (dir / "r4mask.pgm").string();
  args.rank = 4;
  args.max_iterations = 30;
  args.output = (dir / "r4out.pgm").string();
  run_inpaint(args);
  const Matrix out = read_pgm(args.output);
  const double err = (out - truth).cwiseAbs().mean();
  const double zeros = truth.cwiseAbs().mean();
  CHECK(err < zeros);
  CHECK(err < 0.05);
}

TEST_CASE("inpaint rejects mismatched sizes") {
  const fs::path dir = scratch_dir();
  write_pgm((dir / "a.pgm").string(), Matrix::Ones(4, 4));
  write_pgm((dir / "b.pgm").string(), Matrix::Ones(4, 5));
  InpaintArgs args;
  args.image = (dir / "a.pgm").string();
  args.mask = (dir / "b.pgm").string();
  args.output = (dir / "c.pgm").string();
  CHECK_THROWS_AS(run_inpaint(args), ValidationError);
}

TEST_CASE("exit codes of the binary") {
  const fs::path dir = scratch_dir();
  spit(dir / "ok.csv", "1,2\n2,4\n3,6\n");
  spit(dir / "ragged.csv", "1,2\n3\n");
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("fit --input " + (dir / "ok.csv").string() + " --rank 1 --max-iters 3") == 0);
  CHECK(run_cli("fit --input " + (dir / "ragged.csv").string() + " --rank 1") == 1);
  CHECK(run_cli("fit --input " + (dir / "missing.csv").string() + " --rank 1") == 2);
  CHECK(run_cli("fit --input " + (dir / "ok.csv").string() + " --rank 0") == 1);
  CHECK(run_cli("fit --rank 1") == 1);
  CHECK(run_cli("fit --input " + (dir / "ok.csv").string() + " --rank 1 --method mog") == 1);
  spit(dir / "bad.json", R"({"replications": -1})");
  CHECK(run_cli("bench --config " + (dir / "bad.json").string()) == 1);
  CHECK(run_cli("bench --config " + (dir / "nothere.json").string()) == 2);
  CHECK(run_cli("fit --input " + (dir / "ok.csv").string() +
                " --rank 1 --report /nonexistent/dir/r.json") == 2);
}

}
