#include <cmath>
#include <random>

#include "doctest.h"

#include "aqlrmf/ald.hpp"
#include "aqlrmf/errors.hpp"
#include "aqlrmf/metrics.hpp"
#include "support.hpp"

using namespace aqlrmf;

TEST_SUITE("ald") {

TEST_CASE("parameters are validated at construction") {
  CHECK_THROWS_AS(ALParams(0.0, 0.0, 0.5), ValidationError);
  CHECK_THROWS_AS(ALParams(0.0, -1.0, 0.5), ValidationError);
  CHECK_THROWS_AS(ALParams(0.0, 1.0, 0.0), ValidationError);
  CHECK_THROWS_AS(ALParams(0.0, 1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(ALParams(0.0, 1.0, std::nan("")), ValidationError);
  CHECK_NOTHROW(ALParams(-3.0, 1e-3, 0.999));
}

TEST_CASE("pdf at the mode") {
  CHECK(ald_pdf(0.0, ALParams(0.0, 1.0, 0.5)) == doctest::Approx(0.25).epsilon(1e-15));
  const ALParams p(1.7, 3.0, 0.2);
  CHECK(ald_pdf(1.7, p) == doctest::Approx(3.0 * 0.2 * 0.8).epsilon(1e-15));
}

TEST_CASE("pdf with kappa 0.5 is a Laplace density with b = 2 / lambda") {
  const ALParams p(0.0, 1.0, 0.5);
  const double b = 2.0;
  for (double x : {-3.0, -0.4, 0.0, 2.0, 5.5}) {
    const double laplace = std::exp(-std::abs(x) / b) / (2.0 * b);
    CHECK(ald_pdf(x, p) == doctest::Approx(laplace).epsilon(1e-14));
  }
  CHECK(ald_pdf(2.0, p) == doctest::Approx(0.25 * std::exp(-1.0)).epsilon(1e-14));
}

TEST_CASE("pdf is maximal at the mode and continuous there") {
  const ALParams p(0.5, 2.0, 0.3);
  const double peak = ald_pdf(0.5, p);
  for (double d : {1e-9, 1e-3, 0.5, 4.0}) {
    CHECK(ald_pdf(0.5 + d, p) < peak);
    CHECK(ald_pdf(0.5 - d, p) < peak);
  }
  CHECK(ald_pdf(std::nextafter(0.5, 0.0), p) == doctest::Approx(peak).epsilon(1e-12));
}

TEST_CASE("logpdf is the closed-form log of the pdf") {
  CHECK(ald_logpdf(0.0, ALParams(0.0, 1.0, 0.5)) == doctest::Approx(std::log(0.25)));
  const ALParams p(2.0, 4.0, 0.85);
  CHECK(ald_logpdf(2.0, p) == doctest::Approx(std::log(4.0 * 0.85 * 0.15)));
  // Far tail: the pdf underflows but the log density stays exact.
  const double far = ald_logpdf(1000.0, ALParams(0.0, 1.0, 0.5));
  CHECK(std::isfinite(far));
  CHECK(far == doctest::Approx(-500.0 + std::log(0.25)).epsilon(1e-14));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> x(-5.0, 5.0), k(0.05, 0.95), l(0.1, 5.0);
  for (int t = 0; t < 200; ++t) {
    const ALParams q(x(rng), l(rng), k(rng));
    const double at = x(rng);
    CHECK(ald_logpdf(at, q) == doctest::Approx(std::log(ald_pdf(at, q))).epsilon(1e-12));
  }
}

TEST_CASE("cdf values") {
  const ALParams p(0.3, 2.0, 0.6);
  CHECK(ald_cdf(0.3, p) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(ald_cdf(-1e6, p) == doctest::Approx(0.0));
  CHECK(ald_cdf(1e6, p) == doctest::Approx(1.0));
  const ALParams q(0.0, 2.0, 0.3);
  const double expected = 1.0 - 0.7 * std::exp(-0.6);
  CHECK(ald_cdf(1.0, q) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(oracle::ald_cdf_quadrature(1.0, 0.0, 2.0, 0.3) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("pdf integrates to one and cdf matches quadrature") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> a(-3.0, 3.0), l(0.2, 5.0), k(0.05, 0.95);
  for (int t = 0; t < 25; ++t) {
    const double alpha = a(rng), lambda = l(rng), kappa = k(rng);
    CHECK(oracle::ald_mass(alpha, lambda, kappa) == doctest::Approx(1.0).epsilon(1e-6));
    const double x = alpha + a(rng);
    CHECK(std::abs(ald_cdf(x, ALParams(alpha, lambda, kappa)) -
                   oracle::ald_cdf_quadrature(x, alpha, lambda, kappa)) < 1e-8);
  }
}

TEST_CASE("cdf is monotone") {
  const ALParams p(0.0, 1.5, 0.25);
  double prev = 0.0;
  for (double x = -20.0; x <= 20.0; x += 0.01) {
    const double F = ald_cdf(x, p);
    CHECK(F >= prev);
    prev = F;
  }
}

TEST_CASE("quantile") {
  const ALParams p(0.0, 1.0, 0.7);
  CHECK(ald_quantile(0.7, p) == 0.0);
  CHECK(ald_cdf(ald_quantile(0.123, p), p) == doctest::Approx(0.123).epsilon(1e-12));
  const ALParams sym(0.0, 1.0, 0.5);
  const double expected = -2.0 * std::log(0.2);
  CHECK(ald_quantile(0.9, sym) == doctest::Approx(expected).epsilon(1e-14));
  const double by_bisection =
      oracle::bisect([&](double x) { return ald_cdf(x, sym) - 0.9; }, -50.0, 50.0);
  CHECK(ald_quantile(0.9, sym) == doctest::Approx(by_bisection).epsilon(1e-12));
  CHECK_THROWS_AS(ald_quantile(0.0, p), std::domain_error);
  CHECK_THROWS_AS(ald_quantile(1.0, p), std::domain_error);
  CHECK_THROWS_AS(ald_quantile(-0.5, p), std::domain_error);
  for (double u = 0.001; u < 1.0; u += 0.001)
    CHECK(std::abs(ald_cdf(ald_quantile(u, p), p) - u) < 1e-10);
}

TEST_CASE("sampling") {
  Rng rng(5);
  CHECK(ald_sample(0, ALParams(0.0, 1.0, 0.5), rng).empty());

  const std::size_t n = 100000;
  Rng a(1), b(1);
  const auto xs = ald_sample(n, ALParams(0.0, 1.0, 0.7), a);
  CHECK(xs == ald_sample(n, ALParams(0.0, 1.0, 0.7), b));
  double below = 0.0;
  for (double x : xs) below += x < 0.0;
  CHECK(below / n == doctest::Approx(0.7).epsilon(0.005 / 0.7));

  Rng c(2);
  const auto ys = ald_sample(n, ALParams(0.0, 1.0, 0.5), c);
  double mean_abs = 0.0;
  for (double y : ys) mean_abs += std::abs(y);
  CHECK(mean_abs / n == doctest::Approx(2.0).epsilon(0.03 / 2.0));

  const ALParams p(1.0, 2.0, 0.3);
  Rng d(4);
  const auto zs = ald_sample(n, p, d);
  CHECK(oracle::ks_distance(zs, [&](double x) { return ald_cdf(x, p); }) <
        oracle::ks_critical(n, 1e-3));
}

TEST_CASE("sample skewness sign follows kappa") {
  const std::size_t n = 1000000;
  Rng rng(8);
  CHECK(sample_skewness(ald_sample(n, ALParams(0.0, 1.0, 0.2), rng)) > 0.0);
  CHECK(sample_skewness(ald_sample(n, ALParams(0.0, 1.0, 0.8), rng)) < 0.0);
  CHECK(std::abs(sample_skewness(ald_sample(n, ALParams(0.0, 1.0, 0.5), rng))) < 0.05);
}

TEST_CASE("mixture model validation") {
  CHECK_THROWS_AS(MoALModel({}), ValidationError);
  CHECK_THROWS_AS(MoALModel({{0.5, 1.0, 0.5}, {0.4, 1.0, 0.5}}), ValidationError);
  CHECK_THROWS_AS(MoALModel({{1.0, 0.0, 0.5}}), ValidationError);
  CHECK_THROWS_AS(MoALModel({{1.0, 1.0, 1.0}}), ValidationError);
  CHECK_NOTHROW(MoALModel({{0.25, 1.0, 0.5}, {0.75, 3.0, 0.1}}));
}

TEST_CASE("mixture log density") {
  const MoALModel one({{1.0, 2.0, 0.3}});
  for (double x : {-2.0, 0.0, 0.7})
    CHECK(moal_logpdf(x, one) == doctest::Approx(ald_logpdf(x, ALParams(0.0, 2.0, 0.3))));

  const MoALModel twin({{0.5, 2.0, 0.3}, {0.5, 2.0, 0.3}});
  CHECK(moal_logpdf(1.1, twin) == doctest::Approx(moal_logpdf(1.1, one)).epsilon(1e-14));

  const MoALModel m({{0.5, 1.0, 0.5}, {0.5, 2.0, 0.7}});
  const double direct = std::log(0.5 * oracle::ald_density(0.3, 0.0, 1.0, 0.5) +
                                 0.5 * oracle::ald_density(0.3, 0.0, 2.0, 0.7));
  CHECK(moal_logpdf(0.3, m) == doctest::Approx(direct).epsilon(1e-14));

  const MoALModel spiky({{0.5, 1e6, 0.5}, {0.5, 1e-3, 0.5}});
  for (double x : {-1e8, -50.0, 0.0, 1e-3, 1e4, 1e12}) {
    const double v = moal_logpdf(x, spiky);
    CHECK(std::isfinite(v));
  }
}

TEST_CASE("mixture sampling") {
  Rng rng(9);
  const MoALModel m({{0.3, 1.0, 0.5}, {0.7, 5.0, 0.5}});
  CHECK(moal_sample(0, m, rng).empty());
  const std::size_t n = 100000;
  const auto xs = moal_sample(n, m, rng);
  double mean_abs = 0.0;
  for (double x : xs) mean_abs += std::abs(x);
  CHECK(std::abs(mean_abs / n - 0.88) < 0.02);

  const MoALModel one({{1.0, 2.0, 0.3}});
  Rng a(12);
  const auto ys = moal_sample(n, one, a);
  CHECK(oracle::ks_distance(ys, [](double x) { return ald_cdf(x, ALParams(0.0, 2.0, 0.3)); }) <
        oracle::ks_critical(n, 1e-3));
}

}
