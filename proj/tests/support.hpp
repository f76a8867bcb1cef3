#pragma once

// Independent oracles shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "aqlrmf/ald.hpp"
#include "aqlrmf/matrix.hpp"

namespace oracle {

// Integral of f over [a, b], adaptive Gauss-Kronrod.
inline double integrate(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-13);
}

// The ALD density written out from its definition, without the library.
inline double ald_density(double x, double alpha, double lambda, double kappa) {
  const double d = x - alpha;
  const double slope = d >= 0.0 ? kappa : 1.0 - kappa;
  return lambda * kappa * (1.0 - kappa) * std::exp(-std::abs(d) * lambda * slope);
}

// Quadrature of the density over alpha +- 50 / (lambda * min(kappa, 1 - kappa)),
// split at the kink.
inline double ald_mass(double alpha, double lambda, double kappa) {
  const double reach = 50.0 / (lambda * std::min(kappa, 1.0 - kappa));
  auto f = [&](double x) { return ald_density(x, alpha, lambda, kappa); };
  return integrate(f, alpha - reach, alpha) + integrate(f, alpha, alpha + reach);
}

// P(X <= x) by quadrature from far in the left tail.
inline double ald_cdf_quadrature(double x, double alpha, double lambda, double kappa) {
  const double reach = 60.0 / (lambda * (1.0 - kappa));
  auto f = [&](double t) { return ald_density(t, alpha, lambda, kappa); };
  if (x <= alpha) return integrate(f, alpha - reach, x);
  return integrate(f, alpha - reach, alpha) + integrate(f, alpha, x);
}

// Root of a monotone increasing function on [lo, hi] by plain bisection.
inline double bisect(const std::function<double(double)>& g, double lo, double hi) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) < 0.0) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Kolmogorov-Smirnov distance between the sample and a continuous CDF.
inline double ks_distance(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double F = cdf(xs[k]);
    d = std::max({d, F - static_cast<double>(k) / n, static_cast<double>(k + 1) / n - F});
  }
  return d;
}

// Asymptotic KS critical distance at significance alpha.
inline double ks_critical(std::size_t n, double alpha) {
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
}

inline double weighted_abs_sum(double v, const std::vector<double>& a, const std::vector<double>& w) {
  double f = 0.0;
  for (std::size_t l = 0; l < a.size(); ++l) f += w[l] * std::abs(v - a[l]);
  return f;
}

// Smallest value of min_v sum w|v - a| over every candidate value.
inline double brute_force_l1_min(const std::vector<double>& a, const std::vector<double>& w) {
  double best = std::numeric_limits<double>::infinity();
  for (double v : a) best = std::min(best, weighted_abs_sum(v, a, w));
  return best;
}

// Minimum of a convex piecewise-linear function of one scalar found by
// scanning a grid over [lo, hi] and refining around the best point.
inline double grid_minimum(const std::function<double(double)>& f, double lo, double hi) {
  double best_x = lo;
  double best = f(lo);
  for (int round = 0; round < 6; ++round) {
    const int steps = 2000;
    const double h = (hi - lo) / steps;
    for (int k = 0; k <= steps; ++k) {
      const double x = lo + h * k;
      const double v = f(x);
      if (v < best) {
        best = v;
        best_x = x;
      }
    }
    lo = best_x - 2.0 * h;
    hi = best_x + 2.0 * h;
  }
  return best;
}

// sum over observed entries of w |x - u v^T|, from scratch.
inline double weighted_l1(const aqlrmf::MaskedMatrix& X, const aqlrmf::Matrix& W,
                          const aqlrmf::Matrix& U, const aqlrmf::Matrix& V) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      if (!X.observed(i, j)) continue;
      double p = 0.0;
      for (Eigen::Index k = 0; k < U.cols(); ++k) p += U(i, k) * V(j, k);
      total += W(i, j) * std::abs(X.values()(i, j) - p);
    }
  return total;
}

}  // namespace oracle
