#include "aqlrmf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "aqlrmf/errors.hpp"

namespace aqlrmf {
namespace {

Matrix deviations(const Matrix& reference, const FactorPair& F) {
  F.validate();
  if (F.U.rows() != reference.rows() || F.V.rows() != reference.cols())
    throw ValidationError("factor shapes do not match the reference matrix");
  return reference - F.product();
}

}  // namespace

double l1_error(const Matrix& reference, const FactorPair& F) {
  return deviations(reference, F).cwiseAbs().mean();
}

double l2_error(const Matrix& reference, const FactorPair& F) {
  return std::sqrt(deviations(reference, F).array().square().mean());
}

ErrorPair reconstruction_errors(const Matrix& reference, const FactorPair& F) {
  const Matrix d = deviations(reference, F);
  return {d.cwiseAbs().mean(), std::sqrt(d.array().square().mean())};
}

ErrorPair observed_errors(const MaskedMatrix& X, const FactorPair& F) {
  const Vector e = observed_residuals(X, F);
  return {e.cwiseAbs().mean(), std::sqrt(e.array().square().mean())};
}

double sample_skewness(std::span<const double> xs) {
  if (xs.size() < 3) throw std::domain_error("skewness needs at least 3 values");
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  if (*lo == *hi) throw std::domain_error("skewness is undefined for zero variance");
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double m2 = 0.0;
  double m3 = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  if (!(m2 > 0.0)) throw std::domain_error("skewness is undefined for zero variance");
  return m3 / std::pow(m2, 1.5);
}

}  // namespace aqlrmf
