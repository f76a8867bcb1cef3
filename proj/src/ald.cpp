#include "aqlrmf/ald.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "aqlrmf/errors.hpp"

namespace aqlrmf {

ALParams::ALParams(double location, double scale, double asymmetry)
    : location_(location), scale_(scale), asymmetry_(asymmetry) {
  if (!std::isfinite(location))
    throw ValidationError("ALD location must be finite");
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw ValidationError("ALD scale must be positive and finite, got " +
                          std::to_string(scale));
  if (!(asymmetry > 0.0 && asymmetry < 1.0))
    throw ValidationError("ALD asymmetry must lie in (0,1), got " +
                          std::to_string(asymmetry));
}

double ald_pdf(double x, const ALParams& p) {
  const double lambda = p.scale();
  const double kappa = p.asymmetry();
  const double d = x - p.location();
  return lambda * kappa * (1.0 - kappa) *
         std::exp(-std::abs(d) * lambda * check_slope(d, kappa));
}

double ald_logpdf(double x, const ALParams& p) {
  const double lambda = p.scale();
  const double kappa = p.asymmetry();
  const double d = x - p.location();
  return std::log(lambda) + std::log(kappa) + std::log1p(-kappa) -
         std::abs(d) * lambda * check_slope(d, kappa);
}

double ald_cdf(double x, const ALParams& p) {
  const double lambda = p.scale();
  const double kappa = p.asymmetry();
  const double d = x - p.location();
  if (d < 0.0) return kappa * std::exp(lambda * (1.0 - kappa) * d);
  return 1.0 - (1.0 - kappa) * std::exp(-lambda * kappa * d);
}

double ald_quantile(double u, const ALParams& p) {
  if (!(u > 0.0 && u < 1.0))
    throw std::domain_error("ALD quantile level must lie in (0,1)");
  const double lambda = p.scale();
  const double kappa = p.asymmetry();
  if (u < kappa) return p.location() + std::log(u / kappa) / (lambda * (1.0 - kappa));
  return p.location() - std::log((1.0 - u) / (1.0 - kappa)) / (lambda * kappa);
}

std::vector<double> ald_sample(std::size_t n, const ALParams& p, Rng& rng) {
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.push_back(ald_quantile(uniform_open(rng), p));
  return out;
}

MoALModel::MoALModel(std::vector<MoALComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw ValidationError("MoAL model needs at least one component");
  double total = 0.0;
  for (const auto& c : components_) {
    if (!(c.weight >= 0.0 && c.weight <= 1.0))
      throw ValidationError("MoAL mixing weight must lie in [0,1]");
    (void)ALParams(0.0, c.scale, c.asymmetry);
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw ValidationError("MoAL mixing weights must sum to 1");
}

double moal_logpdf(double x, const MoALModel& m) {
  double peak = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(m.size());
  for (std::size_t s = 0; s < m.size(); ++s) {
    terms[s] = std::log(m[s].weight) + ald_logpdf(x, m.params(s));
    peak = std::max(peak, terms[s]);
  }
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - peak);
  return peak + std::log(acc);
}

std::vector<double> moal_sample(std::size_t n, const MoALModel& m, Rng& rng) {
  std::vector<double> weights;
  weights.reserve(m.size());
  for (const auto& c : m.components()) weights.push_back(c.weight);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());

  std::vector<double> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t s = pick(rng);
    out.push_back(ald_quantile(uniform_open(rng), m.params(s)));
  }
  return out;
}

}  // namespace aqlrmf
