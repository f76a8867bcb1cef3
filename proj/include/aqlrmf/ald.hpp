#pragma once

#include <cstddef>
#include <vector>

#include "aqlrmf/rng.hpp"

namespace aqlrmf {

/// Parameters of an asymmetric Laplace distribution.
///
/// The density is
///   lambda*kappa*(1-kappa) * exp(-|x-alpha| * lambda * rho(x-alpha))
/// with rho(d) = kappa for d >= 0 and 1-kappa for d < 0. alpha is the mode and
/// kappa is the probability mass left of it.
class ALParams {
 public:
  /// Throws ValidationError unless scale > 0 and 0 < asymmetry < 1.
  ALParams(double location, double scale, double asymmetry);

  double location() const { return location_; }
  double scale() const { return scale_; }
  double asymmetry() const { return asymmetry_; }

 private:
  double location_;
  double scale_;
  double asymmetry_;
};

/// Quantile-loss slope for a residual: kappa if residual >= 0, else 1-kappa.
inline double check_slope(double residual, double kappa) {
  return residual >= 0.0 ? kappa : 1.0 - kappa;
}

double ald_pdf(double x, const ALParams& p);
/// Closed-form log density; stays finite far into the tails.
double ald_logpdf(double x, const ALParams& p);
double ald_cdf(double x, const ALParams& p);
/// Inverse CDF. Throws std::domain_error unless 0 < u < 1.
double ald_quantile(double u, const ALParams& p);
/// n i.i.d. draws by CDF inversion.
std::vector<double> ald_sample(std::size_t n, const ALParams& p, Rng& rng);

struct MoALComponent {
  double weight;     // mixing proportion pi_s
  double scale;      // lambda_s
  double asymmetry;  // kappa_s
};

/// Mixture of asymmetric Laplace distributions, every component located at 0.
class MoALModel {
 public:
  /// Throws ValidationError if empty, if any component is invalid, or if the
  /// weights do not sum to 1 within 1e-12.
  explicit MoALModel(std::vector<MoALComponent> components);

  std::size_t size() const { return components_.size(); }
  const std::vector<MoALComponent>& components() const { return components_; }
  const MoALComponent& operator[](std::size_t s) const { return components_[s]; }
  ALParams params(std::size_t s) const {
    return ALParams(0.0, components_[s].scale, components_[s].asymmetry);
  }

 private:
  std::vector<MoALComponent> components_;
};

/// log sum_s pi_s AL_s(x), evaluated with log-sum-exp.
double moal_logpdf(double x, const MoALModel& m);
std::vector<double> moal_sample(std::size_t n, const MoALModel& m, Rng& rng);

}  // namespace aqlrmf
