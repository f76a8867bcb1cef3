#pragma once

#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "aqlrmf/matrix.hpp"
#include "aqlrmf/rng.hpp"

namespace aqlrmf {

namespace noise {

struct None {};
struct Gaussian {
  double sigma;
};
struct Laplace {
  double location;
  double scale;  // b
};
struct StudentT {
  double df;
};
struct AsymmetricLaplace {
  double lambda;
  double kappa;
};
// Skew normal with location 0 and scale sigma; the shape is chosen so that
// P(X <= 0) = kappa.
struct SkewNormal {
  double sigma;
  double kappa;
};

using Basic = std::variant<None, Gaussian, Laplace, StudentT, AsymmetricLaplace, SkewNormal>;

struct Mixture {
  std::vector<std::pair<double, Basic>> parts;  // (probability, component)
};

}  // namespace noise

using NoiseSpec = std::variant<noise::None, noise::Gaussian, noise::Laplace, noise::StudentT,
                               noise::AsymmetricLaplace, noise::SkewNormal, noise::Mixture>;

/// Throws ValidationError if a scale is not positive, df < 1, kappa is outside
/// (0,1), or mixture probabilities are negative or do not sum to 1.
void validate(const NoiseSpec& spec);

/// Skew-normal shape a with P(X <= 0) = kappa, i.e. 1/2 - atan(a)/pi = kappa.
double skew_normal_shape(double kappa);

std::vector<double> sample_noise(const NoiseSpec& spec, std::size_t n, Rng& rng);

struct LowRank {
  FactorPair factors;
  Matrix product;
};

/// U (m x r) and V (n x r) with i.i.d. N(0,1) entries.
LowRank gen_lowrank(int m, int n, int r, Rng& rng);

/// Exactly round(fraction * m * n) false entries, uniformly placed.
Mask gen_mask(int m, int n, double missing_fraction, Rng& rng);

struct SyntheticInstance {
  Matrix ground_truth;
  FactorPair truth_factors;
  MaskedMatrix observed;  // noisy on observed entries, ground truth elsewhere
  int true_rank;
  NoiseSpec noise;
  std::uint64_t seed;

  // Reference for the error metrics: observed values where observed, clean
  // values elsewhere.
  const Matrix& noisy_reference() const { return observed.values(); }
};

SyntheticInstance make_instance(int m, int n, int r, double missing_fraction,
                                const NoiseSpec& spec, std::uint64_t seed);

}  // namespace aqlrmf
