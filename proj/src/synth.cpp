#include "aqlrmf/synth.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "aqlrmf/ald.hpp"
#include "aqlrmf/errors.hpp"

namespace aqlrmf {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void validate_basic(const noise::Basic& spec) {
  std::visit(Overloaded{
                 [](const noise::None&) {},
                 [](const noise::Gaussian& g) {
                   if (!(g.sigma > 0.0)) throw ValidationError("Gaussian sigma must be positive");
                 },
                 [](const noise::Laplace& l) {
                   if (!(l.scale > 0.0)) throw ValidationError("Laplace scale must be positive");
                   if (!std::isfinite(l.location))
                     throw ValidationError("Laplace location must be finite");
                 },
                 [](const noise::StudentT& t) {
                   if (!(t.df >= 1.0)) throw ValidationError("Student-t df must be at least 1");
                 },
                 [](const noise::AsymmetricLaplace& a) { (void)ALParams(0.0, a.lambda, a.kappa); },
                 [](const noise::SkewNormal& sn) {
                   if (!(sn.sigma > 0.0)) throw ValidationError("skew-normal sigma must be positive");
                   if (!(sn.kappa > 0.0 && sn.kappa < 1.0))
                     throw ValidationError("skew-normal kappa must lie in (0,1)");
                 },
             },
             spec);
}

double draw_basic(const noise::Basic& spec, Rng& rng) {
  return std::visit(
      Overloaded{
          [](const noise::None&) { return 0.0; },
          [&](const noise::Gaussian& g) { return std::normal_distribution<double>(0.0, g.sigma)(rng); },
          [&](const noise::Laplace& l) {
            const double u = uniform_open(rng) - 0.5;
            return l.location - l.scale * std::copysign(1.0, u) * std::log1p(-2.0 * std::abs(u));
          },
          [&](const noise::StudentT& t) { return std::student_t_distribution<double>(t.df)(rng); },
          [&](const noise::AsymmetricLaplace& a) {
            return ald_quantile(uniform_open(rng), ALParams(0.0, a.lambda, a.kappa));
          },
          [&](const noise::SkewNormal& sn) {
            // X = sigma * (delta |Z0| + sqrt(1 - delta^2) Z1).
            const double shape = skew_normal_shape(sn.kappa);
            const double delta = shape / std::sqrt(1.0 + shape * shape);
            std::normal_distribution<double> normal(0.0, 1.0);
            const double z0 = normal(rng);
            const double z1 = normal(rng);
            return sn.sigma * (delta * std::abs(z0) + std::sqrt(1.0 - delta * delta) * z1);
          },
      },
      spec);
}

}  // namespace

void validate(const NoiseSpec& spec) {
  if (const auto* mix = std::get_if<noise::Mixture>(&spec)) {
    if (mix->parts.empty()) throw ValidationError("mixture noise needs at least one component");
    double total = 0.0;
    for (const auto& [p, part] : mix->parts) {
      if (!(p >= 0.0)) throw ValidationError("mixture probabilities must be nonnegative");
      validate_basic(part);
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ValidationError("mixture probabilities must sum to 1");
    return;
  }
  std::visit(Overloaded{[](const noise::Mixture&) {},
                        [](const auto& basic) { validate_basic(noise::Basic(basic)); }},
             spec);
}

double skew_normal_shape(double kappa) {
  if (!(kappa > 0.0 && kappa < 1.0)) throw ValidationError("skew-normal kappa must lie in (0,1)");
  return std::tan(std::numbers::pi * (0.5 - kappa));
}

std::vector<double> sample_noise(const NoiseSpec& spec, std::size_t n, Rng& rng) {
  validate(spec);
  std::vector<double> out;
  out.reserve(n);
  if (const auto* mix = std::get_if<noise::Mixture>(&spec)) {
    std::vector<double> probs;
    for (const auto& part : mix->parts) probs.push_back(part.first);
    std::discrete_distribution<std::size_t> pick(probs.begin(), probs.end());
    for (std::size_t k = 0; k < n; ++k) out.push_back(draw_basic(mix->parts[pick(rng)].second, rng));
    return out;
  }
  const noise::Basic basic = std::visit(
      Overloaded{[](const noise::Mixture&) { return noise::Basic{}; },
                 [](const auto& b) { return noise::Basic(b); }},
      spec);
  for (std::size_t k = 0; k < n; ++k) out.push_back(draw_basic(basic, rng));
  return out;
}

LowRank gen_lowrank(int m, int n, int r, Rng& rng) {
  if (m < 1 || n < 1 || r < 1) throw ValidationError("dimensions and rank must be positive");
  if (r > std::min(m, n)) throw ValidationError("rank exceeds min(m, n)");
  std::normal_distribution<double> normal(0.0, 1.0);
  FactorPair F{Matrix(m, r), Matrix(n, r)};
  for (Eigen::Index k = 0; k < F.U.size(); ++k) F.U.data()[k] = normal(rng);
  for (Eigen::Index k = 0; k < F.V.size(); ++k) F.V.data()[k] = normal(rng);
  Matrix product = F.product();
  return {std::move(F), std::move(product)};
}

Mask gen_mask(int m, int n, double missing_fraction, Rng& rng) {
  if (m < 1 || n < 1) throw ValidationError("mask dimensions must be positive");
  if (!(missing_fraction >= 0.0 && missing_fraction < 1.0))
    throw ValidationError("missing fraction must lie in [0,1)");
  const auto total = static_cast<std::size_t>(m) * static_cast<std::size_t>(n);
  const auto missing =
      static_cast<std::size_t>(std::llround(missing_fraction * static_cast<double>(total)));

  // Partial Fisher-Yates: the first `missing` slots become the hidden cells.
  std::vector<std::size_t> cells(total);
  std::iota(cells.begin(), cells.end(), std::size_t{0});
  Mask mask = Mask::Constant(m, n, true);
  for (std::size_t k = 0; k < missing; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, total - 1);
    std::swap(cells[k], cells[pick(rng)]);
    mask.data()[cells[k]] = false;
  }
  return mask;
}

SyntheticInstance make_instance(int m, int n, int r, double missing_fraction,
                                const NoiseSpec& spec, std::uint64_t seed) {
  validate(spec);
  Rng rng(seed);
  LowRank lr = gen_lowrank(m, n, r, rng);
  Mask mask = gen_mask(m, n, missing_fraction, rng);

  std::size_t observed = 0;
  for (Eigen::Index k = 0; k < mask.size(); ++k) observed += mask.data()[k] ? 1 : 0;
  const std::vector<double> eps = sample_noise(spec, observed, rng);

  Matrix values = lr.product;
  std::size_t next = 0;
  for (Eigen::Index k = 0; k < values.size(); ++k)
    if (mask.data()[k]) values.data()[k] += eps[next++];

  return SyntheticInstance{lr.product,
                           std::move(lr.factors),
                           MaskedMatrix(std::move(values), std::move(mask)),
                           r,
                           spec,
                           seed};
}

}  // namespace aqlrmf
