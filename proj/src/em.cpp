#include "aqlrmf/em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "aqlrmf/errors.hpp"

namespace aqlrmf {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> component_masses(const Responsibilities& G) {
  std::vector<double> mass(static_cast<std::size_t>(G.components()), 0.0);
  for (Eigen::Index s = 0; s < G.components(); ++s) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < G.entries(); ++k) acc += G.gamma(k, s);
    mass[static_cast<std::size_t>(s)] = acc;
  }
  return mass;
}

double median_abs_observed(const MaskedMatrix& X) {
  std::vector<double> mags;
  mags.reserve(X.observed_count());
  for (const auto& [i, j] : X.entries()) mags.push_back(std::abs(X.values()(i, j)));
  const std::size_t mid = mags.size() / 2;
  std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(mid), mags.end());
  const double upper = mags[mid];
  if (mags.size() % 2 == 1) return upper;
  const double lower =
      *std::max_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

void check_dims(const MaskedMatrix& X, const FactorPair& F) {
  F.validate();
  if (F.U.rows() != X.rows() || F.V.rows() != X.cols())
    throw ValidationError("factor shapes do not match data");
}

double loglik_from_residuals(const Vector& e, const MoALModel& m) {
  double total = 0.0;
  for (Eigen::Index k = 0; k < e.size(); ++k) total += moal_logpdf(e(k), m);
  return total;
}

}  // namespace

void FitOptions::validate() const {
  if (rank < 1) throw ValidationError("rank must be at least 1");
  if (components < 1) throw ValidationError("number of components must be at least 1");
  if (max_iterations < 1) throw ValidationError("max_iterations must be positive");
  if (!(convergence_epsilon > 0.0)) throw ValidationError("convergence_epsilon must be positive");
  if (!(lambda_max > 0.0)) throw ValidationError("lambda_max must be positive");
  if (!(eta_epsilon > 0.0)) throw ValidationError("eta_epsilon must be positive");
  inner.validate();
}

FactorPair init_factors(const MaskedMatrix& X, int rank, Rng& rng) {
  if (rank < 1) throw ValidationError("rank must be at least 1");
  const double xbar = std::max(median_abs_observed(X), 1e-8);
  const double c = std::sqrt(xbar / rank);
  std::normal_distribution<double> normal(0.0, 1.0);
  FactorPair F{Matrix(X.rows(), rank), Matrix(X.cols(), rank)};
  for (Eigen::Index k = 0; k < F.U.size(); ++k) F.U.data()[k] = 2.0 * normal(rng) * c - c;
  for (Eigen::Index k = 0; k < F.V.size(); ++k) F.V.data()[k] = 2.0 * normal(rng) * c - c;
  return F;
}

MoALModel init_model(int components, Rng& rng) {
  if (components < 1) throw ValidationError("number of components must be at least 1");
  std::uniform_real_distribution<double> param(0.05, 0.95);
  std::vector<MoALComponent> comps(static_cast<std::size_t>(components));
  double total = 0.0;
  for (auto& c : comps) {
    c.scale = param(rng);
    c.asymmetry = param(rng);
    c.weight = uniform_open(rng);
    total += c.weight;
  }
  for (auto& c : comps) c.weight /= total;
  return MoALModel(std::move(comps));
}

Responsibilities e_step(const Vector& residuals, const MoALModel& m) {
  const auto S = static_cast<Eigen::Index>(m.size());
  std::vector<double> log_weight(m.size());
  std::vector<ALParams> params;
  params.reserve(m.size());
  for (std::size_t s = 0; s < m.size(); ++s) {
    log_weight[s] = std::log(m[s].weight);
    params.push_back(m.params(s));
  }

  Responsibilities G{Matrix(residuals.size(), S)};
  std::vector<double> terms(m.size());
  for (Eigen::Index k = 0; k < residuals.size(); ++k) {
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < m.size(); ++s) {
      terms[s] = log_weight[s] + ald_logpdf(residuals(k), params[s]);
      peak = std::max(peak, terms[s]);
    }
    double acc = 0.0;
    for (double& t : terms) {
      t = std::exp(t - peak);
      acc += t;
    }
    for (Eigen::Index s = 0; s < S; ++s) G.gamma(k, s) = terms[static_cast<std::size_t>(s)] / acc;
  }
  return G;
}

Responsibilities e_step(const MaskedMatrix& X, const FactorPair& F, const MoALModel& m) {
  check_dims(X, F);
  return e_step(observed_residuals(X, F), m);
}

std::vector<double> update_pi(const Responsibilities& G) {
  std::vector<double> pi = component_masses(G);
  double total = 0.0;
  for (double v : pi) total += v;
  for (double& v : pi) v /= total;
  return pi;
}

Matrix slope_matrix(const Vector& residuals, const std::vector<double>& kappas) {
  Matrix rho(residuals.size(), static_cast<Eigen::Index>(kappas.size()));
  for (Eigen::Index s = 0; s < rho.cols(); ++s)
    for (Eigen::Index k = 0; k < rho.rows(); ++k)
      rho(k, s) = check_slope(residuals(k), kappas[static_cast<std::size_t>(s)]);
  return rho;
}

std::vector<double> update_lambda(const Responsibilities& G, const Vector& residuals,
                                  const Matrix& rho, double lambda_max) {
  const std::vector<double> mass = component_masses(G);
  std::vector<double> lambdas(mass.size());
  for (Eigen::Index s = 0; s < G.components(); ++s) {
    const auto su = static_cast<std::size_t>(s);
    double denom = 0.0;
    for (Eigen::Index k = 0; k < G.entries(); ++k)
      denom += rho(k, s) * G.gamma(k, s) * std::abs(residuals(k));
    if (!(mass[su] > 0.0)) {
      lambdas[su] = kNaN;
    } else if (!(denom > 0.0)) {
      lambdas[su] = lambda_max;
    } else {
      const double lambda = std::min(mass[su] / denom, lambda_max);
      lambdas[su] = lambda > 0.0 ? lambda : kNaN;
    }
  }
  return lambdas;
}

double solve_kappa(double mass, double eta, double eta_epsilon) {
  if (std::abs(eta) < eta_epsilon) return 0.5;
  // (2N + eta - sqrt(4N^2 + eta^2)) / (2 eta), rewritten without cancellation.
  const double root = std::hypot(2.0 * mass, eta);
  double kappa;
  if (eta > 0.0) {
    kappa = 2.0 * mass / (2.0 * mass + eta + root);
  } else {
    kappa = 2.0 * mass / (2.0 * mass + 4.0 * mass * mass / (root - eta));
  }
  return std::clamp(kappa, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

std::vector<double> update_kappa(const Responsibilities& G, const Vector& residuals,
                                 const std::vector<double>& lambdas, double eta_epsilon) {
  const std::vector<double> mass = component_masses(G);
  std::vector<double> kappas(mass.size());
  for (Eigen::Index s = 0; s < G.components(); ++s) {
    const auto su = static_cast<std::size_t>(s);
    if (!(mass[su] > 0.0) || !(lambdas[su] > 0.0)) {
      kappas[su] = kNaN;
      continue;
    }
    double acc = 0.0;
    for (Eigen::Index k = 0; k < G.entries(); ++k) acc += G.gamma(k, s) * residuals(k);
    kappas[su] = solve_kappa(mass[su], lambdas[su] * acc, eta_epsilon);
  }
  return kappas;
}

WeightMatrix compute_weights(const MaskedMatrix& X, const Responsibilities& G,
                             const MoALModel& m, const Vector& residuals) {
  Matrix w = Matrix::Zero(X.rows(), X.cols());
  const auto& entries = X.entries();
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto ki = static_cast<Eigen::Index>(k);
    double acc = 0.0;
    for (std::size_t s = 0; s < m.size(); ++s)
      acc += m[s].scale * G.gamma(ki, static_cast<Eigen::Index>(s)) *
             check_slope(residuals(ki), m[s].asymmetry);
    w(entries[k].row, entries[k].col) = acc;
  }
  return WeightMatrix(std::move(w), X);
}

std::pair<WeightMatrix, WeightMatrix> check_loss_weights(const MaskedMatrix& X,
                                                         const Responsibilities& G,
                                                         const MoALModel& m) {
  Matrix pos = Matrix::Zero(X.rows(), X.cols());
  Matrix neg = Matrix::Zero(X.rows(), X.cols());
  const auto& entries = X.entries();
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto ki = static_cast<Eigen::Index>(k);
    double a = 0.0;
    double b = 0.0;
    for (std::size_t s = 0; s < m.size(); ++s) {
      const double g = m[s].scale * G.gamma(ki, static_cast<Eigen::Index>(s));
      a += g * m[s].asymmetry;
      b += g * (1.0 - m[s].asymmetry);
    }
    pos(entries[k].row, entries[k].col) = a;
    neg(entries[k].row, entries[k].col) = b;
  }
  return {WeightMatrix(std::move(pos), X), WeightMatrix(std::move(neg), X)};
}

std::pair<MoALModel, Responsibilities> prune_components(const Responsibilities& G,
                                                        const MoALModel& m) {
  std::vector<bool> wins(m.size(), false);
  for (Eigen::Index k = 0; k < G.entries(); ++k) {
    Eigen::Index best = 0;
    G.gamma.row(k).maxCoeff(&best);
    wins[static_cast<std::size_t>(best)] = true;
  }
  if (std::all_of(wins.begin(), wins.end(), [](bool w) { return w; })) return {m, G};

  std::vector<Eigen::Index> keep;
  double kept_weight = 0.0;
  for (std::size_t s = 0; s < m.size(); ++s) {
    if (!wins[s]) continue;
    keep.push_back(static_cast<Eigen::Index>(s));
    kept_weight += m[s].weight;
  }

  std::vector<MoALComponent> comps;
  for (Eigen::Index s : keep) {
    MoALComponent c = m[static_cast<std::size_t>(s)];
    c.weight /= kept_weight;
    comps.push_back(c);
  }
  Responsibilities out{Matrix(G.entries(), static_cast<Eigen::Index>(keep.size()))};
  for (std::size_t t = 0; t < keep.size(); ++t)
    out.gamma.col(static_cast<Eigen::Index>(t)) = G.gamma.col(keep[t]);
  for (Eigen::Index k = 0; k < out.entries(); ++k) {
    double acc = 0.0;
    for (Eigen::Index t = 0; t < out.components(); ++t) acc += out.gamma(k, t);
    out.gamma.row(k) /= acc;
  }
  return {MoALModel(std::move(comps)), std::move(out)};
}

double observed_loglik(const MaskedMatrix& X, const FactorPair& F, const MoALModel& m) {
  check_dims(X, F);
  return loglik_from_residuals(observed_residuals(X, F), m);
}

FitResult fit(const MaskedMatrix& X, const FitOptions& opts, std::uint64_t seed) {
  opts.validate();
  Rng rng(seed);
  FactorPair F = init_factors(X, opts.rank, rng);
  MoALModel model = init_model(opts.components, rng);

  FitReport report;
  report.seed = seed;

  Vector e = observed_residuals(X, F);
  Responsibilities G = e_step(e, model);

  for (int it = 1; it <= opts.max_iterations; ++it) {
    const Matrix previous_u = F.U;

    // M-step 1: pi, then lambda at the current kappa, then kappa at the new lambda.
    const std::vector<double> pi = update_pi(G);
    std::vector<double> kappas;
    for (const auto& c : model.components()) kappas.push_back(c.asymmetry);
    const std::vector<double> lambdas =
        update_lambda(G, e, slope_matrix(e, kappas), opts.lambda_max);
    const std::vector<double> next_kappas = update_kappa(G, e, lambdas, opts.eta_epsilon);
    std::vector<MoALComponent> comps = model.components();
    for (std::size_t s = 0; s < comps.size(); ++s) {
      comps[s].weight = pi[s];
      if (!std::isnan(lambdas[s])) comps[s].scale = lambdas[s];
      if (!std::isnan(next_kappas[s])) comps[s].asymmetry = next_kappas[s];
    }
    model = MoALModel(std::move(comps));

    G = e_step(e, model);

    // M-step 2: weighted L1 factorization.
    const WeightMatrix W = compute_weights(X, G, model, e);
    if (opts.monotone_fallback) {
      const double before = loglik_from_residuals(e, model);
      FactorPair next = solve_wl1(X, W, F, opts.inner);
      if (observed_loglik(X, next, model) < before) {
        // The frozen-sign weights do not bound the check loss once a residual
        // changes sign; the check-loss step cannot lower the likelihood.
        const auto [pos, neg] = check_loss_weights(X, G, model);
        next = solve_check_wl1(X, pos, neg, std::move(F), opts.inner);
        ++report.fallback_steps;
      }
      F = std::move(next);
    } else {
      F = solve_wl1(X, W, std::move(F), opts.inner);
    }

    e = observed_residuals(X, F);
    G = e_step(e, model);
    report.loglik_trace.push_back(loglik_from_residuals(e, model));

    std::tie(model, G) = prune_components(G, model);
    report.iterations = it;

    if ((F.U - previous_u).norm() < opts.convergence_epsilon) {
      report.converged = true;
      break;
    }
  }
  report.final_components = static_cast<int>(model.size());
  return FitResult{std::move(F), std::move(model), std::move(report)};
}

BaselineResult fit_cwm_uniform(const MaskedMatrix& X, const FitOptions& opts, std::uint64_t seed) {
  opts.validate();
  Rng rng(seed);
  BaselineResult out{init_factors(X, opts.rank, rng)};
  const WeightMatrix W = WeightMatrix::uniform(X);
  for (int it = 1; it <= opts.max_iterations; ++it) {
    const Matrix previous_u = out.factors.U;
    out.factors = solve_wl1(X, W, std::move(out.factors), opts.inner);
    out.iterations = it;
    if ((out.factors.U - previous_u).norm() < opts.convergence_epsilon) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace aqlrmf
