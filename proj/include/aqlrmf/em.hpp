#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "aqlrmf/ald.hpp"
#include "aqlrmf/cwm.hpp"
#include "aqlrmf/matrix.hpp"
#include "aqlrmf/rng.hpp"

namespace aqlrmf {

// Posterior component memberships gamma. One row per observed entry, in
// MaskedMatrix::entries() order; one column per mixture component.
struct Responsibilities {
  Matrix gamma;

  Eigen::Index entries() const { return gamma.rows(); }
  Eigen::Index components() const { return gamma.cols(); }
};

struct FitOptions {
  int rank = 1;
  int components = 4;
  int max_iterations = 100;
  // Outer loop stops once ||U_new - U_old||_F drops below this.
  double convergence_epsilon = 1e-50;
  double lambda_max = 1e6;
  double eta_epsilon = 1e-12;
  WL1Options inner;
  // When the weighted-L1 step of M-step 2 lowers the observed log-likelihood,
  // redo it from the previous factors on the sign-dependent check loss.
  bool monotone_fallback = true;

  void validate() const;
};

struct FitReport {
  int iterations = 0;
  // Observed-data log-likelihood after each outer iteration's last E-step.
  std::vector<double> loglik_trace;
  int final_components = 0;
  bool converged = false;
  // Iterations where the check-loss fallback replaced the weighted-L1 step.
  int fallback_steps = 0;
  std::uint64_t seed = 0;
};

struct FitResult {
  FactorPair factors;
  MoALModel model;
  FitReport report;
};

/// Random start: every entry is 2*xi*c - c with xi ~ N(0,1) and
/// c = sqrt(xbar / r), xbar the median of |observed entries| (floored at 1e-8).
FactorPair init_factors(const MaskedMatrix& X, int rank, Rng& rng);

/// lambda_s, kappa_s ~ U(0.05, 0.95); pi_s uniform then normalized.
MoALModel init_model(int components, Rng& rng);

Responsibilities e_step(const MaskedMatrix& X, const FactorPair& F, const MoALModel& m);
/// Same, from precomputed observed residuals.
Responsibilities e_step(const Vector& residuals, const MoALModel& m);

/// pi_s = N_s / N.
std::vector<double> update_pi(const Responsibilities& G);

/// rho(k, s): the quantile-loss slope of residual k under component s.
Matrix slope_matrix(const Vector& residuals, const std::vector<double>& kappas);

/// lambda_s = N_s / sum_k rho_ks gamma_ks |e_k|, capped at lambda_max. A zero
/// denominator yields lambda_max. A component with N_s == 0 gets NaN, which
/// callers treat as "keep the old value".
std::vector<double> update_lambda(const Responsibilities& G, const Vector& residuals,
                                  const Matrix& rho, double lambda_max);

/// Root in (0,1) of eta k^2 - (2N + eta) k + N = 0.
double solve_kappa(double mass, double eta, double eta_epsilon);

/// kappa_s from eta_s = lambda_s * sum_k gamma_ks e_k. Components with
/// N_s == 0 get NaN, as for update_lambda.
std::vector<double> update_kappa(const Responsibilities& G, const Vector& residuals,
                                 const std::vector<double>& lambdas, double eta_epsilon);

/// w_ij = sum_s lambda_s gamma_ijs rho_ijs on observed entries, 0 elsewhere.
WeightMatrix compute_weights(const MaskedMatrix& X, const Responsibilities& G,
                             const MoALModel& m, const Vector& residuals);

/// Slopes of the M-step 2 objective on either side of zero:
/// pos_ij = sum_s lambda_s gamma_ijs kappa_s, neg_ij = sum_s lambda_s gamma_ijs (1 - kappa_s).
std::pair<WeightMatrix, WeightMatrix> check_loss_weights(const MaskedMatrix& X,
                                                         const Responsibilities& G,
                                                         const MoALModel& m);

/// Drops components that are the argmax responsibility of no entry, then
/// renormalizes pi and the rows of gamma. Ties go to the lower index.
std::pair<MoALModel, Responsibilities> prune_components(const Responsibilities& G,
                                                        const MoALModel& m);

double observed_loglik(const MaskedMatrix& X, const FactorPair& F, const MoALModel& m);

/// Full EM fit. Deterministic for a given (X, opts, seed).
FitResult fit(const MaskedMatrix& X, const FitOptions& opts, std::uint64_t seed);

/// Uniform-weight L1 baseline: same start as fit(), W = Omega throughout.
struct BaselineResult {
  FactorPair factors;
  int iterations = 0;
  bool converged = false;
};
BaselineResult fit_cwm_uniform(const MaskedMatrix& X, const FitOptions& opts, std::uint64_t seed);

}  // namespace aqlrmf
