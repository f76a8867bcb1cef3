#include "aqlrmf/cwm.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "aqlrmf/errors.hpp"

namespace aqlrmf {
namespace {

struct Candidate {
  double value;
  double weight;
  std::size_t position;
};
using Candidates = std::vector<Candidate>;

double median_of(Candidates& cands) {
  // Total is accumulated in input order so the threshold does not depend on
  // how the sort permutes equal values.
  double total = 0.0;
  for (const auto& c : cands) total += c.weight;
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.value != b.value) return a.value < b.value;
    return a.position < b.position;
  });
  const double half = 0.5 * total;
  double cum = 0.0;
  for (const auto& c : cands) {
    cum += c.weight;
    if (cum >= half) return c.value;
  }
  return cands.back().value;
}

// Scalar update shared by the standalone and in-solver paths.
// `resid(l)` is the full residual x - U V^T at the l-th entry of the line,
// `coef(l)` the fixed factor multiplying the free scalar, `weight(l)` w.
template <class Resid, class Coef, class Weight>
double line_update(Eigen::Index length, double current, Resid resid, Coef coef,
                   Weight weight, Candidates& cands) {
  cands.clear();
  for (Eigen::Index l = 0; l < length; ++l) {
    const double c = coef(l);
    const double w = weight(l) * std::abs(c);
    if (!(w > 0.0)) continue;
    // Partial residual with this factor's own contribution added back.
    const double partial = resid(l) + c * current;
    cands.push_back({partial / c, w, static_cast<std::size_t>(l)});
  }
  if (cands.empty()) return current;
  return median_of(cands);
}

struct SlopedCandidate {
  double value;
  double above;  // slope of the term for v > value
  double below;  // slope magnitude for v < value
  std::size_t position;
};
using SlopedCandidates = std::vector<SlopedCandidate>;

// Smallest value where the right derivative of the sum becomes nonnegative.
double quantile_of(SlopedCandidates& cands) {
  double target = 0.0;
  for (const auto& c : cands) target += c.below;
  std::sort(cands.begin(), cands.end(), [](const SlopedCandidate& a, const SlopedCandidate& b) {
    if (a.value != b.value) return a.value < b.value;
    return a.position < b.position;
  });
  double cum = 0.0;
  for (const auto& c : cands) {
    cum += c.above + c.below;
    if (cum >= target) return c.value;
  }
  return cands.back().value;
}

// Check-loss counterpart of line_update: `pos(l)` weighs positive residuals,
// `neg(l)` negative ones.
template <class Resid, class Coef, class Pos, class Neg>
double check_line_update(Eigen::Index length, double current, Resid resid, Coef coef, Pos pos,
                         Neg neg, SlopedCandidates& cands) {
  cands.clear();
  for (Eigen::Index l = 0; l < length; ++l) {
    const double c = coef(l);
    if (c == 0.0) continue;
    const double a = std::abs(c);
    // For c > 0 the residual is negative once v passes the ratio; for c < 0 it is positive.
    const double above = (c > 0.0 ? neg(l) : pos(l)) * a;
    const double below = (c > 0.0 ? pos(l) : neg(l)) * a;
    if (!(above + below > 0.0)) continue;
    const double partial = resid(l) + c * current;
    cands.push_back({partial / c, above, below, static_cast<std::size_t>(l)});
  }
  if (cands.empty()) return current;
  return quantile_of(cands);
}

Matrix residual_matrix(const MaskedMatrix& X, const FactorPair& F) {
  Matrix R = X.values() - F.product();
  for (Eigen::Index j = 0; j < R.cols(); ++j)
    for (Eigen::Index i = 0; i < R.rows(); ++i)
      if (!X.observed(i, j)) R(i, j) = 0.0;
  return R;
}

double objective_from_residual(const Matrix& R, const WeightMatrix& W) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < R.cols(); ++j)
    for (Eigen::Index i = 0; i < R.rows(); ++i)
      if (W(i, j) > 0.0) total += W(i, j) * std::abs(R(i, j));
  return total;
}

double check_objective_from_residual(const Matrix& R, const WeightMatrix& pos,
                                     const WeightMatrix& neg) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < R.cols(); ++j)
    for (Eigen::Index i = 0; i < R.rows(); ++i) {
      const double e = R(i, j);
      if (e >= 0.0) {
        if (pos(i, j) > 0.0) total += pos(i, j) * e;
      } else if (neg(i, j) > 0.0) {
        total -= neg(i, j) * e;
      }
    }
  return total;
}

void check_shapes(const MaskedMatrix& X, const WeightMatrix& W, const FactorPair& F) {
  F.validate();
  if (W.rows() != X.rows() || W.cols() != X.cols())
    throw ValidationError("weight matrix shape does not match data");
  if (F.U.rows() != X.rows() || F.V.rows() != X.cols())
    throw ValidationError("factor shapes do not match data");
}

// Cyclic sweeps shared by both solvers. `step(length, old, resid, coef, at)`
// returns the new scalar, where at(l) gives the (row, col) of the l-th term.
template <class Step, class Objective>
FactorPair cyclic_sweeps(const MaskedMatrix& X, FactorPair F, const WL1Options& opts,
                         const UpdateObserver& observe, Step step, Objective objective) {
  const Eigen::Index m = X.rows();
  const Eigen::Index n = X.cols();
  const Eigen::Index r = F.rank();

  Matrix R = residual_matrix(X, F);
  double previous = objective(R);

  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < r; ++i) {
        const double old = F.V(j, i);
        const double next = step(
            m, old, [&](Eigen::Index l) { return R(l, j); },
            [&](Eigen::Index l) { return F.U(l, i); },
            [&](Eigen::Index l) { return Entry{l, j}; });
        if (next != old) {
          R.col(j) -= F.U.col(i) * (next - old);
          F.V(j, i) = next;
        }
        if (observe) observe(F);
      }
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      for (Eigen::Index i = 0; i < r; ++i) {
        const double old = F.U(j, i);
        const double next = step(
            n, old, [&](Eigen::Index l) { return R(j, l); },
            [&](Eigen::Index l) { return F.V(l, i); },
            [&](Eigen::Index l) { return Entry{j, l}; });
        if (next != old) {
          R.row(j) -= (next - old) * F.V.col(i).transpose();
          F.U(j, i) = next;
        }
        if (observe) observe(F);
      }
    }

    R = residual_matrix(X, F);  // resync the incremental residual
    const double current = objective(R);
    const bool stalled = previous <= 0.0 || (previous - current) < opts.objective_tolerance * previous;
    previous = current;
    if (stalled) break;
  }
  return F;
}

}  // namespace

void WL1Options::validate() const {
  if (max_sweeps < 1) throw ValidationError("max_sweeps must be positive");
  if (!(objective_tolerance > 0.0)) throw ValidationError("objective_tolerance must be positive");
}

double weighted_median(std::span<const double> values, std::span<const double> weights) {
  if (values.size() != weights.size())
    throw ValidationError("weighted_median: values and weights differ in length");
  Candidates cands;
  cands.reserve(values.size());
  bool any_positive = false;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (weights[k] < 0.0 || !std::isfinite(weights[k]))
      throw ValidationError("weighted_median: weights must be finite and nonnegative");
    any_positive = any_positive || weights[k] > 0.0;
    cands.push_back({values[k], weights[k], k});
  }
  if (!any_positive) throw DegenerateInputError("weighted_median: no positive weight");
  return median_of(cands);
}

double update_v_entry(Eigen::Index col, Eigen::Index factor, const MaskedMatrix& X,
                      const WeightMatrix& W, const FactorPair& F) {
  check_shapes(X, W, F);
  const Matrix R = residual_matrix(X, F);
  Candidates cands;
  return line_update(
      X.rows(), F.V(col, factor), [&](Eigen::Index l) { return R(l, col); },
      [&](Eigen::Index l) { return F.U(l, factor); }, [&](Eigen::Index l) { return W(l, col); },
      cands);
}

double update_u_entry(Eigen::Index row, Eigen::Index factor, const MaskedMatrix& X,
                      const WeightMatrix& W, const FactorPair& F) {
  check_shapes(X, W, F);
  const Matrix R = residual_matrix(X, F);
  Candidates cands;
  return line_update(
      X.cols(), F.U(row, factor), [&](Eigen::Index l) { return R(row, l); },
      [&](Eigen::Index l) { return F.V(l, factor); }, [&](Eigen::Index l) { return W(row, l); },
      cands);
}

double wl1_objective(const MaskedMatrix& X, const WeightMatrix& W, const FactorPair& F) {
  check_shapes(X, W, F);
  return objective_from_residual(residual_matrix(X, F), W);
}

FactorPair solve_wl1(const MaskedMatrix& X, const WeightMatrix& W, FactorPair F0,
                     const WL1Options& opts, const UpdateObserver& observe) {
  opts.validate();
  check_shapes(X, W, F0);
  Candidates cands;
  cands.reserve(static_cast<std::size_t>(std::max(X.rows(), X.cols())));
  auto step = [&](Eigen::Index length, double old, auto resid, auto coef, auto at) {
    return line_update(
        length, old, resid, coef,
        [&](Eigen::Index l) {
          const Entry e = at(l);
          return W(e.row, e.col);
        },
        cands);
  };
  return cyclic_sweeps(X, std::move(F0), opts, observe, step,
                       [&](const Matrix& R) { return objective_from_residual(R, W); });
}

double check_wl1_objective(const MaskedMatrix& X, const WeightMatrix& pos, const WeightMatrix& neg,
                           const FactorPair& F) {
  check_shapes(X, pos, F);
  check_shapes(X, neg, F);
  return check_objective_from_residual(residual_matrix(X, F), pos, neg);
}

FactorPair solve_check_wl1(const MaskedMatrix& X, const WeightMatrix& pos, const WeightMatrix& neg,
                           FactorPair F0, const WL1Options& opts, const UpdateObserver& observe) {
  opts.validate();
  check_shapes(X, pos, F0);
  check_shapes(X, neg, F0);
  SlopedCandidates cands;
  cands.reserve(static_cast<std::size_t>(std::max(X.rows(), X.cols())));
  auto step = [&](Eigen::Index length, double old, auto resid, auto coef, auto at) {
    return check_line_update(
        length, old, resid, coef,
        [&](Eigen::Index l) {
          const Entry e = at(l);
          return pos(e.row, e.col);
        },
        [&](Eigen::Index l) {
          const Entry e = at(l);
          return neg(e.row, e.col);
        },
        cands);
  };
  return cyclic_sweeps(X, std::move(F0), opts, observe, step, [&](const Matrix& R) {
    return check_objective_from_residual(R, pos, neg);
  });
}

}  // namespace aqlrmf
