#pragma once

#include <functional>
#include <span>

#include "aqlrmf/matrix.hpp"

namespace aqlrmf {

struct WL1Options {
  int max_sweeps = 10;
  // Stop once a sweep reduces the objective by less than this fraction.
  double objective_tolerance = 1e-6;

  void validate() const;
};

/// Minimizer of f(v) = sum_l w_l |v - a_l|.
///
/// Values are ordered ascending (ties by input position) and the first value
/// whose cumulative weight reaches half the total is returned, so the result
/// is always one of the inputs. Zero weights are allowed; throws
/// DegenerateInputError if the input is empty or no weight is positive.
double weighted_median(std::span<const double> values, std::span<const double> weights);

/// Optimal v(col, factor) with every other factor entry held fixed.
/// Rows with w * |u| == 0 are excluded; with no candidate the current value
/// is returned unchanged.
double update_v_entry(Eigen::Index col, Eigen::Index factor, const MaskedMatrix& X,
                      const WeightMatrix& W, const FactorPair& F);

/// Row counterpart of update_v_entry for u(row, factor).
double update_u_entry(Eigen::Index row, Eigen::Index factor, const MaskedMatrix& X,
                      const WeightMatrix& W, const FactorPair& F);

/// sum_ij w_ij |x_ij - u_i v_j^T| over observed entries.
double wl1_objective(const MaskedMatrix& X, const WeightMatrix& W, const FactorPair& F);

/// sum_ij (pos_ij e_ij^+ + neg_ij e_ij^-) with e = x - u_i v_j^T over observed
/// entries: a check loss whose slope depends on the residual sign.
double check_wl1_objective(const MaskedMatrix& X, const WeightMatrix& pos, const WeightMatrix& neg,
                           const FactorPair& F);

/// Called after every scalar update with the current factors.
using UpdateObserver = std::function<void(const FactorPair&)>;

/// Cyclic weighted-median coordinate descent for min ||W o (X - U V^T)||_1,
/// warm-started from F0. Each sweep updates all of V (column by column, factor
/// index innermost) and then all of U.
FactorPair solve_wl1(const MaskedMatrix& X, const WeightMatrix& W, FactorPair F0,
                     const WL1Options& opts, const UpdateObserver& observe = {});

/// Same sweep order as solve_wl1 for the check-loss objective above. Each
/// scalar update is a weighted quantile of the candidate ratios; with
/// pos == neg it reduces to the weighted median update.
FactorPair solve_check_wl1(const MaskedMatrix& X, const WeightMatrix& pos, const WeightMatrix& neg,
                           FactorPair F0, const WL1Options& opts,
                           const UpdateObserver& observe = {});

}  // namespace aqlrmf
