#include "aqlrmf/matrix.hpp"

#include <cmath>

#include "aqlrmf/errors.hpp"

namespace aqlrmf {

MaskedMatrix::MaskedMatrix(Matrix values, Mask mask)
    : values_(std::move(values)), mask_(std::move(mask)) {
  if (values_.rows() != mask_.rows() || values_.cols() != mask_.cols())
    throw ValidationError("values and mask must have identical dimensions");
  if (values_.rows() == 0 || values_.cols() == 0)
    throw ValidationError("matrix must have at least one row and one column");
  for (Eigen::Index j = 0; j < values_.cols(); ++j) {
    for (Eigen::Index i = 0; i < values_.rows(); ++i) {
      if (!mask_(i, j)) continue;
      if (!std::isfinite(values_(i, j)))
        throw ValidationError("observed entries must be finite");
      entries_.push_back({i, j});
    }
  }
  if (entries_.empty()) throw ValidationError("matrix has no observed entries");
}

MaskedMatrix::MaskedMatrix(Matrix values)
    : MaskedMatrix(values, Mask::Constant(values.rows(), values.cols(), true)) {}

void FactorPair::validate() const {
  if (U.cols() != V.cols()) throw ValidationError("U and V must have the same rank");
  if (U.cols() < 1) throw ValidationError("rank must be at least 1");
  if (!U.allFinite() || !V.allFinite()) throw ValidationError("factors must be finite");
}

WeightMatrix::WeightMatrix(Matrix w, const MaskedMatrix& X) : w_(std::move(w)) {
  if (w_.rows() != X.rows() || w_.cols() != X.cols())
    throw ValidationError("weight matrix shape does not match data");
  for (Eigen::Index j = 0; j < w_.cols(); ++j) {
    for (Eigen::Index i = 0; i < w_.rows(); ++i) {
      const double v = w_(i, j);
      if (!std::isfinite(v) || v < 0.0)
        throw ValidationError("weights must be finite and nonnegative");
      if (!X.observed(i, j) && v != 0.0)
        throw ValidationError("weights must vanish on missing entries");
    }
  }
}

WeightMatrix WeightMatrix::uniform(const MaskedMatrix& X) {
  return WeightMatrix(X.mask().cast<double>(), X);
}

Vector observed_residuals(const MaskedMatrix& X, const FactorPair& F) {
  const auto& entries = X.entries();
  Vector e(static_cast<Eigen::Index>(entries.size()));
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto [i, j] = entries[k];
    e(static_cast<Eigen::Index>(k)) = X.values()(i, j) - F.U.row(i).dot(F.V.row(j));
  }
  return e;
}

}  // namespace aqlrmf
