#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace aqlrmf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Mask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct Entry {
  Eigen::Index row;
  Eigen::Index col;
};

// Data matrix X together with its observation indicator Omega.
//
// Observed entries are enumerated in column-major order; every per-entry
// quantity (residuals, responsibilities) uses that same ordering.
class MaskedMatrix {
 public:
  // Throws ValidationError on shape mismatch, no observed entry, or a
  // non-finite observed value. Values under a false mask are ignored.
  MaskedMatrix(Matrix values, Mask mask);
  // Fully observed.
  explicit MaskedMatrix(Matrix values);

  Eigen::Index rows() const { return values_.rows(); }
  Eigen::Index cols() const { return values_.cols(); }
  const Matrix& values() const { return values_; }
  const Mask& mask() const { return mask_; }
  bool observed(Eigen::Index i, Eigen::Index j) const { return mask_(i, j); }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t observed_count() const { return entries_.size(); }

 private:
  Matrix values_;
  Mask mask_;
  std::vector<Entry> entries_;
};

// Low-rank factors with X ~ U V^T.
struct FactorPair {
  Matrix U;  // m x r
  Matrix V;  // n x r

  Eigen::Index rank() const { return U.cols(); }
  Matrix product() const { return U * V.transpose(); }
  // Throws ValidationError if column counts differ or an entry is not finite.
  void validate() const;
};

// Per-entry weights of the weighted-L1 problem; zero wherever X is missing.
class WeightMatrix {
 public:
  // Throws ValidationError unless w is finite, nonnegative, shaped like X,
  // and exactly zero on every missing entry.
  WeightMatrix(Matrix w, const MaskedMatrix& X);
  // 1 on observed entries, 0 elsewhere.
  static WeightMatrix uniform(const MaskedMatrix& X);

  const Matrix& values() const { return w_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return w_(i, j); }
  Eigen::Index rows() const { return w_.rows(); }
  Eigen::Index cols() const { return w_.cols(); }

 private:
  Matrix w_;
};

// e_ij = x_ij - u_i v_j^T over the observed entries, in entries() order.
Vector observed_residuals(const MaskedMatrix& X, const FactorPair& F);

}  // namespace aqlrmf
