#pragma once

#include <span>

#include "aqlrmf/matrix.hpp"

namespace aqlrmf {

struct ErrorPair {
  double l1;
  double l2;
};

// Mean absolute deviation (1/mn) sum |x_ij - u_i v_j^T| over every entry.
double l1_error(const Matrix& reference, const FactorPair& F);
// Root-mean-square deviation over every entry.
double l2_error(const Matrix& reference, const FactorPair& F);
ErrorPair reconstruction_errors(const Matrix& reference, const FactorPair& F);

// Same errors restricted to the observed entries of X.
ErrorPair observed_errors(const MaskedMatrix& X, const FactorPair& F);

// m3 / m2^(3/2) with population moments about the sample mean. Throws
// std::domain_error for fewer than 3 values or zero variance.
double sample_skewness(std::span<const double> xs);

}  // namespace aqlrmf
