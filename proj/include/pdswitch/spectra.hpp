#pragma once

#include <span>

#include "pdswitch/types.hpp"

namespace pdswitch {

// Extreme eigenvalues of the symmetric part S = (A + A^T)/2 and
// rho = inf_{|x|=1} |x^T A x|.
struct SpectralSummary {
  double lambda_max = 0.0;
  double lambda_min = 0.0;
  double rho = 0.0;
};

/// x^T A x = x^T S x sweeps [lambda_min, lambda_max] on the unit sphere, so
/// rho is 0 when the range straddles zero and the smaller endpoint magnitude
/// otherwise. Throws std::invalid_argument for non-square or non-finite A.
SpectralSummary summarize(const Matrix& A);

// a(i) = sum_k sigma_k^T sigma_k
Matrix a_of_i(std::span<const Matrix> sigma_mats);

}  // namespace pdswitch
