#include "pdswitch/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace pdswitch {

SpectralSummary summarize(const Matrix& A) {
  if (A.rows() != A.cols() || A.rows() == 0) {
    throw std::invalid_argument("summarize: matrix must be square and nonempty");
  }
  if (!A.allFinite()) throw std::invalid_argument("summarize: matrix has non-finite entries");
  const Matrix S = 0.5 * (A + A.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(S, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw std::runtime_error("summarize: eigensolver failed");
  const auto& ev = eig.eigenvalues();  // ascending
  SpectralSummary out;
  out.lambda_min = ev(0);
  out.lambda_max = ev(ev.size() - 1);
  if (out.lambda_min < 0.0 && out.lambda_max > 0.0) {
    out.rho = 0.0;
  } else {
    out.rho = std::min(std::abs(out.lambda_min), std::abs(out.lambda_max));
  }
  return out;
}

Matrix a_of_i(std::span<const Matrix> sigma_mats) {
  if (sigma_mats.empty()) throw std::invalid_argument("a_of_i: no noise matrices");
  const auto n = sigma_mats.front().rows();
  Matrix a = Matrix::Zero(n, n);
  for (const auto& s : sigma_mats) {
    if (s.rows() != n || s.cols() != n) throw std::invalid_argument("a_of_i: shape mismatch");
    a.noalias() += s.transpose() * s;
  }
  return a;
}

}  // namespace pdswitch
