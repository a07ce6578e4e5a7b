#include "pdswitch/chain.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/LU>

namespace pdswitch {

TruncatedGenerator truncate(const SparseGenerator& qhat, Mode N, Mode required_modes) {
  if (N < 2) throw std::invalid_argument("truncate: level must be at least 2");
  if (N < required_modes) {
    throw std::invalid_argument("truncate: level " + std::to_string(N) + " below required modes " +
                                std::to_string(required_modes));
  }
  if (qhat.finite_size()) N = std::min(N, *qhat.finite_size());
  if (N > 2000) throw std::invalid_argument("truncate: dense truncation limited to 2000 modes");

  TruncatedGenerator tg{.N = N, .Q = Matrix::Zero(N, N),
                        .lump_policy = "rates into modes > N added to column N"};
  RateRow row;
  for (Mode i = 1; i <= N; ++i) {
    qhat.row(i, row);
    for (const auto& e : row) {
      const Mode j = std::min(e.to, N);
      if (j == i) continue;  // lumped self-loop of the boundary row
      tg.Q(i - 1, j - 1) += e.rate;
    }
  }
  for (Mode i = 0; i < N; ++i) {
    double off = 0.0;
    for (Mode j = 0; j < N; ++j) {
      if (j != i) off += tg.Q(i, j);
    }
    tg.Q(i, i) = -off;
  }
  return tg;
}

bool is_irreducible(const TruncatedGenerator& tg) {
  const auto n = tg.Q.rows();
  auto reaches_all = [&](bool transpose) {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<Eigen::Index> stack{0};
    seen[0] = 1;
    Eigen::Index count = 1;
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      for (Eigen::Index v = 0; v < n; ++v) {
        const double q = transpose ? tg.Q(v, u) : tg.Q(u, v);
        if (v != u && q > 0.0 && !seen[static_cast<std::size_t>(v)]) {
          seen[static_cast<std::size_t>(v)] = 1;
          ++count;
          stack.push_back(v);
        }
      }
    }
    return count == n;
  };
  return n > 0 && reaches_all(false) && reaches_all(true);
}

double stationary_residual(const TruncatedGenerator& tg, const Vector& nu) {
  return (nu.transpose() * tg.Q).cwiseAbs().sum();
}

StationaryDist stationary(const TruncatedGenerator& tg) {
  if (!is_irreducible(tg)) throw std::domain_error("stationary: truncated generator is reducible");
  const auto n = tg.Q.rows();
  Matrix sys = tg.Q.transpose();
  sys.row(n - 1).setOnes();
  Vector rhs = Vector::Zero(n);
  rhs(n - 1) = 1.0;
  Eigen::PartialPivLU<Matrix> lu(sys);
  if (!(lu.rcond() > 1e-14)) throw std::domain_error("stationary: system is numerically singular");
  Vector nu = lu.solve(rhs);
  if (nu.minCoeff() < -1e-10) throw std::domain_error("stationary: solution has negative mass");
  nu = nu.cwiseMax(0.0);
  nu /= nu.sum();
  return {.nu = nu, .residual = stationary_residual(tg, nu), .N = tg.N};
}

std::vector<SweepRow> convergence_sweep(const SparseGenerator& qhat, std::span<const Mode> levels) {
  std::vector<SweepRow> out;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    if (k > 0 && levels[k] <= levels[k - 1]) {
      throw std::invalid_argument("convergence_sweep: levels must increase");
    }
    SweepRow row{.N = levels[k], .nu = stationary(truncate(qhat, levels[k])).nu};
    if (!out.empty()) {
      const auto& prev = out.back().nu;
      const auto head = std::min(prev.size(), row.nu.size());
      row.l1_change = (row.nu.head(head) - prev.head(head)).cwiseAbs().sum();
    }
    out.push_back(std::move(row));
  }
  return out;
}

double extrapolate_tail_mass(const Vector& nu, int boundary) {
  const auto n = nu.size();
  const auto m = std::max<Eigen::Index>(n - boundary, std::min<Eigen::Index>(n, 2));
  const auto w = std::min<Eigen::Index>(5, m - 1);
  if (w < 1) return 1.0;
  const double last = nu(m - 1);
  const double first = nu(m - 1 - w);
  if (last == 0.0) return 0.0;
  if (!(first > 0.0)) return 1.0;
  const double ratio = std::pow(last / first, 1.0 / static_cast<double>(w));
  if (!(ratio < 1.0)) return 1.0;
  return std::min(1.0, last * ratio / (1.0 - ratio));
}

}  // namespace pdswitch
