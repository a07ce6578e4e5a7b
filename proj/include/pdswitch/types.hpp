#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace pdswitch {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Discrete modes are the positive integers 1, 2, 3, ...
using Mode = std::int64_t;

struct RateEntry {
  Mode to;
  double rate;
};

// Off-diagonal entries of one generator row. The diagonal is implied by
// conservativeness: q_ii = -sum_{j != i} q_ij.
using RateRow = std::vector<RateEntry>;

inline double total_rate(const RateRow& row) {
  double s = 0.0;
  for (const auto& e : row) s += e.rate;
  return s;
}

}  // namespace pdswitch
