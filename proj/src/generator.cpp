#include "pdswitch/generator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

namespace pdswitch {

SparseGenerator::SparseGenerator(RowFn row, double rate_bound,
                                 std::optional<Mode> finite_size, std::string label)
    : row_(std::move(row)), bound_(rate_bound), size_(finite_size), label_(std::move(label)) {
  if (!row_) throw std::invalid_argument("generator: empty row function");
  if (!(rate_bound >= 0.0) || !std::isfinite(rate_bound)) {
    throw std::invalid_argument("generator: rate bound must be finite and nonnegative");
  }
  if (size_ && *size_ < 1) throw std::invalid_argument("generator: size must be positive");
}

void SparseGenerator::row(Mode i, RateRow& out) const {
  if (i < 1) throw std::out_of_range("generator: modes start at 1");
  out.clear();
  row_(i, out);
  for (const auto& e : out) {
    if (e.to < 1 || e.to == i) throw std::logic_error("generator: bad target mode in row");
    if (!(e.rate >= 0.0) || !std::isfinite(e.rate)) {
      throw std::logic_error("generator: off-diagonal rates must be finite and nonnegative");
    }
  }
}

RateRow SparseGenerator::row(Mode i) const {
  RateRow out;
  row(i, out);
  return out;
}

SparseGenerator SparseGenerator::from_triplets(std::span<const Triplet> triplets) {
  std::map<Mode, std::map<Mode, double>> rows;
  Mode size = 1;
  for (const auto& [i, j, rate] : triplets) {
    if (i < 1 || j < 1) throw std::invalid_argument("generator: modes start at 1");
    if (!(rate >= 0.0) || !std::isfinite(rate)) {
      throw std::invalid_argument("generator: rates must be finite and nonnegative");
    }
    size = std::max({size, i, j});
    if (i != j) rows[i][j] += rate;
  }
  auto table = std::make_shared<std::vector<RateRow>>(static_cast<std::size_t>(size));
  double bound = 0.0;
  for (const auto& [i, cols] : rows) {
    auto& r = (*table)[static_cast<std::size_t>(i - 1)];
    for (const auto& [j, q] : cols) r.push_back({j, q});
    bound = std::max(bound, total_rate(r));
  }
  return SparseGenerator(
      [table](Mode i, RateRow& out) {
        if (i <= static_cast<Mode>(table->size())) {
          const auto& r = (*table)[static_cast<std::size_t>(i - 1)];
          out.assign(r.begin(), r.end());
        }
      },
      bound, size, "triplets");
}

SparseGenerator SparseGenerator::switched_ou_limit() {
  return SparseGenerator(
      [](Mode i, RateRow& out) {
        if (i == 1) {
          out.push_back({2, 1.0});
          out.push_back({3, 1.0});
        } else if (i == 2) {
          out.push_back({1, 1.0});
          out.push_back({3, 1.0});
        } else {
          out.push_back({1, 1.0});
          out.push_back({2, 1.0});
          out.push_back({i + 1, 1.0});
        }
      },
      3.0, std::nullopt, "switched_ou");
}

SparseGenerator SparseGenerator::controlled_scalar_limit() {
  return SparseGenerator(
      [](Mode i, RateRow& out) {
        if (i == 1) {
          out.push_back({2, 1.0});
        } else {
          out.push_back({1, 1.0});
          out.push_back({i + 1, 1.0});
        }
      },
      2.0, std::nullopt, "controlled_scalar");
}

SparseGenerator SparseGenerator::birth_death(double up, double down) {
  if (!(up >= 0.0) || !(down >= 0.0)) {
    throw std::invalid_argument("generator: birth-death rates must be nonnegative");
  }
  return SparseGenerator(
      [up, down](Mode i, RateRow& out) {
        if (i > 1 && down > 0.0) out.push_back({i - 1, down});
        if (up > 0.0) out.push_back({i + 1, up});
      },
      up + down, std::nullopt, "birth_death");
}

SparseGenerator SparseGenerator::family(const std::string& name) {
  if (name == "switched_ou") return switched_ou_limit();
  if (name == "controlled_scalar") return controlled_scalar_limit();
  throw std::invalid_argument("generator: unknown family '" + name + "'");
}

}  // namespace pdswitch
