#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>

#include "pdswitch/types.hpp"

namespace pdswitch {

struct Triplet {
  Mode i;
  Mode j;
  double rate;
};

/// Generator of a Markov chain on the modes {1, 2, ...}, given row by row.
///
/// Rows are produced on demand so countably infinite generators (the
/// limits at infinity of the built-in models) need no truncation until a
/// solver asks for one. `rate_bound` bounds every row's total rate.
class SparseGenerator {
 public:
  using RowFn = std::function<void(Mode, RateRow&)>;

  SparseGenerator(RowFn row, double rate_bound, std::optional<Mode> finite_size = {},
                  std::string label = "custom");

  /// Finite generator on {1..max(i,j)} from off-diagonal triplets. Repeated
  /// (i, j) pairs accumulate; diagonal triplets are ignored.
  static SparseGenerator from_triplets(std::span<const Triplet> triplets);

  /// Limit generator of the switched Ornstein-Uhlenbeck example: rows 1 and 2
  /// jump to the other two of {1, 2, 3}; rows i > 2 jump to 1, 2 and i + 1,
  /// all at rate 1.
  static SparseGenerator switched_ou_limit();

  /// Limit generator of the controlled scalar example: 1 -> 2 at rate 1;
  /// i >= 2 jumps to 1 and to i + 1 at rate 1.
  static SparseGenerator controlled_scalar_limit();

  /// Birth-death chain with constant up rate and down rate (down from i >= 2).
  static SparseGenerator birth_death(double up, double down);

  /// Built-in families by name: "switched_ou", "controlled_scalar".
  static SparseGenerator family(const std::string& name);

  // Fills `out` with validated off-diagonal entries of row i.
  void row(Mode i, RateRow& out) const;
  RateRow row(Mode i) const;

  double rate_bound() const { return bound_; }
  std::optional<Mode> finite_size() const { return size_; }
  const std::string& label() const { return label_; }

 private:
  RowFn row_;
  double bound_;
  std::optional<Mode> size_;
  std::string label_;
};

}  // namespace pdswitch
