#pragma once

#include <span>
#include <string>
#include <vector>

#include "pdswitch/generator.hpp"
#include "pdswitch/types.hpp"

namespace pdswitch {

/// Generator restricted to modes 1..N. Rates into modes > N are lumped into
/// mode N, so the result is still conservative.
struct TruncatedGenerator {
  Mode N = 0;
  Matrix Q;
  std::string lump_policy;
};

struct StationaryDist {
  Vector nu;              // nu(k) is the mass of mode k + 1
  double residual = 0.0;  // |nu Q|_1
  Mode N = 0;
};

/// Throws std::invalid_argument if N < 2 or N < required_modes. A finite
/// generator smaller than N is truncated at its own size.
TruncatedGenerator truncate(const SparseGenerator& qhat, Mode N, Mode required_modes = 0);

// Strong connectivity of the off-diagonal sparsity pattern.
bool is_irreducible(const TruncatedGenerator& tg);

/// Solves nu Q = 0, sum nu = 1 by replacing one equation with the
/// normalization row. Throws std::domain_error for a reducible truncation.
StationaryDist stationary(const TruncatedGenerator& tg);

// |nu Q|_1, computed independently of the solver.
double stationary_residual(const TruncatedGenerator& tg, const Vector& nu);

struct SweepRow {
  Mode N = 0;
  Vector nu;
  double l1_change = 0.0;  // vs the previous level on its modes; 0 for the first row
};

std::vector<SweepRow> convergence_sweep(const SparseGenerator& qhat, std::span<const Mode> levels);

/// Mass beyond the reliable head, from a geometric fit to nu away from the
/// lumped boundary (the last `boundary` entries are skipped). Returns 1 when
/// the head does not decay.
double extrapolate_tail_mass(const Vector& nu, int boundary = 5);

}  // namespace pdswitch
