#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pdswitch/generator.hpp"
#include "pdswitch/segment.hpp"
#include "pdswitch/types.hpp"

namespace pdswitch {

/// Switching diffusion
///   dX = b(X, a) dt + sigma(X, a) dW,   P(a jumps i -> j in dt | X_t) = q_ij(X_t) dt,
/// where the rates read the whole memory segment X_t, not just X(t).
///
/// Coefficients write into caller-owned buffers so the simulator's inner loop
/// does not allocate. Immutable after construction; share freely.
struct ModelSpec {
  using DriftFn = std::function<void(const Vector& x, Mode i, Vector& out)>;
  using DiffusionFn = std::function<void(const Vector& x, Mode i, Matrix& out)>;
  using RatesFn = std::function<void(const Segment& phi, Mode i, RateRow& out)>;
  using ProjectFn = std::function<void(Vector& x)>;

  std::string name;
  int dim = 1;
  int brownian_dim = 1;
  double delay = 1.0;       // memory length r
  double rate_bound = 0.0;  // M with q_i(phi) <= M for all phi, i
  DriftFn drift;
  DiffusionFn diffusion;    // n x d
  RatesFn rates;            // off-diagonal entries only
  ProjectFn project;        // optional state constraint applied after each step

  Vector eval_drift(const Vector& x, Mode i) const;
  Matrix eval_diffusion(const Vector& x, Mode i) const;
  RateRow eval_rates(const Segment& phi, Mode i) const;
  void validate() const;
};

/// Linear behaviour at infinity: b(x,i) ~ b(i) x, sigma(x,i) ~ (sigma_1(i) x, ..., sigma_d(i) x)
/// and Q(phi) -> qhat as |phi| -> infinity.
struct Linearization {
  std::function<Matrix(Mode)> drift_matrix;                // b(i), n x n
  std::function<std::vector<Matrix>(Mode)> noise_matrices;  // sigma_k(i), d of them, n x n
  SparseGenerator qhat;
  double coeff_bound = 0.0;
};

// b(x,i) - b(i) x
Vector residual_drift(const ModelSpec& m, const Linearization& lin, const Vector& x, Mode i);
// sigma(x,i) - [sigma_1(i) x, ..., sigma_d(i) x]
Matrix residual_diffusion(const ModelSpec& m, const Linearization& lin, const Vector& x,
                          Mode i);

/// Outcome of one sampling-based assumption probe. These are diagnostics over
/// a finite probe grid, not proofs.
struct CheckReport {
  std::string name;
  bool passed = false;
  std::vector<double> probes;  // radii (or other probe parameter)
  std::vector<double> values;  // statistic per probe
  std::string detail;
};

/// max over directions and modes of (|b_hat| v |sigma_hat|) / |x| at each radius.
/// Passes when the sequence is nonincreasing and its last value is below `tol`.
CheckReport check_sublinear_residuals(const ModelSpec& m, const Linearization& lin,
                                      std::span<const Vector> ray_dirs,
                                      std::span<const double> radii,
                                      std::span<const Mode> modes, double tol);

/// l1 deviation sup_i sum_{j != i} |q_ij(phi) - qhat_ij| over constant segments
/// |phi| = R * 10^k, k = 0 .. n_probe-1. Passes when nonincreasing in the radius.
CheckReport check_rate_convergence(const ModelSpec& m, const Linearization& lin,
                                   double radius, std::span<const Mode> modes, int n_probe);

// eta_j for j > k0, with eta_j := 0 for j <= k0.
struct DriftWeights {
  Mode k0 = 1;
  std::function<double(Mode)> eta;
  double bound = 0.0;  // declared sup of eta; probed values above it are an error
};

/// sum_{j > k0, j != i} q_ij eta_j + q_ii eta_i <= -1 for every probed i > k0.
/// The row function receives the probed segment (ignored by a limit generator).
bool check_drift_condition(const std::function<void(const Segment&, Mode, RateRow&)>& rows,
                           const DriftWeights& w, std::span<const Mode> probe_modes,
                           std::span<const Segment> probe_segments);
bool check_drift_condition(const SparseGenerator& qhat, const DriftWeights& w,
                           std::span<const Mode> probe_modes);

/// Off-diagonal rates nonnegative and q_i(phi) <= M on the probe set.
CheckReport check_rate_bound(const ModelSpec& m, std::span<const Segment> probe_segments,
                             std::span<const Mode> modes);

/// Largest finite-difference quotient of drift and diffusion on |x| <= H.
CheckReport check_local_lipschitz(const ModelSpec& m, double H, std::span<const Mode> modes,
                                  int n_probe, std::uint64_t seed, double limit);

/// |b(i)|, |sigma_k(i)| <= coeff_bound on the probed modes (spectral norm).
CheckReport check_coefficient_bound(const Linearization& lin, std::span<const Mode> modes);

/// Model defined by its linear part plus user-supplied residual terms.
ModelSpec make_linear_plus_residual(std::string name, const Linearization& lin, int brownian_dim,
                                    ModelSpec::DriftFn residual_drift,
                                    ModelSpec::DiffusionFn residual_diffusion,
                                    ModelSpec::RatesFn rates, double rate_bound, double delay);

}  // namespace pdswitch
