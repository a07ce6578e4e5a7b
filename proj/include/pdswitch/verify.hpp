#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pdswitch/model.hpp"
#include "pdswitch/segment.hpp"
#include "pdswitch/sim.hpp"

namespace pdswitch {

/// Mean and standard error over the uncensored samples, with the censored
/// share disclosed alongside.
struct MCEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;    // uncensored samples behind mean/std_error
  std::size_t n_paths = 0;
  double censored_fraction = 0.0;
  std::size_t n_blown_up = 0;   // excluded paths
  bool usable = false;          // false when every path was censored

  double ci_low(double z = 1.96) const { return mean - z * std_error; }
  double ci_high(double z = 1.96) const { return mean + z * std_error; }
};

// Running mean/variance (Welford), merged in path order.
class RunningStats {
 public:
  void add(double x);
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double std_error() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct EnsembleConfig {
  SimConfig sim;
  std::size_t n_paths = 1000;
  unsigned threads = 1;
};

// How X_t is measured against the radius H.
enum class HitNorm {
  kSegment,  // sup over the whole window X_t (the bounded-set definition)
  kPoint,    // |X(t)| only
};

/// First grid time with |X_t| <= H (per `norm`) and a <= k0, censored at the horizon.
MCEstimate estimate_hitting_time(const ModelSpec& m, const Segment& phi0, Mode i0, double H,
                                 Mode k0, const EnsembleConfig& cfg,
                                 HitNorm norm = HitNorm::kSegment);

/// First time with a <= k0, censored at the horizon.
MCEstimate estimate_mode_descent(const ModelSpec& m, const Segment& phi0, Mode i0, Mode k0,
                                 const EnsembleConfig& cfg);

/// V(phi, i) = f1(phi(0), i) + int_{-r}^0 g(t, i) f2(phi(t), i) dt.
/// f1 needs its gradient and Hessian; g needs its time derivative. Leave
/// f2 empty for a purely current-state functional.
struct ProductFunctional {
  std::function<double(const Vector&, Mode)> f1;
  std::function<Vector(const Vector&, Mode)> grad_f1;
  std::function<Matrix(const Vector&, Mode)> hess_f1;
  std::function<double(const Vector&, Mode)> f2;
  std::function<double(double, Mode)> g;
  std::function<double(double, Mode)> dg_dt;

  // Throws std::invalid_argument when a required derivative is missing.
  void validate() const;
};

double evaluate(const ProductFunctional& V, const Segment& seg, Mode i);

/// Functional Ito generator: horizontal derivative + drift and Hessian terms
/// at phi(0) + switching sum over the nonzero entries of q_i(phi).
double apply_generator(const ProductFunctional& V, const ModelSpec& m, const Segment& seg, Mode i);

/// E V(X_t, a(t)) - V(phi0, i0) - E int_0^t LV ds, with LV integrated by the
/// left-point rule on the simulation grid. Blown-up paths are excluded and counted.
MCEstimate dynkin_residual(const ProductFunctional& V, const ModelSpec& m, const Segment& phi0,
                           Mode i0, double t, const EnsembleConfig& cfg);

struct CouplingRow {
  double radius = 0.0;
  MCEstimate probability;  // of {decouple time <= T and before |X| < H}
};

/// Starting from constant segments at each radius (along the first axis),
/// estimates P(decouple <= T ^ tau_H), tau_H = inf{t : |X(t)| < H}.
std::vector<CouplingRow> coupling_decay(const ModelSpec& m, const Linearization& lin,
                                        std::span<const double> radii, double H, Mode i0,
                                        const EnsembleConfig& cfg);

struct OccupationStart {
  Vector x0;
  Mode i0 = 1;
};

struct OccupationBinning {
  std::vector<double> edges{0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 10.0};  // bins on |X|, overflow last
  Mode k0 = 5;  // modes above k0 share one bin
};

struct OccupationReport {
  std::vector<std::vector<double>> histograms;  // per start, normalized, row-major (|X| bin, mode bin)
  std::vector<std::vector<double>> distances;   // pairwise l1
  std::size_t x_bins = 0;
  std::size_t mode_bins = 0;
};

/// Time-averaged occupation of (|X| bin, mode bin) over [burn_in, T] across
/// paths, one histogram per start; every start reuses the same path streams.
OccupationReport occupation_stability(const ModelSpec& m, std::span<const OccupationStart> starts,
                                      double burn_in, const EnsembleConfig& cfg,
                                      const OccupationBinning& binning = {});

/// P(inf_{t <= T} |X(t)| >= K2) from constant starts at each radius.
std::vector<CouplingRow> persistence_probability(const ModelSpec& m, std::span<const double> radii,
                                                 double K2, Mode i0, const EnsembleConfig& cfg);

/// E sup_{t <= T} |X(t)|^2 for each horizon in `horizons` (ascending), one ensemble run.
std::vector<MCEstimate> sup_moment_ladder(const ModelSpec& m, const Segment& phi0, Mode i0,
                                          std::span<const double> horizons, const EnsembleConfig& cfg);

}  // namespace pdswitch
