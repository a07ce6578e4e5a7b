#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pdswitch/model.hpp"
#include "pdswitch/segment.hpp"

namespace pdswitch {

// kThinning: candidate events at the constant rate M, accepted toward j with
// probability q_ij / M (exact given the bound). kBernoulli: at most one jump
// per step with probability q_i dt; first order, kept as a cross-check.
enum class JumpScheme { kThinning, kBernoulli };

JumpScheme scheme_from_string(const std::string& s);
std::string to_string(JumpScheme s);

struct SimConfig {
  double dt = 1e-3;
  double horizon = 1.0;
  JumpScheme scheme = JumpScheme::kThinning;
  std::uint64_t seed = 0;
  int record_stride = 1;

  std::int64_t steps() const;
  // Throws std::invalid_argument unless dt divides the delay and the jump scheme is valid for M.
  void validate(const ModelSpec& m) const;
};

/// Largest step <= min(r / 64, 1e-3 T) that divides r exactly.
double default_dt(double delay, double horizon);

struct JumpEvent {
  double t;
  Mode from;
  Mode to;
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<Mode> modes;
  std::vector<JumpEvent> jumps;
  Segment terminal;
  bool blown_up = false;
};

/// Advances (X, a) one grid step at a time. Rates are read from the segment
/// at the last grid point; X is integrated by Euler-Maruyama piecewise between
/// accepted jump times within a step, with coefficients re-read after each jump.
///
/// With a shadow generator the stepper runs the basic coupling of a (driven
/// by Q(X_t)) with a chain a_hat driven by the shadow, using the thinning
/// scheme at rate 2M; decouple_time() is the first time they differ.
class PathStepper {
 public:
  PathStepper(const ModelSpec& m, Segment phi0, Mode i0, const SimConfig& cfg,
              std::uint64_t path_index, const SparseGenerator* shadow = nullptr);

  // Returns false (and does nothing) once the state has blown up.
  bool step();

  double time() const { return static_cast<double>(steps_) * cfg_.dt; }
  std::int64_t steps_taken() const { return steps_; }
  const Segment& segment() const { return seg_; }
  Eigen::Map<const Vector> state() const { return seg_.newest(); }
  Mode mode() const { return mode_; }
  Mode shadow_mode() const { return hat_; }
  double decouple_time() const { return decouple_time_; }
  std::span<const JumpEvent> step_jumps() const { return jumps_; }
  bool blown_up() const { return blown_up_; }

 private:
  void euler(double h, Mode i);
  void thinning_events(double t1);
  void coupled_events(double t1);
  void bernoulli_event(double t1);
  Mode pick(const RateRow& row, double u) const;
  void fetch_rates(Mode i, RateRow& out);

  const ModelSpec& m_;
  SimConfig cfg_;
  Segment seg_;
  Mode mode_;
  Mode hat_;
  const SparseGenerator* shadow_;
  std::int64_t steps_ = 0;
  bool blown_up_ = false;
  double decouple_time_ = std::numeric_limits<double>::infinity();
  double next_candidate_ = 0.0;
  double clock_rate_;

  Vector x_, drift_, noise_;
  Matrix diff_;
  RateRow row_, hat_row_;
  std::vector<JumpEvent> jumps_;
  std::mt19937_64 bm_rng_, jump_rng_;
  std::normal_distribution<double> normal_;
  std::exponential_distribution<double> clock_;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
};

TrajectoryRecord simulate(const ModelSpec& m, const Segment& phi0, Mode i0, const SimConfig& cfg,
                          std::uint64_t path_index = 0);

/// Paths first_path .. first_path + n_paths - 1, each on its own (seed, path)
/// streams; identical output for any thread count.
std::vector<TrajectoryRecord> simulate_ensemble(const ModelSpec& m, const Segment& phi0, Mode i0,
                                                const SimConfig& cfg, std::size_t n_paths,
                                                unsigned threads = 1, std::uint64_t first_path = 0);

struct CoupledRecord {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<Mode> modes;
  std::vector<Mode> hat_modes;
  double decouple_time = std::numeric_limits<double>::infinity();  // infinity: never by T
  bool blown_up = false;
};

CoupledRecord simulate_coupled(const ModelSpec& m, const Linearization& lin, const Segment& phi0,
                               Mode i0, const SimConfig& cfg, std::uint64_t path_index = 0);

}  // namespace pdswitch
