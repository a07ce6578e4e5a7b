#include "pdswitch/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pdswitch/parallel.hpp"

namespace pdswitch {

namespace {
constexpr double kBlowUp = 1e150;
}

JumpScheme scheme_from_string(const std::string& s) {
  if (s == "thinning") return JumpScheme::kThinning;
  if (s == "bernoulli") return JumpScheme::kBernoulli;
  throw std::invalid_argument("unknown jump scheme '" + s + "' (expected thinning or bernoulli)");
}

std::string to_string(JumpScheme s) { return s == JumpScheme::kThinning ? "thinning" : "bernoulli"; }

std::int64_t SimConfig::steps() const { return std::llround(horizon / dt); }

void SimConfig::validate(const ModelSpec& m) const {
  if (!(dt > 0.0)) throw std::invalid_argument("sim: dt must be positive");
  if (!(horizon >= 0.0)) throw std::invalid_argument("sim: horizon must be nonnegative");
  if (record_stride < 1) throw std::invalid_argument("sim: record stride must be positive");
  grid_intervals(m.delay, dt);
  if (scheme == JumpScheme::kBernoulli && !(dt * m.rate_bound < 0.5)) {
    throw std::invalid_argument("sim: bernoulli scheme needs dt * M < 0.5");
  }
}

double default_dt(double delay, double horizon) {
  const double target = std::min(delay / 64.0, horizon > 0.0 ? 1e-3 * horizon : delay / 64.0);
  return delay / std::ceil(delay / target - 1e-9);
}

PathStepper::PathStepper(const ModelSpec& m, Segment phi0, Mode i0, const SimConfig& cfg,
                         std::uint64_t path_index, const SparseGenerator* shadow)
    : m_(m), cfg_(cfg), seg_(std::move(phi0)), mode_(i0), hat_(i0), shadow_(shadow),
      clock_rate_(shadow ? 2.0 * m.rate_bound : m.rate_bound),
      x_(seg_.newest()), drift_(Vector::Zero(m.dim)), noise_(Vector::Zero(m.brownian_dim)),
      diff_(Matrix::Zero(m.dim, m.brownian_dim)),
      bm_rng_(make_stream(cfg.seed, path_index, 0)), jump_rng_(make_stream(cfg.seed, path_index, 1)),
      clock_(clock_rate_) {
  m.validate();
  if (i0 < 1) throw std::invalid_argument("sim: initial mode must be >= 1");
  if (seg_.dim() != m.dim) throw std::invalid_argument("sim: initial segment has wrong dimension");
  if (std::abs(seg_.delay() - m.delay) > 1e-12 * m.delay) {
    throw std::invalid_argument("sim: initial segment delay differs from the model's");
  }
  if (std::abs(seg_.grid_step() - cfg.dt) > 1e-12 * cfg.dt) {
    throw std::invalid_argument("sim: initial segment grid does not match dt");
  }
  cfg_.validate(m);
  if (shadow_ && shadow_->rate_bound() > m.rate_bound * (1.0 + 1e-12)) {
    throw std::invalid_argument("sim: limit generator exceeds the model's rate bound");
  }
  row_.reserve(8);
  hat_row_.reserve(8);
  next_candidate_ = clock_(jump_rng_);
}

void PathStepper::fetch_rates(Mode i, RateRow& out) {
  out.clear();
  m_.rates(seg_, i, out);
  if (total_rate(out) > m_.rate_bound * (1.0 + 1e-9)) {
    throw std::domain_error(m_.name + ": total rate exceeds the declared bound M");
  }
}

Mode PathStepper::pick(const RateRow& row, double u) const {
  double cum = 0.0;
  for (const auto& e : row) {
    cum += e.rate;
    if (u < cum) return e.to;
  }
  return 0;  // no jump
}

void PathStepper::euler(double h, Mode i) {
  if (h <= 0.0) return;
  m_.drift(x_, i, drift_);
  m_.diffusion(x_, i, diff_);
  for (int k = 0; k < m_.brownian_dim; ++k) noise_[k] = normal_(bm_rng_);
  x_ += h * drift_;
  x_.noalias() += std::sqrt(h) * (diff_ * noise_);
  if (m_.project) m_.project(x_);
}

void PathStepper::thinning_events(double t1) {
  while (next_candidate_ <= t1) {
    fetch_rates(mode_, row_);
    const Mode j = pick(row_, unif_(jump_rng_) * clock_rate_);
    if (j != 0) {
      jumps_.push_back({next_candidate_, mode_, j});
      mode_ = j;
    }
    next_candidate_ += clock_(jump_rng_);
  }
}

void PathStepper::coupled_events(double t1) {
  while (next_candidate_ <= t1) {
    const double u = unif_(jump_rng_) * clock_rate_;
    fetch_rates(mode_, row_);
    if (mode_ == hat_) {
      shadow_->row(hat_, hat_row_);
      // Basic coupling: joint jump at min(q, qhat), solo jumps at the positive parts.
      double cum = 0.0;
      auto hat_rate = [&](Mode j) {
        double s = 0.0;
        for (const auto& e : hat_row_) {
          if (e.to == j) s += e.rate;
        }
        return s;
      };
      auto own_rate = [&](Mode j) {
        double s = 0.0;
        for (const auto& e : row_) {
          if (e.to == j) s += e.rate;
        }
        return s;
      };
      Mode new_mode = mode_, new_hat = hat_;
      bool done = false;
      for (const auto& e : row_) {
        const double qh = hat_rate(e.to);
        const double both = std::min(e.rate, qh);
        const double solo = std::max(e.rate - qh, 0.0);
        if (u < (cum += both)) {
          new_mode = new_hat = e.to;
          done = true;
          break;
        }
        if (u < (cum += solo)) {
          new_mode = e.to;
          done = true;
          break;
        }
      }
      if (!done) {
        for (const auto& e : hat_row_) {
          const double solo = std::max(e.rate - own_rate(e.to), 0.0);
          if (u < (cum += solo)) {
            new_hat = e.to;
            break;
          }
        }
      }
      if (new_mode != mode_) jumps_.push_back({next_candidate_, mode_, new_mode});
      mode_ = new_mode;
      hat_ = new_hat;
      if (mode_ != hat_ && std::isinf(decouple_time_)) decouple_time_ = next_candidate_;
    } else if (u < m_.rate_bound) {
      if (const Mode j = pick(row_, u); j != 0) {
        jumps_.push_back({next_candidate_, mode_, j});
        mode_ = j;
      }
    } else {
      shadow_->row(hat_, hat_row_);
      if (const Mode j = pick(hat_row_, u - m_.rate_bound); j != 0) hat_ = j;
    }
    next_candidate_ += clock_(jump_rng_);
  }
}

void PathStepper::bernoulli_event(double t1) {
  fetch_rates(mode_, row_);
  const double q = total_rate(row_);
  const double u = unif_(jump_rng_);
  const double v = unif_(jump_rng_);
  if (u < q * cfg_.dt) {
    if (const Mode j = pick(row_, v * q); j != 0) jumps_.push_back({t1, mode_, j});
  }
}

bool PathStepper::step() {
  if (blown_up_) return false;
  const double t0 = time();
  const double t1 = static_cast<double>(steps_ + 1) * cfg_.dt;
  jumps_.clear();
  const Mode start_mode = mode_;

  if (cfg_.scheme == JumpScheme::kBernoulli && !shadow_) {
    bernoulli_event(t1);
    euler(cfg_.dt, mode_);
    if (!jumps_.empty()) mode_ = jumps_.back().to;
  } else {
    if (shadow_) {
      coupled_events(t1);
    } else {
      thinning_events(t1);
    }
    // Rates only read the grid segment, so accepted jumps are known before X moves.
    double t = t0;
    Mode current = start_mode;
    for (const auto& ev : jumps_) {
      euler(ev.t - t, current);
      t = ev.t;
      current = ev.to;
    }
    euler(t1 - t, current);
  }

  ++steps_;
  if (!x_.allFinite() || x_.cwiseAbs().maxCoeff() > kBlowUp) {
    blown_up_ = true;
    return false;
  }
  seg_.push(x_);
  return true;
}

TrajectoryRecord simulate(const ModelSpec& m, const Segment& phi0, Mode i0, const SimConfig& cfg,
                          std::uint64_t path_index) {
  PathStepper stepper(m, phi0, i0, cfg, path_index);
  TrajectoryRecord rec{.terminal = phi0};
  const auto n = cfg.steps();
  auto record = [&] {
    rec.times.push_back(stepper.time());
    rec.states.emplace_back(stepper.state());
    rec.modes.push_back(stepper.mode());
  };
  record();
  for (std::int64_t k = 1; k <= n; ++k) {
    if (!stepper.step()) {
      rec.blown_up = true;
      break;
    }
    rec.jumps.insert(rec.jumps.end(), stepper.step_jumps().begin(), stepper.step_jumps().end());
    if (k % cfg.record_stride == 0 || k == n) record();
  }
  rec.terminal = stepper.segment();
  return rec;
}

std::vector<TrajectoryRecord> simulate_ensemble(const ModelSpec& m, const Segment& phi0, Mode i0,
                                                const SimConfig& cfg, std::size_t n_paths,
                                                unsigned threads, std::uint64_t first_path) {
  return map_paths<TrajectoryRecord>(first_path, n_paths, threads, [&](std::uint64_t k) {
    return simulate(m, phi0, i0, cfg, k);
  });
}

CoupledRecord simulate_coupled(const ModelSpec& m, const Linearization& lin, const Segment& phi0,
                               Mode i0, const SimConfig& cfg, std::uint64_t path_index) {
  PathStepper stepper(m, phi0, i0, cfg, path_index, &lin.qhat);
  CoupledRecord rec;
  const auto n = cfg.steps();
  auto record = [&] {
    rec.times.push_back(stepper.time());
    rec.states.emplace_back(stepper.state());
    rec.modes.push_back(stepper.mode());
    rec.hat_modes.push_back(stepper.shadow_mode());
  };
  record();
  for (std::int64_t k = 1; k <= n; ++k) {
    if (!stepper.step()) {
      rec.blown_up = true;
      break;
    }
    if (k % cfg.record_stride == 0 || k == n) record();
  }
  rec.decouple_time = stepper.decouple_time();
  return rec;
}

}  // namespace pdswitch
